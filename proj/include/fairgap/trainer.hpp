#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairgap/dataset.hpp"
#include "fairgap/group_metrics.hpp"
#include "fairgap/losses.hpp"
#include "fairgap/model.hpp"
#include "fairgap/optimizer.hpp"

namespace fairgap {

enum class LossKind { kBce, kWbce, kGap };
std::string_view to_string(LossKind kind);
LossKind loss_from_string(std::string_view name);

struct TrainConfig {
  LossKind loss = LossKind::kGap;
  double lambda = 0.0;  // only used by kGap
  double learning_rate = 0.01;
  int epochs = 200;
  int batch_size = 128;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamSettings adam;
  std::uint64_t seed = 0;
  int restarts = 10;
  double validation_fraction = 0.2;
  std::vector<int> hidden_layers{16};
  Activation activation = Activation::kRelu;
  OverallError overall_error = OverallError::kSampleMean;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 0 = before the first update
  LossBreakdown train_loss;
  LossBreakdown validation_loss;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  std::optional<double> train_ad;       // defined for two groups
  std::optional<double> validation_ad;
};

struct TrainHistory {
  std::uint64_t seed = 0;
  EpochRecord initial;
  std::vector<EpochRecord> epochs;  // one per epoch, no early stopping
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

// Called once per optimizer step with the row indices (into the fit split) of the batch.
using BatchObserver = std::function<void(int epoch, std::span<const std::size_t> batch)>;

// Carves a stratified validation split (seeded by config.seed) off `data`, then trains.
TrainResult train(const FeatureMatrix& data, const TrainConfig& config);

TrainResult train_on_split(const FeatureMatrix& fit, const FeatureMatrix& validation,
                           const TrainConfig& config, const BatchObserver& observer = {});

// Batches for one epoch. Under GAP every batch holds every group, with each
// group's rows spread across batches as evenly as possible.
std::vector<std::vector<std::size_t>> make_batches(const FeatureMatrix& data, int batch_size,
                                                   bool group_stratified, std::mt19937_64& rng);

struct RunSummary {
  std::uint64_t seed = 0;
  double validation_loss = 0.0;
  double validation_abs_ad = 0.0;
  double validation_accuracy = 0.0;
};

struct SelectionRecord {
  std::uint64_t selected_seed = 0;
  std::size_t selected_index = 0;
  std::vector<RunSummary> runs;
};

// Lowest validation loss; ties go to lower |AD|, then lower seed.
std::size_t select_run(std::span<const RunSummary> runs);

struct MultiRestartResult {
  ModelParams best;
  std::vector<TrainHistory> histories;  // in seed order
  SelectionRecord selection;
};

// Runs config.restarts trainings with seeds seed, seed+1, ... on one shared
// fit/validation split and keeps the run chosen by select_run.
MultiRestartResult multi_restart(const FeatureMatrix& data, const TrainConfig& config);

// Forward pass, threshold at `threshold`, full fairness report with confusion counts.
FairnessReport evaluate(const ModelParams& params, const FeatureMatrix& data,
                        double threshold = 0.5);

nlohmann::json to_json(const TrainConfig& config);
nlohmann::json to_json(const EpochRecord& record, std::uint64_t seed);
nlohmann::json to_json(const SelectionRecord& selection);
// One JSON object per line, one line per epoch (initial state first).
std::string history_to_jsonl(std::span<const TrainHistory> histories);

}  // namespace fairgap
