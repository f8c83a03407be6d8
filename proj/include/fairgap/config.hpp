#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairgap/analysis.hpp"
#include "fairgap/dataset.hpp"
#include "fairgap/trainer.hpp"

namespace fairgap {

struct SweepSettings {
  std::vector<double> lambdas = default_lambda_grid();
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
};

struct ParetoSettings {
  double tolerance = 0.02;
  Unfairness mode = Unfairness::kAbsolute;
  std::vector<std::string> notions;  // empty: all sixteen
};

struct ProxySettings {
  std::vector<std::string> variables{"age", "priors_count"};
  std::vector<std::string> partitions{"race", "two_year_recid"};
  int grid_points = 256;
};

// Everything a pipeline run needs. Loaded from one JSON document whose
// unknown keys are rejected; absent keys keep the defaults below.
struct RunConfig {
  std::string data_path;
  ColumnMap columns;
  CohortPolicy cohort;
  std::optional<std::vector<std::string>> numeric_features;      // default per cohort
  std::optional<std::vector<std::string>> categorical_features;  // default per cohort
  double test_fraction = 0.2;
  std::uint64_t split_seed = 42;
  TrainConfig train;
  SweepSettings sweep;
  ParetoSettings pareto;
  ProxySettings proxy;
  std::string output_dir = "fairgap-out";

  FeatureSchema schema() const;
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace fairgap
