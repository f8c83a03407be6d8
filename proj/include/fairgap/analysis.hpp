#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairgap/dataset.hpp"
#include "fairgap/group_metrics.hpp"
#include "fairgap/trainer.hpp"

namespace fairgap {

// One trained model's position in accuracy / fairness space.
struct TradeoffPoint {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  NotionValues fairness{};
  double ad = 0.0;

  bool operator==(const TradeoffPoint&) const = default;
};

// Trains one GAP model per (lambda, seed) on `train` (single run, restarts
// ignored) and evaluates it on `test`. Points come back ordered by lambda
// index, then seed index, whatever order the cells finish in.
std::vector<TradeoffPoint> lambda_sweep(const FeatureMatrix& train, const FeatureMatrix& test,
                                        const TrainConfig& base, std::span<const double> lambdas,
                                        std::span<const std::uint64_t> seeds);

std::vector<double> default_lambda_grid();

enum class Unfairness {
  kAbsolute,  // |value - ideal|
  kLogRatio,  // |log value| for ratio notions, |value| for differences
};

// Distance of a notion value from its ideal. std::nullopt for a
// non-positive ratio under kLogRatio.
std::optional<double> unfairness(FairnessNotion notion, double value, Unfairness mode);

struct FrontPoint {
  TradeoffPoint point;
  double unfairness = 0.0;
};

struct ParetoFront {
  FairnessNotion notion = FairnessNotion::kEqualizedOdds;
  Unfairness mode = Unfairness::kAbsolute;
  std::vector<FrontPoint> points;  // unfairness ascending, accuracy strictly ascending
};

// Non-dominated points in (lower unfairness, higher accuracy). Points that tie
// on both coordinates collapse to the one with the lowest seed, then lambda.
// Points whose notion value is undefined are ignored; kEmptyFront if none remain.
ParetoFront pareto_front(std::span<const TradeoffPoint> points, FairnessNotion notion,
                         Unfairness mode = Unfairness::kAbsolute);

struct FairnessBaseline {
  double accuracy = 0.0;
  double unfairness = 0.0;
  bool extrapolated = false;  // minimum unfairness exceeds the tolerance
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

// Accuracy at the front's minimum-unfairness point. No curve is fitted.
std::optional<FairnessBaseline> fairness_baseline(const ParetoFront& front, double tolerance);

struct ViolinSummary {
  std::string variable;
  std::string group;
  std::size_t count = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;  // trapezoid integral over grid == 1
};

// Linear interpolation between order statistics at position p * (n - 1).
double quantile_sorted(std::span<const double> sorted, double p);

// Silverman's rule 0.9 * min(sd, IQR / 1.34) * n^(-1/5) with the sample sd.
// A zero IQR falls back to the sd alone; zero spread falls back to
// 1e-3 * max(1, |value|).
double silverman_bandwidth(std::span<const double> values);

// Gaussian KDE on grid_points evenly spaced points over [min - 3h, max + 3h].
ViolinSummary violin_summary(std::span<const double> values, int grid_points = 256,
                             std::optional<double> bandwidth = std::nullopt);

// Wasserstein-1 distance between two empirical distributions, integrated over
// the merged quantile breakpoints of the sorted samples.
double distribution_distance(std::span<const double> a, std::span<const double> b);

struct ProxyColumn {
  std::string name;
  std::vector<std::optional<double>> values;  // one per row; missing values are skipped
};

// Binary split of the rows; rows with no side take part in neither.
struct Partition {
  std::string name;
  std::string side_names[2];
  std::vector<std::optional<int>> side;  // one per row, 0 or 1
};

struct ProxyEntry {
  std::string feature;
  std::string partition;
  double distance = 0.0;  // W1 between the feature on side 0 and on side 1
  ViolinSummary violins[2];
};

struct ProxyScore {
  std::string feature;
  std::string partition_a;
  std::string partition_b;
  double score = 0.0;  // |distance under a - distance under b|
};

struct ProxyMatrix {
  std::vector<ProxyEntry> entries;  // feature-major, partitions in input order
  std::vector<ProxyScore> scores;   // per feature, per unordered partition pair
};

ProxyMatrix proxy_matrix(std::span<const ProxyColumn> features,
                         std::span<const Partition> partitions, int grid_points = 256);

// Partitions by name: "race" (first two configured race levels), "sex", or
// "two_year_recid". Features must be numeric record variables (kType otherwise).
Partition partition_from_table(const RecordTable& table, const std::string& name,
                               const std::vector<std::string>& race_levels);

ProxyMatrix proxy_report(const RecordTable& table, const std::vector<std::string>& features,
                         const std::vector<std::string>& partitions,
                         const std::vector<std::string>& race_levels, int grid_points = 256);

nlohmann::json to_json(const ParetoFront& front);
nlohmann::json to_json(const FairnessBaseline& baseline);
nlohmann::json to_json(const ViolinSummary& violin);
nlohmann::json to_json(const ProxyMatrix& matrix);

// Sweep CSV: lambda, seed, accuracy, ad, f1..f16 (undefined values left empty).
std::string sweep_to_csv(std::span<const TradeoffPoint> points);
std::vector<TradeoffPoint> sweep_from_csv(std::istream& in);

}  // namespace fairgap
