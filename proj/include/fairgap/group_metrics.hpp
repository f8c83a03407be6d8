#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fairgap {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;

  long long n() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Per-group confusion counts, indexed by group id.
struct GroupConfusion {
  std::vector<ConfusionCounts> groups;

  int num_groups() const { return static_cast<int>(groups.size()); }
  long long total() const;
};

// predicted=1,actual=1 -> TP; 1,0 -> FP; 0,0 -> TN; 0,1 -> FN. Group ids must
// cover 0..G-1 with every id present at least once.
GroupConfusion confusion_by_group(std::span<const int> predicted, std::span<const int> actual,
                                  std::span<const int> groups);

enum class NotionKind { kDifference, kRatio };

// The sixteen group-fairness notions f1..f16, in label order.
enum class FairnessNotion {
  kEqualizedOdds = 1,
  kErrorDifference,
  kErrorRatio,
  kDiscoveryDifference,
  kDiscoveryRatio,
  kPredictiveEquality,
  kFprRatio,
  kForDifference,
  kForRatio,
  kDisparateImpact,
  kStatisticalParity,
  kEqualOpportunity,
  kFnrDifference,
  kFnrRatio,
  kAverageOddDifference,
  kPredictiveParity,
};

inline constexpr std::size_t kNotionCount = 16;

const std::array<FairnessNotion, kNotionCount>& all_notions();
std::string_view label(FairnessNotion notion);  // "f1".."f16"
std::string_view name(FairnessNotion notion);   // e.g. "Equalized Odds"
NotionKind kind(FairnessNotion notion);
double ideal_value(FairnessNotion notion);      // 0 for differences, 1 for ratios
std::size_t index_of(FairnessNotion notion);    // 0..15
FairnessNotion notion_from_label(std::string_view label_or_name);

// Group 0 is the protected group, group 1 the reference group. Returns
// std::nullopt whenever a denominator in the formula is zero. Throws kArity
// unless exactly two groups are present.
std::optional<double> fairness_metric(const GroupConfusion& gc, FairnessNotion notion);

// Absolute-value equalized odds: (|dFPR| + |dTPR|) / 2. Not one of f1..f16.
std::optional<double> absolute_equalized_odds(const GroupConfusion& gc);
// Error difference / ratio with each group's errors normalized by its own size.
std::optional<double> per_group_error_difference(const GroupConfusion& gc);
std::optional<double> per_group_error_ratio(const GroupConfusion& gc);

using NotionValues = std::array<std::optional<double>, kNotionCount>;

struct FairnessReport {
  NotionValues notions;
  double accuracy = 0.0;
  double accuracy_difference = 0.0;  // acc(group 1) - acc(group 0)
  std::vector<std::string> group_names;
  GroupConfusion confusion;

  const std::optional<double>& value(FairnessNotion n) const { return notions[index_of(n)]; }
};

FairnessReport full_report(std::span<const int> predicted, std::span<const int> actual,
                           std::span<const int> groups,
                           std::vector<std::string> group_names = {});
FairnessReport report_from_confusion(const GroupConfusion& gc,
                                     std::vector<std::string> group_names = {});

nlohmann::json to_json(const GroupConfusion& gc, const std::vector<std::string>& group_names);
nlohmann::json to_json(const FairnessReport& report);

}  // namespace fairgap
