#include "fairgap/group_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fairgap/error.hpp"

namespace fairgap {

long long GroupConfusion::total() const {
  long long sum = 0;
  for (const auto& g : groups) sum += g.n();
  return sum;
}

GroupConfusion confusion_by_group(std::span<const int> predicted, std::span<const int> actual,
                                  std::span<const int> groups) {
  if (predicted.size() != actual.size() || predicted.size() != groups.size())
    throw Error(ErrorKind::kDimension,
                "predicted/actual/groups lengths differ: " + std::to_string(predicted.size()) +
                    "/" + std::to_string(actual.size()) + "/" + std::to_string(groups.size()));
  if (predicted.empty()) throw Error(ErrorKind::kArity, "confusion requires at least one sample");

  const int max_group = *std::max_element(groups.begin(), groups.end());
  if (*std::min_element(groups.begin(), groups.end()) < 0)
    throw Error(ErrorKind::kDimension, "negative group id");
  GroupConfusion gc;
  gc.groups.resize(static_cast<std::size_t>(max_group) + 1);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    auto& c = gc.groups[static_cast<std::size_t>(groups[i])];
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++c.tp;
    else if (p) ++c.fp;
    else if (!a) ++c.tn;
    else ++c.fn;
  }
  for (std::size_t g = 0; g < gc.groups.size(); ++g)
    if (gc.groups[g].n() == 0)
      throw Error(ErrorKind::kDegenerateGroup, "group " + std::to_string(g) + " has no samples");
  return gc;
}

namespace {

struct NotionInfo {
  FairnessNotion notion;
  std::string_view label;
  std::string_view name;
  NotionKind kind;
};

constexpr std::array<NotionInfo, kNotionCount> kNotions{{
    {FairnessNotion::kEqualizedOdds, "f1", "Equalized Odds", NotionKind::kDifference},
    {FairnessNotion::kErrorDifference, "f2", "Error difference", NotionKind::kDifference},
    {FairnessNotion::kErrorRatio, "f3", "Error ratio", NotionKind::kRatio},
    {FairnessNotion::kDiscoveryDifference, "f4", "Discovery difference", NotionKind::kDifference},
    {FairnessNotion::kDiscoveryRatio, "f5", "Discovery ratio", NotionKind::kRatio},
    {FairnessNotion::kPredictiveEquality, "f6", "Predictive Equality", NotionKind::kDifference},
    {FairnessNotion::kFprRatio, "f7", "FPR ratio", NotionKind::kRatio},
    {FairnessNotion::kForDifference, "f8", "False Omission rate (FOR) difference",
     NotionKind::kDifference},
    {FairnessNotion::kForRatio, "f9", "False Omission rate (FOR) ratio", NotionKind::kRatio},
    {FairnessNotion::kDisparateImpact, "f10", "Disparate Impact", NotionKind::kRatio},
    {FairnessNotion::kStatisticalParity, "f11", "Statistical Parity", NotionKind::kDifference},
    {FairnessNotion::kEqualOpportunity, "f12", "Equal Opportunity", NotionKind::kDifference},
    {FairnessNotion::kFnrDifference, "f13", "FNR difference", NotionKind::kDifference},
    {FairnessNotion::kFnrRatio, "f14", "FNR ratio", NotionKind::kRatio},
    {FairnessNotion::kAverageOddDifference, "f15", "Average odd difference",
     NotionKind::kDifference},
    {FairnessNotion::kPredictiveParity, "f16", "Predictive Parity", NotionKind::kDifference},
}};

const NotionInfo& info(FairnessNotion n) { return kNotions[index_of(n)]; }

using Value = std::optional<double>;

Value frac(long long num, long long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Value diff(Value a, Value b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

Value ratio(Value a, Value b) {
  if (!a || !b || *b == 0.0) return std::nullopt;
  return *a / *b;
}

Value half_sum(Value a, Value b) {
  if (!a || !b) return std::nullopt;
  return 0.5 * (*a + *b);
}

void require_two_groups(const GroupConfusion& gc) {
  if (gc.num_groups() != 2)
    throw Error(ErrorKind::kArity, "fairness notions are defined for exactly two groups, got " +
                                       std::to_string(gc.num_groups()));
}

}  // namespace

const std::array<FairnessNotion, kNotionCount>& all_notions() {
  static const auto notions = [] {
    std::array<FairnessNotion, kNotionCount> out{};
    for (std::size_t i = 0; i < kNotionCount; ++i) out[i] = kNotions[i].notion;
    return out;
  }();
  return notions;
}

std::size_t index_of(FairnessNotion n) { return static_cast<std::size_t>(n) - 1; }
std::string_view label(FairnessNotion n) { return info(n).label; }
std::string_view name(FairnessNotion n) { return info(n).name; }
NotionKind kind(FairnessNotion n) { return info(n).kind; }
double ideal_value(FairnessNotion n) { return kind(n) == NotionKind::kRatio ? 1.0 : 0.0; }

FairnessNotion notion_from_label(std::string_view text) {
  for (const auto& i : kNotions)
    if (i.label == text || i.name == text) return i.notion;
  if (text == "EOd" || text == "eod") return FairnessNotion::kEqualizedOdds;
  throw Error(ErrorKind::kConfig, "unknown fairness notion '" + std::string(text) + "'");
}

std::optional<double> fairness_metric(const GroupConfusion& gc, FairnessNotion notion) {
  require_two_groups(gc);
  const auto& a = gc.groups[0];
  const auto& b = gc.groups[1];
  const long long total = a.n() + b.n();

  const Value fpr0 = frac(a.fp, a.fp + a.tn), fpr1 = frac(b.fp, b.fp + b.tn);
  const Value tpr0 = frac(a.tp, a.tp + a.fn), tpr1 = frac(b.tp, b.tp + b.fn);
  const Value fnr0 = frac(a.fn, a.fn + a.tp), fnr1 = frac(b.fn, b.fn + b.tp);
  const Value err0 = frac(a.fp + a.fn, total), err1 = frac(b.fp + b.fn, total);
  const Value fdr0 = frac(a.fp, a.tp + a.fp), fdr1 = frac(b.fp, b.tp + b.fp);
  const Value for0 = frac(a.fn, a.tn + a.fn), for1 = frac(b.fn, b.tn + b.fn);
  const Value pos0 = frac(a.tp + a.fp, a.n()), pos1 = frac(b.tp + b.fp, b.n());
  const Value ppv0 = frac(a.tp, a.tp + a.fp), ppv1 = frac(b.tp, b.tp + b.fp);

  switch (notion) {
    case FairnessNotion::kEqualizedOdds:
    case FairnessNotion::kAverageOddDifference:
      return half_sum(diff(fpr0, fpr1), diff(tpr0, tpr1));
    case FairnessNotion::kErrorDifference: return diff(err0, err1);
    case FairnessNotion::kErrorRatio: return ratio(err0, err1);
    case FairnessNotion::kDiscoveryDifference: return diff(fdr0, fdr1);
    case FairnessNotion::kDiscoveryRatio: return ratio(fdr0, fdr1);
    case FairnessNotion::kPredictiveEquality: return diff(fpr0, fpr1);
    case FairnessNotion::kFprRatio: return ratio(fpr0, fpr1);
    case FairnessNotion::kForDifference: return diff(for0, for1);
    case FairnessNotion::kForRatio: return ratio(for0, for1);
    case FairnessNotion::kDisparateImpact: return ratio(pos0, pos1);
    case FairnessNotion::kStatisticalParity: return diff(pos0, pos1);
    case FairnessNotion::kEqualOpportunity: return diff(tpr0, tpr1);
    case FairnessNotion::kFnrDifference: return diff(fnr0, fnr1);
    case FairnessNotion::kFnrRatio: return ratio(fnr0, fnr1);
    case FairnessNotion::kPredictiveParity: return diff(ppv0, ppv1);
  }
  return std::nullopt;
}

std::optional<double> absolute_equalized_odds(const GroupConfusion& gc) {
  require_two_groups(gc);
  const auto& a = gc.groups[0];
  const auto& b = gc.groups[1];
  const auto dfpr = diff(frac(a.fp, a.fp + a.tn), frac(b.fp, b.fp + b.tn));
  const auto dtpr = diff(frac(a.tp, a.tp + a.fn), frac(b.tp, b.tp + b.fn));
  if (!dfpr || !dtpr) return std::nullopt;
  return 0.5 * (std::abs(*dfpr) + std::abs(*dtpr));
}

std::optional<double> per_group_error_difference(const GroupConfusion& gc) {
  require_two_groups(gc);
  const auto& a = gc.groups[0];
  const auto& b = gc.groups[1];
  return diff(frac(a.fp + a.fn, a.n()), frac(b.fp + b.fn, b.n()));
}

std::optional<double> per_group_error_ratio(const GroupConfusion& gc) {
  require_two_groups(gc);
  const auto& a = gc.groups[0];
  const auto& b = gc.groups[1];
  return ratio(frac(a.fp + a.fn, a.n()), frac(b.fp + b.fn, b.n()));
}

FairnessReport report_from_confusion(const GroupConfusion& gc,
                                     std::vector<std::string> group_names) {
  require_two_groups(gc);
  for (int g = 0; g < 2; ++g)
    if (gc.groups[static_cast<std::size_t>(g)].n() == 0)
      throw Error(ErrorKind::kDegenerateGroup, "group " + std::to_string(g) + " has no samples");
  FairnessReport report;
  for (auto n : all_notions()) report.notions[index_of(n)] = fairness_metric(gc, n);
  long long correct = 0;
  for (const auto& c : gc.groups) correct += c.tp + c.tn;
  report.accuracy = static_cast<double>(correct) / static_cast<double>(gc.total());
  auto acc = [](const ConfusionCounts& c) {
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.n());
  };
  report.accuracy_difference = acc(gc.groups[1]) - acc(gc.groups[0]);
  if (group_names.empty()) group_names = {"group0", "group1"};
  report.group_names = std::move(group_names);
  report.confusion = gc;
  return report;
}

FairnessReport full_report(std::span<const int> predicted, std::span<const int> actual,
                           std::span<const int> groups, std::vector<std::string> group_names) {
  return report_from_confusion(confusion_by_group(predicted, actual, groups),
                               std::move(group_names));
}

nlohmann::json to_json(const GroupConfusion& gc, const std::vector<std::string>& group_names) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t g = 0; g < gc.groups.size(); ++g) {
    const auto& c = gc.groups[g];
    out.push_back({{"group", g < group_names.size() ? group_names[g] : std::to_string(g)},
                   {"tp", c.tp},
                   {"fp", c.fp},
                   {"tn", c.tn},
                   {"fn", c.fn},
                   {"n", c.n()}});
  }
  return out;
}

nlohmann::json to_json(const FairnessReport& report) {
  nlohmann::json notions = nlohmann::json::array();
  for (auto n : all_notions()) {
    const auto& v = report.value(n);
    notions.push_back({{"label", label(n)},
                       {"name", name(n)},
                       {"kind", kind(n) == NotionKind::kRatio ? "ratio" : "difference"},
                       {"value", v ? nlohmann::json(*v) : nlohmann::json(nullptr)}});
  }
  return {{"accuracy", report.accuracy},
          {"accuracy_difference", report.accuracy_difference},
          {"groups", report.group_names},
          {"notions", notions},
          {"confusion", to_json(report.confusion, report.group_names)}};
}

}  // namespace fairgap
