#include "fairgap/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairgap/error.hpp"

namespace fairgap {
namespace {

void check_batch(std::size_t n_values, std::size_t n_labels) {
  if (n_values != n_labels)
    throw Error(ErrorKind::kDimension, "loss inputs differ in length: " +
                                           std::to_string(n_values) + " vs " +
                                           std::to_string(n_labels));
  if (n_values == 0) throw Error(ErrorKind::kArity, "loss requires at least one sample");
}

void check_groups(std::span<const int> groups, std::size_t n, int num_groups) {
  if (groups.size() != n)
    throw Error(ErrorKind::kDimension, "group vector length differs from batch length");
  if (num_groups < 1) throw Error(ErrorKind::kArity, "num_groups must be positive");
}

// Per-sample weighted cross-entropy with clamped probability.
double sample_loss(double p, int y, const ClassWeights& w) {
  const double q = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return y ? -w.w1 * std::log(q) : -w.w0 * std::log1p(-q);
}

// Sums in ascending order so the result does not depend on sample order.
double order_free_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce(std::span<const double> probabilities, std::span<const int> labels) {
  return wbce(probabilities, labels, ClassWeights{1.0, 1.0});
}

ClassWeights class_weights(std::span<const int> labels) {
  if (labels.empty()) throw Error(ErrorKind::kArity, "class weights need at least one label");
  const auto n = static_cast<double>(labels.size());
  const auto positives = static_cast<double>(std::count_if(
      labels.begin(), labels.end(), [](int y) { return y != 0; }));
  const double negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw Error(ErrorKind::kDegenerateLabels, "class weights need both labels present");
  return {n / (2.0 * negatives), n / (2.0 * positives)};
}

double wbce(std::span<const double> probabilities, std::span<const int> labels,
            const ClassWeights& weights) {
  check_batch(probabilities.size(), labels.size());
  std::vector<double> terms(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k)
    terms[k] = sample_loss(probabilities[k], labels[k], weights);
  return order_free_sum(terms) / static_cast<double>(labels.size());
}

std::vector<double> group_ce(std::span<const double> probabilities, std::span<const int> labels,
                             std::span<const int> groups, int num_groups,
                             const ClassWeights& weights) {
  check_batch(probabilities.size(), labels.size());
  check_groups(groups, labels.size(), num_groups);
  std::vector<std::vector<double>> terms(static_cast<std::size_t>(num_groups));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const int g = groups[k];
    if (g < 0 || g >= num_groups)
      throw Error(ErrorKind::kDimension, "group id " + std::to_string(g) + " out of range");
    terms[static_cast<std::size_t>(g)].push_back(sample_loss(probabilities[k], labels[k], weights));
  }
  std::vector<double> ce(terms.size());
  for (std::size_t g = 0; g < terms.size(); ++g) {
    if (terms[g].empty())
      throw Error(ErrorKind::kDegenerateGroup,
                  "group " + std::to_string(g) + " is absent from the batch");
    ce[g] = order_free_sum(terms[g]) / static_cast<double>(terms[g].size());
  }
  return ce;
}

LossBreakdown gap_loss(std::span<const double> probabilities, std::span<const int> labels,
                       std::span<const int> groups, int num_groups, double lambda,
                       const ClassWeights& weights, OverallError overall) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kConfig, "lambda must be non-negative");
  LossBreakdown out;
  out.lambda = lambda;
  out.per_group_ce = group_ce(probabilities, labels, groups, num_groups, weights);
  if (overall == OverallError::kSampleMean) {
    out.overall_error = wbce(probabilities, labels, weights);
  } else {
    double sum = 0.0;
    for (double ce : out.per_group_ce) sum += ce;
    out.overall_error = sum / static_cast<double>(num_groups);
  }
  for (std::size_t i = 0; i < out.per_group_ce.size(); ++i)
    for (std::size_t j = 0; j < out.per_group_ce.size(); ++j)
      if (i != j) {
        const double d = out.per_group_ce[i] - out.per_group_ce[j];
        out.penalty += d * d;
      }
  out.total = out.overall_error + lambda * out.penalty;
  return out;
}

std::vector<double> wbce_gradient(std::span<const double> logits, std::span<const int> labels,
                                  const ClassWeights& weights) {
  check_batch(logits.size(), labels.size());
  const auto n = static_cast<double>(labels.size());
  std::vector<double> grad(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k)
    grad[k] = weights.of(labels[k]) * (sigmoid(logits[k]) - labels[k]) / n;
  return grad;
}

std::vector<double> gap_gradient(std::span<const double> logits, std::span<const int> labels,
                                 std::span<const int> groups, int num_groups, double lambda,
                                 const ClassWeights& weights, OverallError overall) {
  std::vector<double> probabilities(logits.size());
  std::transform(logits.begin(), logits.end(), probabilities.begin(), sigmoid);
  const auto loss = gap_loss(probabilities, labels, groups, num_groups, lambda, weights, overall);

  const auto G = static_cast<std::size_t>(num_groups);
  std::vector<double> group_size(G, 0.0);
  for (int g : groups) group_size[static_cast<std::size_t>(g)] += 1.0;

  // d(total)/d(CE_g): the ordered-pair sum counts each unordered pair twice,
  // so d(penalty)/d(CE_g) = 4 * sum_{j != g} (CE_g - CE_j).
  std::vector<double> d_ce(G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    double s = 0.0;
    for (std::size_t j = 0; j < G; ++j)
      if (j != g) s += loss.per_group_ce[g] - loss.per_group_ce[j];
    d_ce[g] = lambda * 4.0 * s;
    if (overall == OverallError::kGroupMean) d_ce[g] += 1.0 / static_cast<double>(G);
  }

  const auto n = static_cast<double>(labels.size());
  std::vector<double> grad(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto g = static_cast<std::size_t>(groups[k]);
    const double d_sample = weights.of(labels[k]) * (probabilities[k] - labels[k]);
    double coeff = d_ce[g] / group_size[g];
    if (overall == OverallError::kSampleMean) coeff += 1.0 / n;
    grad[k] = coeff * d_sample;
  }
  return grad;
}

nlohmann::json to_json(const LossBreakdown& loss) {
  return {{"overall_error", loss.overall_error},
          {"per_group_ce", loss.per_group_ce},
          {"penalty", loss.penalty},
          {"lambda", loss.lambda},
          {"total", loss.total}};
}

}  // namespace fairgap
