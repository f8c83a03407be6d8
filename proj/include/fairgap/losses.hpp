#pragma once

#include <span>
#include <vector>

#include <json.hpp>

namespace fairgap {

// Probabilities are clamped into [kProbabilityEpsilon, 1 - kProbabilityEpsilon]
// before every log. Gradients use the unclamped sigmoid.
inline constexpr double kProbabilityEpsilon = 1e-12;

struct ClassWeights {
  double w0 = 1.0;  // weight of y = 0
  double w1 = 1.0;  // weight of y = 1

  double of(int label) const { return label ? w1 : w0; }
};

// How the overall-error term is averaged.
enum class OverallError {
  kSampleMean,  // wBCE over the full batch
  kGroupMean,   // mean of the per-group CE values
};

struct LossBreakdown {
  double overall_error = 0.0;
  std::vector<double> per_group_ce;  // index = group id
  double penalty = 0.0;              // sum over ordered pairs i != j of (CE_i - CE_j)^2
  double lambda = 0.0;
  double total = 0.0;                // overall_error + lambda * penalty
};

double sigmoid(double logit);

double bce(std::span<const double> probabilities, std::span<const int> labels);

// Inverse-frequency weights n / (2 n_c); mean weight over the input is 1.
ClassWeights class_weights(std::span<const int> labels);

double wbce(std::span<const double> probabilities, std::span<const int> labels,
            const ClassWeights& weights);

// Weighted BCE restricted to each group, using the same global weights.
// Every group id in [0, num_groups) must be present.
std::vector<double> group_ce(std::span<const double> probabilities, std::span<const int> labels,
                             std::span<const int> groups, int num_groups,
                             const ClassWeights& weights);

LossBreakdown gap_loss(std::span<const double> probabilities, std::span<const int> labels,
                       std::span<const int> groups, int num_groups, double lambda,
                       const ClassWeights& weights,
                       OverallError overall = OverallError::kSampleMean);

// d(wBCE)/d(logit_k) = w(y_k) (p_k - y_k) / n.
std::vector<double> wbce_gradient(std::span<const double> logits, std::span<const int> labels,
                                  const ClassWeights& weights);

// d(GAP total)/d(logit_k) through the sigmoid, the per-group means, and the
// squared pairwise penalty.
std::vector<double> gap_gradient(std::span<const double> logits, std::span<const int> labels,
                                 std::span<const int> groups, int num_groups, double lambda,
                                 const ClassWeights& weights,
                                 OverallError overall = OverallError::kSampleMean);

nlohmann::json to_json(const LossBreakdown& loss);

}  // namespace fairgap
