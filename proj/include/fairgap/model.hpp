#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fairgap {

enum class Activation { kRelu, kTanh };
std::string_view to_string(Activation activation);
Activation activation_from_string(std::string_view name);

// Feed-forward binary classifier: input -> hidden layers -> one logit -> sigmoid.
// No hidden layers gives logistic regression.
struct Architecture {
  int input_dim = 1;
  std::vector<int> hidden_layers{16};
  Activation activation = Activation::kRelu;

  void validate() const;
};

struct Layer {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Eigen::VectorXd bias;     // fan_out
};

struct ModelParams {
  Architecture architecture;
  std::vector<Layer> layers;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const;
};

// Gradients share the layer shapes of the parameters they belong to.
using ParamGradients = std::vector<Layer>;

// Glorot-uniform weights in (-a, a) with a = sqrt(6 / (fan_in + fan_out)); zero biases.
ModelParams init(const Architecture& arch, std::uint64_t seed);

double glorot_bound(int fan_in, int fan_out);

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer; inputs[0] = X
};

struct ForwardResult {
  Eigen::VectorXd logits;
  Eigen::VectorXd probabilities;
  ForwardCache cache;
};

ForwardResult forward(const ModelParams& params, const Eigen::MatrixXd& x);

// Exact chain rule from d(loss)/d(logit) back to every weight and bias.
// The relu derivative at 0 is 0.
ParamGradients backward(const ModelParams& params, const ForwardCache& cache,
                        const Eigen::VectorXd& d_logits);

// 1 where probability >= threshold.
std::vector<int> predict(const Eigen::VectorXd& probabilities, double threshold = 0.5);

nlohmann::json to_json(const ModelParams& params);
ModelParams model_from_json(const nlohmann::json& doc);

}  // namespace fairgap
