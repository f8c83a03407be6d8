#include "fairgap/optimizer.hpp"

#include <cmath>
#include <string>

#include "fairgap/error.hpp"

namespace fairgap {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw Error(ErrorKind::kConfig, "unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, AdamSettings adam)
    : kind_(kind), lr_(learning_rate), adam_(adam) {
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::kConfig, "learning rate must be >= 0");
}

void Optimizer::step(ModelParams& params, const ParamGradients& grads) {
  if (grads.size() != params.layers.size())
    throw Error(ErrorKind::kShape, "gradient layer count does not match the model");
  ++t_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t l = 0; l < grads.size(); ++l) {
      params.layers[l].weights -= lr_ * grads[l].weights;
      params.layers[l].bias -= lr_ * grads[l].bias;
    }
    return;
  }

  if (m_.empty()) {
    for (const auto& g : grads) {
      m_.push_back({Eigen::MatrixXd::Zero(g.weights.rows(), g.weights.cols()),
                    Eigen::VectorXd::Zero(g.bias.size())});
      v_.push_back(m_.back());
    }
  }
  const double b1 = adam_.beta1, b2 = adam_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + adam_.epsilon);
  };
  for (std::size_t l = 0; l < grads.size(); ++l) {
    update(params.layers[l].weights, grads[l].weights, m_[l].weights, v_[l].weights);
    update(params.layers[l].bias, grads[l].bias, m_[l].bias, v_[l].bias);
  }
}

}  // namespace fairgap
