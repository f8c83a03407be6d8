#pragma once

#include <string_view>

#include "fairgap/model.hpp"

namespace fairgap {

enum class OptimizerKind { kSgd, kAdam };
std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Applies parameter updates in place. Adam keeps first/second moment
// estimates per parameter with the usual bias correction.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, AdamSettings adam = {});

  void step(ModelParams& params, const ParamGradients& grads);
  long long steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  AdamSettings adam_;
  long long t_ = 0;
  ParamGradients m_;
  ParamGradients v_;
};

}  // namespace fairgap
