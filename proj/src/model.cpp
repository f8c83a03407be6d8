#include "fairgap/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fairgap/error.hpp"
#include "fairgap/losses.hpp"

namespace fairgap {

std::string_view to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw Error(ErrorKind::kConfig, "unknown activation '" + std::string(name) + "'");
}

void Architecture::validate() const {
  if (input_dim <= 0) throw Error(ErrorKind::kConfig, "input_dim must be positive");
  for (int h : hidden_layers)
    if (h <= 0) throw Error(ErrorKind::kConfig, "hidden layer widths must be positive");
}

std::size_t ModelParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers) count += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return count;
}

double glorot_bound(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

ModelParams init(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  ModelParams params;
  params.architecture = arch;
  params.seed = seed;
  std::mt19937_64 rng(seed);
  std::vector<int> dims{arch.input_dim};
  dims.insert(dims.end(), arch.hidden_layers.begin(), arch.hidden_layers.end());
  dims.push_back(1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const double a = glorot_bound(fan_in, fan_out);
    std::uniform_real_distribution<double> dist(-a, a);
    Layer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)};
    // Row-major fill order so the draw sequence is independent of storage order.
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j) layer.weights(i, j) = dist(rng);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

void activate(Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::kRelu)
    z = z.cwiseMax(0.0);
  else
    z = z.array().tanh().matrix();
}

}  // namespace

ForwardResult forward(const ModelParams& params, const Eigen::MatrixXd& x) {
  if (params.layers.empty()) throw Error(ErrorKind::kShape, "model has no layers");
  if (x.cols() != params.layers.front().weights.rows())
    throw Error(ErrorKind::kShape, "input has " + std::to_string(x.cols()) +
                                       " columns, model expects " +
                                       std::to_string(params.layers.front().weights.rows()));
  ForwardResult out;
  out.cache.inputs.reserve(params.layers.size());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    out.cache.inputs.push_back(a);
    Eigen::MatrixXd z = a * layer.weights;
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < params.layers.size()) {
      activate(z, params.architecture.activation);
      a = std::move(z);
    } else {
      out.logits = z.col(0);
    }
  }
  out.probabilities = out.logits.unaryExpr([](double v) { return sigmoid(v); });
  return out;
}

ParamGradients backward(const ModelParams& params, const ForwardCache& cache,
                        const Eigen::VectorXd& d_logits) {
  if (cache.inputs.size() != params.layers.size())
    throw Error(ErrorKind::kShape, "cache layer count does not match the model");
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    if (cache.inputs[l].cols() != params.layers[l].weights.rows())
      throw Error(ErrorKind::kShape, "cache layer " + std::to_string(l) + " has stale shape");
  if (cache.inputs.front().rows() != d_logits.size())
    throw Error(ErrorKind::kShape, "upstream gradient length " + std::to_string(d_logits.size()) +
                                       " does not match cached batch size " +
                                       std::to_string(cache.inputs.front().rows()));

  ParamGradients grads(params.layers.size());
  Eigen::MatrixXd delta = d_logits;  // n x fan_out of the current layer
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& input = cache.inputs[l];
    grads[l].weights = input.transpose() * delta;
    grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd upstream = delta * params.layers[l].weights.transpose();
    // `input` is the activated output of layer l-1.
    if (params.architecture.activation == Activation::kRelu)
      upstream = upstream.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
    else
      upstream = upstream.cwiseProduct((1.0 - input.array().square()).matrix());
    delta = std::move(upstream);
  }
  return grads;
}

std::vector<int> predict(const Eigen::VectorXd& probabilities, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorKind::kConfig, "threshold must lie in (0, 1)");
  std::vector<int> out(static_cast<std::size_t>(probabilities.size()));
  for (Eigen::Index i = 0; i < probabilities.size(); ++i)
    out[static_cast<std::size_t>(i)] = probabilities(i) >= threshold ? 1 : 0;
  return out;
}

nlohmann::json to_json(const ModelParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : params.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) w.push_back(l.weights(i, j));
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  const auto& a = params.architecture;
  return {{"format", "fairgap-model"},
          {"version", 1},
          {"architecture",
           {{"input_dim", a.input_dim},
            {"hidden_layers", a.hidden_layers},
            {"activation", to_string(a.activation)}}},
          {"seed", params.seed},
          {"layers", layers}};
}

ModelParams model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "fairgap-model" || doc.at("version") != 1)
      throw Error(ErrorKind::kFormat, "unsupported model document format or version");
    ModelParams p;
    const auto& a = doc.at("architecture");
    p.architecture.input_dim = a.at("input_dim").get<int>();
    p.architecture.hidden_layers = a.at("hidden_layers").get<std::vector<int>>();
    p.architecture.activation = activation_from_string(a.at("activation").get<std::string>());
    p.architecture.validate();
    p.seed = doc.at("seed").get<std::uint64_t>();
    int expected_in = p.architecture.input_dim;
    std::vector<int> outs = p.architecture.hidden_layers;
    outs.push_back(1);
    const auto& layers = doc.at("layers");
    if (layers.size() != outs.size())
      throw Error(ErrorKind::kShape, "model layer count does not match its architecture");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& j = layers[l];
      const auto rows = j.at("rows").get<Eigen::Index>();
      const auto cols = j.at("cols").get<Eigen::Index>();
      const auto w = j.at("weights").get<std::vector<double>>();
      const auto b = j.at("bias").get<std::vector<double>>();
      if (rows != expected_in || cols != outs[l] || static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != cols)
        throw Error(ErrorKind::kShape, "model layer " + std::to_string(l) + " has inconsistent shape");
      Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(cols)};
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
          layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      for (Eigen::Index c = 0; c < cols; ++c) layer.bias(c) = b[static_cast<std::size_t>(c)];
      p.layers.push_back(std::move(layer));
      expected_in = static_cast<int>(cols);
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace fairgap
