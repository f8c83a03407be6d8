#include "fairgap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairgap/error.hpp"
#include "fairgap/parallel.hpp"

namespace fairgap {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kBce: return "bce";
    case LossKind::kWbce: return "wbce";
    case LossKind::kGap: return "gap";
  }
  return "?";
}

LossKind loss_from_string(std::string_view name) {
  if (name == "bce") return LossKind::kBce;
  if (name == "wbce") return LossKind::kWbce;
  if (name == "gap") return LossKind::kGap;
  throw Error(ErrorKind::kConfig, "unknown loss '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kConfig, "lambda must be >= 0");
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::kConfig, "learning_rate must be >= 0");
  if (epochs < 1) throw Error(ErrorKind::kConfig, "epochs must be positive");
  if (batch_size < 1) throw Error(ErrorKind::kConfig, "batch_size must be positive");
  if (restarts < 1) throw Error(ErrorKind::kConfig, "restarts must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw Error(ErrorKind::kConfig, "validation_fraction must lie in (0, 1)");
  for (int h : hidden_layers)
    if (h <= 0) throw Error(ErrorKind::kConfig, "hidden layer widths must be positive");
}

namespace {

struct Objective {
  LossKind kind;
  double lambda;
  ClassWeights weights;
  int num_groups;
  OverallError overall;
};

Objective make_objective(const FeatureMatrix& fit, const TrainConfig& config) {
  Objective obj{config.loss, config.loss == LossKind::kGap ? config.lambda : 0.0,
                ClassWeights{1.0, 1.0}, fit.num_groups(), config.overall_error};
  if (config.loss != LossKind::kBce) obj.weights = class_weights(fit.labels);
  return obj;
}

bool all_groups_present(std::span<const int> groups, int num_groups) {
  std::vector<char> seen(static_cast<std::size_t>(num_groups), 0);
  for (int g : groups) seen[static_cast<std::size_t>(g)] = 1;
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

LossBreakdown breakdown(const Objective& obj, std::span<const double> probabilities,
                        std::span<const int> labels, std::span<const int> groups) {
  if (obj.kind == LossKind::kGap || all_groups_present(groups, obj.num_groups))
    return gap_loss(probabilities, labels, groups, obj.num_groups, obj.lambda, obj.weights,
                    obj.kind == LossKind::kGap ? obj.overall : OverallError::kSampleMean);
  LossBreakdown out;
  out.overall_error = wbce(probabilities, labels, obj.weights);
  out.total = out.overall_error;
  return out;
}

std::optional<double> accuracy_difference(std::span<const int> predicted,
                                          std::span<const int> labels,
                                          std::span<const int> groups, int num_groups) {
  if (num_groups != 2) return std::nullopt;
  double correct[2] = {0, 0}, count[2] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto g = static_cast<std::size_t>(groups[i]);
    count[g] += 1;
    correct[g] += predicted[i] == labels[i] ? 1 : 0;
  }
  if (count[0] == 0 || count[1] == 0) return std::nullopt;
  return correct[1] / count[1] - correct[0] / count[0];
}

void measure(const ModelParams& params, const Objective& obj, const FeatureMatrix& data,
             LossBreakdown& loss, double& accuracy, std::optional<double>& ad) {
  const auto fwd = forward(params, data.values);
  const std::span<const double> probs(fwd.probabilities.data(),
                                      static_cast<std::size_t>(fwd.probabilities.size()));
  loss = breakdown(obj, probs, data.labels, data.group_ids);
  const auto predicted = predict(fwd.probabilities);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == data.labels[i];
  accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
  ad = accuracy_difference(predicted, data.labels, data.group_ids, data.num_groups());
}

EpochRecord record_epoch(int epoch, const ModelParams& params, const Objective& obj,
                         const FeatureMatrix& fit, const FeatureMatrix& validation) {
  EpochRecord r;
  r.epoch = epoch;
  measure(params, obj, fit, r.train_loss, r.train_accuracy, r.train_ad);
  measure(params, obj, validation, r.validation_loss, r.validation_accuracy, r.validation_ad);
  return r;
}

std::uint64_t batch_seed(std::uint64_t seed) { return seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL; }

}  // namespace

std::vector<std::vector<std::size_t>> make_batches(const FeatureMatrix& data, int batch_size,
                                                   bool group_stratified, std::mt19937_64& rng) {
  const std::size_t n = data.rows();
  const std::size_t count = (n + static_cast<std::size_t>(batch_size) - 1) /
                            static_cast<std::size_t>(batch_size);
  std::vector<std::vector<std::size_t>> batches(count);
  if (n == 0) return batches;

  if (!group_stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i)
      batches[i / static_cast<std::size_t>(batch_size)].push_back(order[i]);
    return batches;
  }

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(data.num_groups()));
  for (std::size_t i = 0; i < n; ++i)
    members[static_cast<std::size_t>(data.group_ids[i])].push_back(i);
  for (std::size_t g = 0; g < members.size(); ++g) {
    auto& m = members[g];
    if (m.size() < count)
      throw Error(ErrorKind::kDegenerateGroup,
                  "group '" + data.group_names[g] + "' has " + std::to_string(m.size()) +
                      " rows, fewer than the " + std::to_string(count) + " batches per epoch");
    std::shuffle(m.begin(), m.end(), rng);
    // Row i of a group of size n_g goes to batch floor(i * B / n_g): each batch
    // receives floor(n_g / B) or ceil(n_g / B) rows of every group.
    for (std::size_t i = 0; i < m.size(); ++i) batches[i * count / m.size()].push_back(m[i]);
  }
  return batches;
}

TrainResult train_on_split(const FeatureMatrix& fit, const FeatureMatrix& validation,
                           const TrainConfig& config, const BatchObserver& observer) {
  config.validate();
  fit.validate();
  validation.validate();
  if (fit.rows() == 0) throw Error(ErrorKind::kArity, "training data is empty");
  if (config.loss == LossKind::kGap) {
    if (fit.num_groups() < 2 || !all_groups_present(fit.group_ids, fit.num_groups()))
      throw Error(ErrorKind::kDegenerateGroup, "GAP loss needs every group in the training data");
    if (!all_groups_present(validation.group_ids, validation.num_groups()))
      throw Error(ErrorKind::kDegenerateGroup, "GAP loss needs every group in the validation data");
  }
  {
    const auto positives = std::count(fit.labels.begin(), fit.labels.end(), 1);
    if (positives == 0 || positives == static_cast<long>(fit.labels.size()))
      throw Error(ErrorKind::kDegenerateLabels, "training data must contain both labels");
  }

  const Objective obj = make_objective(fit, config);
  Architecture arch{static_cast<int>(fit.cols()), config.hidden_layers, config.activation};
  TrainResult result;
  result.params = init(arch, config.seed);
  result.history.seed = config.seed;
  result.history.initial = record_epoch(0, result.params, obj, fit, validation);
  result.history.epochs.reserve(static_cast<std::size_t>(config.epochs));

  Optimizer optimizer(config.optimizer, config.learning_rate, config.adam);
  std::mt19937_64 rng(batch_seed(config.seed));
  // GAP with lambda = 0 and a sample-mean OE is exactly wBCE; it takes the
  // wBCE path so the two produce bit-identical models.
  const bool plain_wbce = obj.kind != LossKind::kGap ||
                          (obj.lambda == 0.0 && obj.overall == OverallError::kSampleMean);
  const bool stratified = !plain_wbce;

  Eigen::MatrixXd xb;
  std::vector<int> yb, gb;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (const auto& batch : make_batches(fit, config.batch_size, stratified, rng)) {
      if (observer) observer(epoch, batch);
      xb.resize(static_cast<Eigen::Index>(batch.size()), fit.values.cols());
      yb.resize(batch.size());
      gb.resize(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = fit.values.row(static_cast<Eigen::Index>(batch[i]));
        yb[i] = fit.labels[batch[i]];
        gb[i] = fit.group_ids[batch[i]];
      }
      const auto fwd = forward(result.params, xb);
      const std::span<const double> logits(fwd.logits.data(),
                                           static_cast<std::size_t>(fwd.logits.size()));
      const auto d_logits =
          !plain_wbce
              ? gap_gradient(logits, yb, gb, obj.num_groups, obj.lambda, obj.weights, obj.overall)
              : wbce_gradient(logits, yb, obj.weights);
      const auto grads = backward(result.params, fwd.cache,
                                  Eigen::Map<const Eigen::VectorXd>(
                                      d_logits.data(), static_cast<Eigen::Index>(d_logits.size())));
      optimizer.step(result.params, grads);
    }
    result.history.epochs.push_back(record_epoch(epoch, result.params, obj, fit, validation));
  }
  return result;
}

TrainResult train(const FeatureMatrix& data, const TrainConfig& config) {
  config.validate();
  const auto parts = split(data, config.validation_fraction, config.seed);
  return train_on_split(parts.train, parts.test, config);
}

std::size_t select_run(std::span<const RunSummary> runs) {
  if (runs.empty()) throw Error(ErrorKind::kArity, "no runs to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const auto& a = runs[i];
    const auto& b = runs[best];
    if (a.validation_loss != b.validation_loss) {
      if (a.validation_loss < b.validation_loss) best = i;
    } else if (a.validation_abs_ad != b.validation_abs_ad) {
      if (a.validation_abs_ad < b.validation_abs_ad) best = i;
    } else if (a.seed < b.seed) {
      best = i;
    }
  }
  return best;
}

MultiRestartResult multi_restart(const FeatureMatrix& data, const TrainConfig& config) {
  config.validate();
  const auto parts = split(data, config.validation_fraction, config.seed);
  const auto restarts = static_cast<std::size_t>(config.restarts);
  std::vector<TrainResult> results(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    TrainConfig c = config;
    c.seed = config.seed + r;
    results[r] = train_on_split(parts.train, parts.test, c);
  });

  MultiRestartResult out;
  for (const auto& r : results) {
    const auto& last = r.history.epochs.back();
    out.selection.runs.push_back({r.history.seed, last.validation_loss.total,
                                  std::abs(last.validation_ad.value_or(0.0)),
                                  last.validation_accuracy});
  }
  out.selection.selected_index = select_run(out.selection.runs);
  out.selection.selected_seed = out.selection.runs[out.selection.selected_index].seed;
  out.best = results[out.selection.selected_index].params;
  for (auto& r : results) out.histories.push_back(std::move(r.history));
  return out;
}

FairnessReport evaluate(const ModelParams& params, const FeatureMatrix& data, double threshold) {
  data.validate();
  const auto fwd = forward(params, data.values);
  const auto predicted = predict(fwd.probabilities, threshold);
  return full_report(predicted, data.labels, data.group_ids, data.group_names);
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"loss", to_string(c.loss)},
          {"lambda", c.lambda},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"optimizer", to_string(c.optimizer)},
          {"seed", c.seed},
          {"restarts", c.restarts},
          {"validation_fraction", c.validation_fraction},
          {"hidden_layers", c.hidden_layers},
          {"activation", to_string(c.activation)},
          {"overall_error", c.overall_error == OverallError::kSampleMean ? "sample" : "group"}};
}

nlohmann::json to_json(const EpochRecord& r, std::uint64_t seed) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"seed", seed},
          {"epoch", r.epoch},
          {"train", to_json(r.train_loss)},
          {"validation", to_json(r.validation_loss)},
          {"train_accuracy", r.train_accuracy},
          {"validation_accuracy", r.validation_accuracy},
          {"train_ad", opt(r.train_ad)},
          {"validation_ad", opt(r.validation_ad)}};
}

nlohmann::json to_json(const SelectionRecord& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : s.runs)
    runs.push_back({{"seed", r.seed},
                    {"validation_loss", r.validation_loss},
                    {"validation_abs_ad", r.validation_abs_ad},
                    {"validation_accuracy", r.validation_accuracy}});
  return {{"selected_seed", s.selected_seed},
          {"selected_index", s.selected_index},
          {"rule", "min validation loss, then min |AD|, then min seed"},
          {"runs", runs}};
}

std::string history_to_jsonl(std::span<const TrainHistory> histories) {
  std::string out;
  for (const auto& h : histories) {
    out += to_json(h.initial, h.seed).dump() + "\n";
    for (const auto& e : h.epochs) out += to_json(e, h.seed).dump() + "\n";
  }
  return out;
}

}  // namespace fairgap
