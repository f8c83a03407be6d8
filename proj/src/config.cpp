#include "fairgap/config.hpp"

#include <set>

#include "fairgap/csv.hpp"
#include "fairgap/error.hpp"

namespace fairgap {
namespace {

// Reads keys from one JSON object and rejects any key left unread.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::kSchema, path_ + " must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kConfig, "configuration key " + path_ + "." + key + " has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  std::optional<Section> section(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key))
        throw Error(ErrorKind::kSchema, "unknown configuration key " + path_ + "." + key);
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

FeatureSchema RunConfig::schema() const {
  auto s = FeatureSchema::defaults_for(cohort);
  if (numeric_features) s.numeric = *numeric_features;
  if (categorical_features) s.categorical = *categorical_features;
  return s;
}

void RunConfig::validate() const {
  cohort.validate();
  schema().validate();
  train.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::kConfig, "split.test_fraction must lie in (0, 1)");
  if (sweep.lambdas.empty() || sweep.seeds.empty())
    throw Error(ErrorKind::kConfig, "sweep lambdas and seeds must be non-empty");
  if (!(pareto.tolerance >= 0.0)) throw Error(ErrorKind::kConfig, "pareto.tolerance must be >= 0");
  for (const auto& n : pareto.notions) notion_from_label(n);
  if (proxy.grid_points < 2) throw Error(ErrorKind::kConfig, "proxy.grid_points must be >= 2");
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  RunConfig c;
  Section root(doc, "config");
  root.read("output_dir", c.output_dir);
  if (auto data = root.section("data")) {
    data->read("path", c.data_path);
    if (auto cols = data->section("columns")) {
      auto& m = c.columns;
      cols->read("id", m.id);
      cols->read("age", m.age);
      cols->read("sex", m.sex);
      cols->read("race", m.race);
      cols->read("priors_count", m.priors_count);
      cols->read("charge_degree", m.charge_degree);
      cols->read("juv_fel_count", m.juv_fel_count);
      cols->read("juv_misd_count", m.juv_misd_count);
      cols->read("juv_other_count", m.juv_other_count);
      cols->read("days_b_screening_arrest", m.days_b_screening_arrest);
      cols->read("outcome", m.outcome);
      cols->read("decile_score", m.decile_score);
      cols->finish();
    }
    data->finish();
  }
  if (auto cohort = root.section("cohort")) {
    std::string group = std::string(to_string(c.cohort.group_attribute));
    cohort->read("races", c.cohort.allowed_races);
    cohort->read("age_min", c.cohort.age_min);
    cohort->read("age_max", c.cohort.age_max);
    cohort->read("group_attribute", group);
    cohort->read("screening_window", c.cohort.apply_screening_window);
    cohort->finish();
    c.cohort.group_attribute = group_attribute_from_string(group);
  }
  if (auto features = root.section("features")) {
    std::vector<std::string> numeric, categorical;
    if (features->has("numeric")) {
      features->read("numeric", numeric);
      c.numeric_features = numeric;
    }
    if (features->has("categorical")) {
      features->read("categorical", categorical);
      c.categorical_features = categorical;
    }
    features->finish();
  }
  if (auto split = root.section("split")) {
    split->read("test_fraction", c.test_fraction);
    split->read("seed", c.split_seed);
    split->finish();
  }
  if (auto model = root.section("model")) {
    std::string activation(to_string(c.train.activation));
    model->read("hidden_layers", c.train.hidden_layers);
    model->read("activation", activation);
    model->finish();
    c.train.activation = activation_from_string(activation);
  }
  if (auto train = root.section("train")) {
    auto& t = c.train;
    std::string loss(to_string(t.loss)), optimizer(to_string(t.optimizer));
    std::string overall = t.overall_error == OverallError::kSampleMean ? "sample" : "group";
    train->read("loss", loss);
    train->read("lambda", t.lambda);
    train->read("learning_rate", t.learning_rate);
    train->read("epochs", t.epochs);
    train->read("batch_size", t.batch_size);
    train->read("optimizer", optimizer);
    train->read("seed", t.seed);
    train->read("restarts", t.restarts);
    train->read("validation_fraction", t.validation_fraction);
    train->read("overall_error", overall);
    train->finish();
    t.loss = loss_from_string(loss);
    t.optimizer = optimizer_from_string(optimizer);
    if (overall == "sample") t.overall_error = OverallError::kSampleMean;
    else if (overall == "group") t.overall_error = OverallError::kGroupMean;
    else throw Error(ErrorKind::kConfig, "train.overall_error must be 'sample' or 'group'");
  }
  if (auto sweep = root.section("sweep")) {
    sweep->read("lambdas", c.sweep.lambdas);
    sweep->read("seeds", c.sweep.seeds);
    sweep->finish();
  }
  if (auto pareto = root.section("pareto")) {
    std::string mode = c.pareto.mode == Unfairness::kAbsolute ? "absolute" : "log_ratio";
    pareto->read("tolerance", c.pareto.tolerance);
    pareto->read("unfairness", mode);
    pareto->read("notions", c.pareto.notions);
    pareto->finish();
    if (mode == "absolute") c.pareto.mode = Unfairness::kAbsolute;
    else if (mode == "log_ratio") c.pareto.mode = Unfairness::kLogRatio;
    else throw Error(ErrorKind::kConfig, "pareto.unfairness must be 'absolute' or 'log_ratio'");
  }
  if (auto proxy = root.section("proxy")) {
    proxy->read("variables", c.proxy.variables);
    proxy->read("partitions", c.proxy.partitions);
    proxy->read("grid_points", c.proxy.grid_points);
    proxy->finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto text = csv::read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kFormat, "configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc);
}

nlohmann::json to_json(const RunConfig& c) {
  const auto schema = c.schema();
  const auto& m = c.columns;
  return {
      {"output_dir", c.output_dir},
      {"data",
       {{"path", c.data_path},
        {"columns",
         {{"id", m.id},
          {"age", m.age},
          {"sex", m.sex},
          {"race", m.race},
          {"priors_count", m.priors_count},
          {"charge_degree", m.charge_degree},
          {"juv_fel_count", m.juv_fel_count},
          {"juv_misd_count", m.juv_misd_count},
          {"juv_other_count", m.juv_other_count},
          {"days_b_screening_arrest", m.days_b_screening_arrest},
          {"outcome", m.outcome},
          {"decile_score", m.decile_score}}}}},
      {"cohort",
       {{"races", c.cohort.allowed_races},
        {"age_min", c.cohort.age_min},
        {"age_max", c.cohort.age_max},
        {"group_attribute", to_string(c.cohort.group_attribute)},
        {"screening_window", c.cohort.apply_screening_window}}},
      {"features", {{"numeric", schema.numeric}, {"categorical", schema.categorical}}},
      {"split", {{"test_fraction", c.test_fraction}, {"seed", c.split_seed}}},
      {"model",
       {{"hidden_layers", c.train.hidden_layers}, {"activation", to_string(c.train.activation)}}},
      {"train",
       {{"loss", to_string(c.train.loss)},
        {"lambda", c.train.lambda},
        {"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"optimizer", to_string(c.train.optimizer)},
        {"seed", c.train.seed},
        {"restarts", c.train.restarts},
        {"validation_fraction", c.train.validation_fraction},
        {"overall_error",
         c.train.overall_error == OverallError::kSampleMean ? "sample" : "group"}}},
      {"sweep", {{"lambdas", c.sweep.lambdas}, {"seeds", c.sweep.seeds}}},
      {"pareto",
       {{"tolerance", c.pareto.tolerance},
        {"unfairness", c.pareto.mode == Unfairness::kAbsolute ? "absolute" : "log_ratio"},
        {"notions", c.pareto.notions}}},
      {"proxy",
       {{"variables", c.proxy.variables},
        {"partitions", c.proxy.partitions},
        {"grid_points", c.proxy.grid_points}}},
  };
}

}  // namespace fairgap
