#include "fairgap/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "fairgap/analysis.hpp"
#include "fairgap/config.hpp"
#include "fairgap/csv.hpp"
#include "fairgap/dataset.hpp"
#include "fairgap/error.hpp"
#include "fairgap/svg.hpp"
#include "fairgap/trainer.hpp"

namespace fs = std::filesystem;

namespace fairgap {
namespace {

// Artifact names inside the output directory.
constexpr const char* kSummary = "cohort_summary.json";
constexpr const char* kCohort = "cohort.csv";
constexpr const char* kTrainMatrix = "train_matrix.csv";
constexpr const char* kTestMatrix = "test_matrix.csv";
constexpr const char* kEncoding = "encoding.json";
constexpr const char* kModel = "model.json";
constexpr const char* kSelection = "selection.json";
constexpr const char* kHistory = "history.jsonl";
constexpr const char* kReport = "report.json";
constexpr const char* kEvaluation = "evaluation.json";
constexpr const char* kSweep = "sweep.csv";
constexpr const char* kFronts = "fronts.json";
constexpr const char* kBaselines = "baselines.json";
constexpr const char* kProxy = "proxy.json";
constexpr const char* kBundle = "bundle.json";

void write_json(const fs::path& path, const nlohmann::json& doc) {
  csv::write_file_atomic(path, doc.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  if (!fs::exists(path))
    throw Error(ErrorKind::kIo, "missing artifact " + path.string() + " (run the earlier stage first)");
  try {
    return nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kFormat, path.string() + " is not valid JSON: " + e.what());
  }
}

struct Ingested {
  FeatureMatrix train;
  FeatureMatrix test;
};

Ingested load_ingested(const fs::path& dir) {
  const auto encoding = read_json(dir / kEncoding);
  std::vector<std::string> groups;
  try {
    groups = encoding.at("group_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed encoding.json: ") + e.what());
  }
  auto load = [&](const char* name) {
    const auto path = dir / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "missing artifact " + path.string() + " (run ingest first)");
    return matrix_from_csv(in, groups);
  };
  return {load(kTrainMatrix), load(kTestMatrix)};
}

std::string sanitize(std::string text) {
  for (char& c : text)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return text;
}

// Option values seeded with the defaults so --help shows them; a flag only
// overrides the configuration when it was given on the command line.
struct Flags {
  std::string config_path;
  std::string out_dir;
  // ingest
  std::string data;
  std::string group;
  int age_min = 0, age_max = 0;
  bool screening_window = true;
  double test_fraction = 0;
  std::uint64_t split_seed = 0;
  // train
  std::string loss;
  double lambda = 0;
  std::uint64_t seed = 0;
  int restarts = 0, epochs = 0, batch_size = 0;
  double learning_rate = 0;
  std::string optimizer;
  std::vector<int> hidden;
  // evaluate
  std::string model_path;
  // sweep
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  // pareto
  std::vector<std::string> notions;
  double tolerance = 0;
  std::string unfairness_mode;
  // proxy
  std::vector<std::string> variables;
  std::vector<std::string> partitions;
  int grid_points = 0;
};

class Pipeline {
 public:
  Pipeline(RunConfig config, std::ostream& out) : c_(std::move(config)), out_(out) {
    dir_ = c_.output_dir;
  }

  void ingest() {
    if (c_.data_path.empty())
      throw Error(ErrorKind::kConfig, "no input file: pass --data or set data.path");
    fs::create_directories(dir_);
    const auto table = load_records(c_.data_path, c_.columns);
    out_ << "loaded " << table.size() << " records from " << c_.data_path << " ("
         << table.dropped_rows << " unparseable rows dropped)\n";
    FilterStages stages;
    const auto cohort = filter_cohort(table, c_.cohort, &stages);
    for (const auto& [stage, count] : stages) out_ << "  after " << stage << ": " << count << "\n";

    const auto encoded = encode_features(cohort, c_.schema());
    const auto parts = split(encoded.matrix, c_.test_fraction, c_.split_seed);
    // The test matrix reuses the training statistics.
    RecordTable train_records, test_records;
    for (auto r : parts.train_rows) train_records.records.push_back(cohort.records[r]);
    for (auto r : parts.test_rows) test_records.records.push_back(cohort.records[r]);
    const auto train = encode_features(train_records, c_.schema());
    const auto test = encode_features(test_records, c_.schema(), &train.stats);
    out_ << "  train rows: " << train.matrix.rows() << ", test rows: " << test.matrix.rows()
         << ", features: " << train.matrix.cols() << "\n";

    auto summary = to_json(cohort_summary(cohort));
    summary["input"] = to_json(cohort_summary(table));
    nlohmann::json stage_json = nlohmann::json::array();
    for (const auto& [stage, count] : stages) stage_json.push_back({{"stage", stage}, {"rows", count}});
    summary["filter_stages"] = stage_json;
    summary["train_rows"] = train.matrix.rows();
    summary["test_rows"] = test.matrix.rows();
    summary["unseen_test_levels"] = test.matrix.unseen_levels;

    write_json(dir_ / kSummary, summary);
    csv::write_file_atomic(dir_ / kCohort, records_to_csv(cohort));
    csv::write_file_atomic(dir_ / kTrainMatrix, matrix_to_csv(train.matrix));
    csv::write_file_atomic(dir_ / kTestMatrix, matrix_to_csv(test.matrix));
    write_json(dir_ / kEncoding, {{"statistics", to_json(train.stats)},
                                  {"group_attribute", to_string(c_.cohort.group_attribute)},
                                  {"group_names", train.matrix.group_names},
                                  {"columns", train.matrix.column_names}});
  }

  void train() {
    const auto data = load_ingested(dir_);
    const auto result = multi_restart(data.train, c_.train);
    const auto report = evaluate(result.best, data.test);
    auto selection = to_json(result.selection);
    selection["config"] = to_json(c_.train);
    write_json(dir_ / kModel, to_json(result.best));
    write_json(dir_ / kSelection, selection);
    csv::write_file_atomic(dir_ / kHistory, history_to_jsonl(result.histories));
    write_json(dir_ / kReport, to_json(report));
    out_ << "selected seed " << result.selection.selected_seed << " of " << c_.train.restarts
         << " restarts; test accuracy " << report.accuracy << ", AD "
         << report.accuracy_difference << "\n";
  }

  void evaluate_model(const fs::path& model_path) {
    const auto data = load_ingested(dir_);
    const auto model = model_from_json(read_json(model_path));
    const auto report = evaluate(model, data.test);
    write_json(dir_ / kEvaluation, to_json(report));
    out_ << "test accuracy " << report.accuracy << ", AD " << report.accuracy_difference << "\n";
  }

  void sweep() {
    const auto data = load_ingested(dir_);
    const auto points = lambda_sweep(data.train, data.test, c_.train, c_.sweep.lambdas, c_.sweep.seeds);
    csv::write_file_atomic(dir_ / kSweep, sweep_to_csv(points));
    out_ << "wrote " << points.size() << " trade-off points to " << (dir_ / kSweep).string() << "\n";
  }

  void pareto() {
    const auto path = dir_ / kSweep;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "missing artifact " + path.string() + " (run sweep first)");
    const auto points = sweep_from_csv(in);

    const bool explicit_notions = !c_.pareto.notions.empty();
    std::vector<FairnessNotion> notions;
    if (explicit_notions)
      for (const auto& n : c_.pareto.notions) notions.push_back(notion_from_label(n));
    else
      notions.assign(all_notions().begin(), all_notions().end());

    nlohmann::json fronts = nlohmann::json::object();
    nlohmann::json baselines = nlohmann::json::object();
    nlohmann::json skipped = nlohmann::json::array();
    for (auto notion : notions) {
      std::optional<ParetoFront> front;
      try {
        front = pareto_front(points, notion, c_.pareto.mode);
      } catch (const Error& e) {
        if (explicit_notions || e.kind() != ErrorKind::kEmptyFront) throw;
        skipped.push_back(label(notion));
        out_ << "  " << label(notion) << ": undefined on every point, skipped\n";
        continue;
      }
      const std::string key(label(notion));
      fronts[key] = to_json(*front);
      const auto baseline = fairness_baseline(*front, c_.pareto.tolerance);
      auto b = to_json(*baseline);
      b["tolerance"] = c_.pareto.tolerance;
      baselines[key] = b;
      csv::write_file_atomic(dir_ / ("front_" + key + ".svg"), svg::tradeoff_plot(points, *front));
      out_ << "  " << key << " (" << name(notion) << "): " << front->points.size()
           << " front points, baseline accuracy " << baseline->accuracy
           << (baseline->extrapolated ? " (extrapolated)" : "") << "\n";
    }
    write_json(dir_ / kFronts, {{"fronts", fronts}, {"skipped", skipped}});
    write_json(dir_ / kBaselines, baselines);
  }

  void proxy() {
    const auto path = dir_ / kCohort;
    if (!fs::exists(path)) throw Error(ErrorKind::kIo, "missing artifact " + path.string() + " (run ingest first)");
    const auto cohort = load_records(path);
    const auto matrix = proxy_report(cohort, c_.proxy.variables, c_.proxy.partitions,
                                     c_.cohort.allowed_races, c_.proxy.grid_points);
    write_json(dir_ / kProxy, to_json(matrix));
    for (const auto& e : matrix.entries)
      for (const auto& v : e.violins)
        csv::write_file_atomic(dir_ / ("violin_" + sanitize(v.variable) + "_" + sanitize(v.group) + ".svg"),
                               svg::violin_plot(v));
    for (const auto& s : matrix.scores)
      out_ << "  " << s.feature << ": |d(" << s.partition_a << ") - d(" << s.partition_b
           << ")| = " << s.score << "\n";
  }

  void report() {
    nlohmann::json bundle = nlohmann::json::object();
    for (const char* name : {kSummary, kSelection, kReport, kEvaluation, kFronts, kBaselines, kProxy}) {
      const auto path = dir_ / name;
      if (fs::exists(path)) bundle[fs::path(name).stem().string()] = read_json(path);
    }
    bundle["config"] = to_json(c_);
    const auto now = std::chrono::system_clock::now();
    bundle["timestamp"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    write_json(dir_ / kBundle, bundle);
    out_ << "wrote " << (dir_ / kBundle).string() << "\n";
  }

 private:
  RunConfig c_;
  std::ostream& out_;
  fs::path dir_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const RunConfig defaults;
  Flags f;
  f.out_dir = defaults.output_dir;
  f.group = std::string(to_string(defaults.cohort.group_attribute));
  f.age_min = defaults.cohort.age_min;
  f.age_max = defaults.cohort.age_max;
  f.screening_window = defaults.cohort.apply_screening_window;
  f.test_fraction = defaults.test_fraction;
  f.split_seed = defaults.split_seed;
  f.loss = std::string(to_string(defaults.train.loss));
  f.lambda = defaults.train.lambda;
  f.seed = defaults.train.seed;
  f.restarts = defaults.train.restarts;
  f.epochs = defaults.train.epochs;
  f.batch_size = defaults.train.batch_size;
  f.learning_rate = defaults.train.learning_rate;
  f.optimizer = std::string(to_string(defaults.train.optimizer));
  f.hidden = defaults.train.hidden_layers;
  f.lambdas = defaults.sweep.lambdas;
  f.seeds = defaults.sweep.seeds;
  f.tolerance = defaults.pareto.tolerance;
  f.unfairness_mode = "absolute";
  f.variables = defaults.proxy.variables;
  f.partitions = defaults.proxy.partitions;
  f.grid_points = defaults.proxy.grid_points;

  CLI::App app{"Fairness-aware classifier training and trade-off analysis", "fairgap"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", f.config_path, "JSON run configuration");
    cmd->add_option("-o,--out", f.out_dir, "Output directory");
  };
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", f.epochs, "Training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", f.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    cmd->add_option("--learning-rate", f.learning_rate, "Optimizer step size")->check(CLI::NonNegativeNumber);
    cmd->add_option("--optimizer", f.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
    cmd->add_option("--hidden", f.hidden, "Hidden layer widths (none for logistic regression)");
  };

  auto* ingest = app.add_subcommand("ingest", "Load, filter, encode and split the input records");
  add_common(ingest);
  ingest->add_option("--data", f.data, "Input CSV (ProPublica two-year export layout)");
  ingest->add_option("--group", f.group, "Protected attribute: race or sex")->check(CLI::IsMember({"race", "sex"}));
  ingest->add_option("--age-min", f.age_min, "Youngest age kept");
  ingest->add_option("--age-max", f.age_max, "Oldest age kept");
  ingest->add_option("--screening-window", f.screening_window,
                     "Keep |days_b_screening_arrest| <= 30 and drop ordinary-traffic charges");
  ingest->add_option("--test-fraction", f.test_fraction, "Held-out fraction");
  ingest->add_option("--split-seed", f.split_seed, "Seed of the train/test split");

  auto* train = app.add_subcommand("train", "Multi-restart training, model selection and test report");
  add_common(train);
  train->add_option("--loss", f.loss, "bce, wbce or gap")->check(CLI::IsMember({"bce", "wbce", "gap"}));
  train->add_option("--lambda", f.lambda, "GAP penalty weight")->check(CLI::NonNegativeNumber);
  train->add_option("--seed", f.seed, "First restart seed");
  train->add_option("--restarts", f.restarts, "Independent restarts")->check(CLI::PositiveNumber);
  add_train_flags(train);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a saved model on the test split");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--model", f.model_path, "Model JSON (default: <out>/model.json)");

  auto* sweep = app.add_subcommand("sweep", "Train GAP models over a lambda x seed grid");
  add_common(sweep);
  sweep->add_option("--lambdas", f.lambdas, "Lambda grid")->delimiter(',');
  sweep->add_option("--seeds", f.seeds, "Seeds")->delimiter(',');
  add_train_flags(sweep);

  auto* pareto = app.add_subcommand("pareto", "Pareto fronts and perfect-fairness baselines from the sweep");
  add_common(pareto);
  pareto->add_option("--notion", f.notions, "Notion label (f1..f16); repeatable; default all");
  pareto->add_option("--tolerance", f.tolerance, "Unfairness below which a baseline is not extrapolated")
      ->check(CLI::NonNegativeNumber);
  pareto->add_option("--unfairness", f.unfairness_mode, "absolute or log_ratio")
      ->check(CLI::IsMember({"absolute", "log_ratio"}));

  auto* proxy = app.add_subcommand("proxy", "Distribution-proxy analysis with violin summaries");
  add_common(proxy);
  proxy->add_option("--variables", f.variables, "Numeric variables")->delimiter(',');
  proxy->add_option("--partitions", f.partitions, "Partitions: race, sex, two_year_recid")->delimiter(',');
  proxy->add_option("--grid-points", f.grid_points, "Density grid size")->check(CLI::Range(2, 1 << 20));

  auto* report = app.add_subcommand("report", "Bundle every JSON artifact into one document");
  add_common(report);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  auto given = [](CLI::App* cmd, const char* name) {
    try {
      return cmd->get_option(name)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };

  try {
    RunConfig config = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
    CLI::App* cmd = app.get_subcommands().front();
    if (given(cmd, "--out")) config.output_dir = f.out_dir;
    if (given(cmd, "--data")) config.data_path = f.data;
    if (given(cmd, "--group")) {
      config.cohort.group_attribute = group_attribute_from_string(f.group);
      config.numeric_features.reset();
      config.categorical_features.reset();
    }
    if (given(cmd, "--age-min")) config.cohort.age_min = f.age_min;
    if (given(cmd, "--age-max")) config.cohort.age_max = f.age_max;
    if (given(cmd, "--screening-window")) config.cohort.apply_screening_window = f.screening_window;
    if (given(cmd, "--test-fraction")) config.test_fraction = f.test_fraction;
    if (given(cmd, "--split-seed")) config.split_seed = f.split_seed;
    if (given(cmd, "--loss")) config.train.loss = loss_from_string(f.loss);
    if (given(cmd, "--lambda")) config.train.lambda = f.lambda;
    if (given(cmd, "--seed")) config.train.seed = f.seed;
    if (given(cmd, "--restarts")) config.train.restarts = f.restarts;
    if (given(cmd, "--epochs")) config.train.epochs = f.epochs;
    if (given(cmd, "--batch-size")) config.train.batch_size = f.batch_size;
    if (given(cmd, "--learning-rate")) config.train.learning_rate = f.learning_rate;
    if (given(cmd, "--optimizer")) config.train.optimizer = optimizer_from_string(f.optimizer);
    if (given(cmd, "--hidden")) config.train.hidden_layers = f.hidden;
    if (given(cmd, "--lambdas")) config.sweep.lambdas = f.lambdas;
    if (given(cmd, "--seeds")) config.sweep.seeds = f.seeds;
    if (given(cmd, "--notion")) config.pareto.notions = f.notions;
    if (given(cmd, "--tolerance")) config.pareto.tolerance = f.tolerance;
    if (given(cmd, "--unfairness"))
      config.pareto.mode = f.unfairness_mode == "absolute" ? Unfairness::kAbsolute : Unfairness::kLogRatio;
    if (given(cmd, "--variables")) config.proxy.variables = f.variables;
    if (given(cmd, "--partitions")) config.proxy.partitions = f.partitions;
    if (given(cmd, "--grid-points")) config.proxy.grid_points = f.grid_points;
    config.validate();

    const fs::path model_path = f.model_path.empty() ? fs::path(config.output_dir) / kModel
                                                     : fs::path(f.model_path);
    Pipeline pipeline(std::move(config), out);
    const auto& name = cmd->get_name();
    if (name == "ingest") pipeline.ingest();
    else if (name == "train") pipeline.train();
    else if (name == "evaluate") pipeline.evaluate_model(model_path);
    else if (name == "sweep") pipeline.sweep();
    else if (name == "pareto") pipeline.pareto();
    else if (name == "proxy") pipeline.proxy();
    else if (name == "report") pipeline.report();
    return 0;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error (io): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fairgap
