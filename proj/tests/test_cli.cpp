#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fairgap/cli.hpp"
#include <nlohmann/json.hpp>

#include "fairgap/csv.hpp"
#include "support/records.hpp"

namespace fs = std::filesystem;
using fairgap::run_cli;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return fairgap::csv::read_file(p); }

// Scratch directory holding a generated records file.
struct Workspace {
  fs::path dir;
  fs::path data;
  fairgap::testing::RecordsCsv records;

  explicit Workspace(const std::string& name, std::size_t rows = 400) {
    dir = fs::temp_directory_path() / ("fairgap_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    records = fairgap::testing::separable_records(rows, 3);
    data = dir / "records.csv";
    std::ofstream(data) << records.text;
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string out(const std::string& sub = "out") const { return (dir / sub).string(); }
};

const std::vector<std::string> kQuick{"--epochs", "25", "--restarts", "2", "--batch-size", "32"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("help lists every flag with defaults") {
  const auto top = cli({"--help"});
  CHECK(top.code == 0);
  for (const char* cmd : {"ingest", "train", "evaluate", "sweep", "pareto", "proxy", "report"})
    CHECK(top.out.find(cmd) != std::string::npos);
  const auto train = cli({"train", "--help"});
  CHECK(train.code == 0);
  for (const char* flag : {"--loss", "--lambda", "--seed", "--restarts", "--epochs", "--batch-size",
                           "--learning-rate", "--optimizer", "--hidden", "--config", "--out"})
    CHECK(train.out.find(flag) != std::string::npos);
  CHECK(train.out.find("gap") != std::string::npos);
  CHECK(train.out.find("200") != std::string::npos);
  const auto ingest = cli({"ingest", "--help"});
  CHECK(ingest.out.find("--age-min") != std::string::npos);
  CHECK(ingest.out.find("18") != std::string::npos);
  const auto sweep = cli({"sweep", "--help"});
  CHECK(sweep.out.find("--lambdas") != std::string::npos);
  const auto pareto = cli({"pareto", "--help"});
  CHECK(pareto.out.find("0.02") != std::string::npos);
  const auto proxy = cli({"proxy", "--help"});
  CHECK(proxy.out.find("priors_count") != std::string::npos);
}

TEST_CASE("usage and input errors exit 2") {
  Workspace ws("errors");
  CHECK(cli({}).code == 2);
  CHECK(cli({"train", "--no-such-flag"}).code == 2);
  const auto missing = cli({"ingest", "--data", (ws.dir / "absent.csv").string(), "-o", ws.out()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("absent.csv") != std::string::npos);
  CHECK(cli({"train", "-o", ws.out("nothing")}).code == 2);
  std::ofstream(ws.dir / "bad.json") << R"({"trian": {}})";
  CHECK(cli({"ingest", "--config", (ws.dir / "bad.json").string()}).code == 2);
  std::ofstream(ws.dir / "schema.csv") << "a,b\n1,2\n";
  const auto schema = cli({"ingest", "--data", (ws.dir / "schema.csv").string(), "-o", ws.out()});
  CHECK(schema.code == 2);
  CHECK(schema.err.find("two_year_recid") != std::string::npos);
}

TEST_CASE("binary exit code for a missing file") {
  const std::string cmd = std::string(FAIRGAP_BINARY) +
                          " ingest --data /nonexistent/compas.csv -o /tmp/fairgap_cli_bin >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}

TEST_CASE("ingest writes artifacts and reports stage counts") {
  Workspace ws("ingest");
  const auto r = cli({"ingest", "--data", ws.data.string(), "-o", ws.out()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("loaded 400 records") != std::string::npos);
  CHECK(r.out.find("after screening_window: " + std::to_string(ws.records.survivors)) != std::string::npos);
  for (const char* f : {"cohort_summary.json", "cohort.csv", "train_matrix.csv", "test_matrix.csv", "encoding.json"})
    CHECK(fs::exists(ws.dir / "out" / f));
  const auto summary = json::parse(slurp(ws.dir / "out" / "cohort_summary.json"));
  CHECK(summary["input"]["total"] == 400);
  CHECK(summary["total"] == ws.records.survivors);
  CHECK(summary["train_rows"].get<int>() + summary["test_rows"].get<int>() ==
        static_cast<int>(ws.records.survivors));
  const auto encoding = json::parse(slurp(ws.dir / "out" / "encoding.json"));
  for (const auto& c : encoding["columns"]) CHECK(c.get<std::string>().rfind("race", 0) != 0);

  SUBCASE("the ten-row fixture is too small to split") {
    const auto small = cli({"ingest", "--data", std::string(FAIRGAP_FIXTURES) + "/ten_rows.csv", "-o", ws.out("small")});
    CHECK(small.code == 3);
    CHECK(small.out.find("after race: 7") != std::string::npos);
  }
  SUBCASE("an age window nobody fits is an empty cohort") {
    const auto none = cli({"ingest", "--data", ws.data.string(), "-o", ws.out("none"), "--age-min", "90", "--age-max", "99"});
    CHECK(none.code == 2);
  }
}

TEST_CASE("train, evaluate and loss overrides") {
  Workspace ws("train");
  REQUIRE(cli({"ingest", "--data", ws.data.string(), "-o", ws.out()}).code == 0);
  const fs::path out = ws.out();

  REQUIRE(cli(with({"train", "-o", ws.out(), "--loss", "wbce", "--seed", "7"}, kQuick)).code == 0);
  const auto wbce_report = slurp(out / "report.json");
  const auto report = json::parse(wbce_report);
  CHECK(report["accuracy"].get<double>() >= 0.95);
  CHECK(report.contains("confusion"));
  const auto selection = json::parse(slurp(out / "selection.json"));
  CHECK(selection["runs"].size() == 2);
  CHECK(selection["config"]["loss"] == "wbce");

  REQUIRE(cli(with({"train", "-o", ws.out(), "--loss", "gap", "--lambda", "0", "--seed", "7"}, kQuick)).code == 0);
  CHECK(slurp(out / "report.json") == wbce_report);

  REQUIRE(cli(with({"train", "-o", ws.out(), "--loss", "gap", "--lambda", "1", "--seed", "7"}, kQuick)).code == 0);
  const auto first = slurp(out / "report.json");
  const auto model = slurp(out / "model.json");
  REQUIRE(cli(with({"train", "-o", ws.out(), "--loss", "gap", "--lambda", "1", "--seed", "7"}, kQuick)).code == 0);
  CHECK(slurp(out / "report.json") == first);
  CHECK(slurp(out / "model.json") == model);

  std::istringstream history(slurp(out / "history.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(history, line)) ++lines;
  CHECK(lines == 2 * 26);

  REQUIRE(cli({"evaluate", "-o", ws.out()}).code == 0);
  CHECK(json::parse(slurp(out / "evaluation.json")) == json::parse(first));
  CHECK(cli({"evaluate", "-o", ws.out(), "--model", (ws.dir / "none.json").string()}).code == 2);

  CHECK(cli({"train", "-o", ws.out(), "--loss", "hinge"}).code == 2);
}

TEST_CASE("sweep, pareto, proxy and report") {
  Workspace ws("pipeline");
  REQUIRE(cli({"ingest", "--data", ws.data.string(), "-o", ws.out()}).code == 0);
  const fs::path out = ws.out();

  REQUIRE(cli({"sweep", "-o", ws.out(), "--lambdas", "0", "--seeds", "1", "--epochs", "5"}).code == 0);
  {
    std::istringstream rows(slurp(out / "sweep.csv"));
    std::string line;
    int count = 0;
    while (std::getline(rows, line)) ++count;
    CHECK(count == 2);
  }

  REQUIRE(cli({"sweep", "-o", ws.out(), "--lambdas", "0,0.5,2", "--seeds", "1,2", "--epochs", "10"}).code == 0);
  const auto pareto = cli({"pareto", "-o", ws.out(), "--tolerance", "0.5"});
  REQUIRE(pareto.code == 0);
  const auto fronts = json::parse(slurp(out / "fronts.json"));
  const auto baselines = json::parse(slurp(out / "baselines.json"));
  for (const auto& [label, front] : fronts["fronts"].items()) {
    const auto svg = slurp(out / ("front_" + label + ".svg"));
    const auto start = svg.find("points=\"", svg.find("<polyline")) + 8;
    std::istringstream vertices(svg.substr(start, svg.find('"', start) - start));
    std::string v;
    std::size_t n = 0;
    while (vertices >> v) ++n;
    CHECK(n == front["points"].size());
    CHECK(svg.find("<polyline", svg.find("<polyline") + 1) == std::string::npos);
    const auto& b = baselines[label];
    CHECK(b.contains("accuracy"));
    CHECK(b["extrapolated"] == (b["unfairness"].get<double>() > 0.5));
  }
  CHECK(baselines.contains("f1"));

  SUBCASE("explicit notion with no defined values exits 3 naming it") {
    auto sweep = slurp(out / "sweep.csv");
    std::istringstream in(sweep);
    std::string header, row, rebuilt;
    std::getline(in, header);
    rebuilt = header + "\n";
    while (std::getline(in, row)) {
      // Blank the f10 column (index 13).
      std::vector<std::string> cells;
      std::stringstream ss(row);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      cells.resize(20);
      cells[13].clear();
      for (std::size_t i = 0; i < cells.size(); ++i) rebuilt += (i ? "," : "") + cells[i];
      rebuilt += "\n";
    }
    std::ofstream(out / "sweep.csv") << rebuilt;
    const auto r = cli({"pareto", "-o", ws.out(), "--notion", "f10"});
    CHECK(r.code == 3);
    CHECK(r.err.find("Disparate Impact") != std::string::npos);
    CHECK(cli({"pareto", "-o", ws.out()}).code == 0);
  }

  SUBCASE("proxy defaults give eight violins") {
    REQUIRE(cli({"proxy", "-o", ws.out()}).code == 0);
    const auto proxy = json::parse(slurp(out / "proxy.json"));
    CHECK(proxy["entries"].size() == 4);
    int violins = 0;
    for (const auto& e : fs::directory_iterator(out))
      if (e.path().filename().string().rfind("violin_", 0) == 0) ++violins;
    CHECK(violins == 8);
    CHECK(cli({"proxy", "-o", ws.out("constant"), "--variables", "juv_misd_count"}).code == 2);
    fs::create_directories(ws.dir / "constant");
    fs::copy(out / "cohort.csv", ws.dir / "constant" / "cohort.csv");
    CHECK(cli({"proxy", "-o", ws.out("constant"), "--variables", "juv_misd_count"}).code == 0);
    CHECK(cli({"proxy", "-o", ws.out(), "--variables", "sex"}).code == 1);
    CHECK(cli({"proxy", "-o", ws.out(), "--variables", "height"}).code == 2);
  }

  SUBCASE("report bundles artifacts with a timestamp") {
    REQUIRE(cli({"report", "-o", ws.out()}).code == 0);
    const auto bundle = json::parse(slurp(out / "bundle.json"));
    CHECK(bundle.contains("timestamp"));
    CHECK(bundle.contains("cohort_summary"));
    CHECK(bundle.contains("fronts"));
    CHECK(bundle.contains("config"));
  }
}

TEST_CASE("config file with flag overrides") {
  Workspace ws("config");
  std::ofstream(ws.dir / "run.json") << json{{"output_dir", ws.out()},
                                             {"data", {{"path", ws.data.string()}}},
                                             {"train", {{"epochs", 4}, {"restarts", 1}, {"loss", "bce"}}}}
                                            .dump();
  const auto cfg = (ws.dir / "run.json").string();
  REQUIRE(cli({"ingest", "--config", cfg}).code == 0);
  REQUIRE(cli({"train", "--config", cfg, "--loss", "wbce"}).code == 0);
  const auto selection = json::parse(slurp(ws.dir / "out" / "selection.json"));
  CHECK(selection["config"]["loss"] == "wbce");
  CHECK(selection["config"]["epochs"] == 4);
}

TEST_CASE("reruns are byte-identical apart from the timestamp") {
  Workspace ws("rerun", 300);
  auto pipeline = [&] {
    REQUIRE(cli({"ingest", "--data", ws.data.string(), "-o", ws.out()}).code == 0);
    REQUIRE(cli({"sweep", "-o", ws.out(), "--lambdas", "0,1", "--seeds", "0,1", "--epochs", "5"}).code == 0);
    REQUIRE(cli({"pareto", "-o", ws.out()}).code == 0);
    REQUIRE(cli({"proxy", "-o", ws.out()}).code == 0);
    REQUIRE(cli({"report", "-o", ws.out()}).code == 0);
    auto files = snapshot(ws.out());
    auto bundle = json::parse(files.at("bundle.json"));
    bundle.erase("timestamp");
    files["bundle.json"] = bundle.dump();
    return files;
  };
  const auto first = pipeline();
  const auto second = pipeline();
  CHECK(first == second);
  for (const auto& [name, _] : first) CHECK(name.find(".tmp") == std::string::npos);
}
