#include "fairgap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fairgap/csv.hpp"
#include "fairgap/error.hpp"
#include "fairgap/parallel.hpp"

namespace fairgap {

std::vector<double> default_lambda_grid() { return {0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0}; }

std::vector<TradeoffPoint> lambda_sweep(const FeatureMatrix& train, const FeatureMatrix& test,
                                        const TrainConfig& base, std::span<const double> lambdas,
                                        std::span<const std::uint64_t> seeds) {
  if (lambdas.empty()) throw Error(ErrorKind::kConfig, "lambda grid is empty");
  if (seeds.empty()) throw Error(ErrorKind::kConfig, "seed list is empty");
  for (double l : lambdas)
    if (!(l >= 0.0)) throw Error(ErrorKind::kConfig, "lambda values must be non-negative");

  std::vector<TradeoffPoint> points(lambdas.size() * seeds.size());
  parallel_for(points.size(), [&](std::size_t cell) {
    const double lambda = lambdas[cell / seeds.size()];
    const std::uint64_t seed = seeds[cell % seeds.size()];
    TrainConfig config = base;
    config.loss = LossKind::kGap;
    config.lambda = lambda;
    config.seed = seed;
    const auto trained = fairgap::train(train, config);
    const auto report = evaluate(trained.params, test);
    points[cell] = {lambda, seed, report.accuracy, report.notions, report.accuracy_difference};
  });
  return points;
}

std::optional<double> unfairness(FairnessNotion notion, double value, Unfairness mode) {
  if (mode == Unfairness::kLogRatio && kind(notion) == NotionKind::kRatio) {
    if (!(value > 0.0)) return std::nullopt;
    return std::abs(std::log(value));
  }
  return std::abs(value - ideal_value(notion));
}

ParetoFront pareto_front(std::span<const TradeoffPoint> points, FairnessNotion notion,
                         Unfairness mode) {
  std::vector<FrontPoint> candidates;
  for (const auto& p : points) {
    const auto& v = p.fairness[index_of(notion)];
    if (!v) continue;
    if (auto u = unfairness(notion, *v, mode)) candidates.push_back({p, *u});
  }
  if (candidates.empty())
    throw Error(ErrorKind::kEmptyFront,
                "no point has a defined value for " + std::string(label(notion)) + " (" +
                    std::string(name(notion)) + ")");

  std::sort(candidates.begin(), candidates.end(), [](const FrontPoint& a, const FrontPoint& b) {
    if (a.unfairness != b.unfairness) return a.unfairness < b.unfairness;
    if (a.point.accuracy != b.point.accuracy) return a.point.accuracy > b.point.accuracy;
    if (a.point.seed != b.point.seed) return a.point.seed < b.point.seed;
    return a.point.lambda < b.point.lambda;
  });

  // A point survives iff it is strictly more accurate than everything at or
  // below its unfairness.
  ParetoFront front{notion, mode, {}};
  for (const auto& c : candidates)
    if (front.points.empty() || c.point.accuracy > front.points.back().point.accuracy)
      front.points.push_back(c);
  return front;
}

std::optional<FairnessBaseline> fairness_baseline(const ParetoFront& front, double tolerance) {
  if (front.points.empty()) return std::nullopt;
  const auto& best = front.points.front();
  return FairnessBaseline{best.point.accuracy, best.unfairness, best.unfairness > tolerance,
                          best.point.lambda, best.point.seed};
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::kArity, "quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kArity, "bandwidth of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = sample_sd(sorted);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (spread > 0.0) return 0.9 * spread * std::pow(static_cast<double>(sorted.size()), -0.2);
  return 1e-3 * std::max(1.0, std::abs(sorted.front()));
}

ViolinSummary violin_summary(std::span<const double> values, int grid_points,
                             std::optional<double> bandwidth) {
  if (values.empty()) throw Error(ErrorKind::kArity, "violin summary of an empty sample");
  if (grid_points < 2) throw Error(ErrorKind::kConfig, "violin grid needs at least 2 points");
  if (bandwidth && !(*bandwidth > 0.0))
    throw Error(ErrorKind::kConfig, "bandwidth must be positive");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  ViolinSummary v;
  v.count = sorted.size();
  v.q1 = quantile_sorted(sorted, 0.25);
  v.median = quantile_sorted(sorted, 0.5);
  v.q3 = quantile_sorted(sorted, 0.75);
  v.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(sorted);

  const double h = v.bandwidth;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const auto m = static_cast<std::size_t>(grid_points);
  const double step = (hi - lo) / static_cast<double>(m - 1);
  v.grid.resize(m);
  v.density.assign(m, 0.0);
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < m; ++i) {
    const double x = lo + step * static_cast<double>(i);
    v.grid[i] = x;
    double sum = 0.0;
    for (double s : sorted) {
      const double z = (x - s) / h;
      sum += std::exp(-0.5 * z * z);
    }
    v.density[i] = sum * norm;
  }
  // The kernel tails beyond +-3h are cut off; rescale so the grid integral is 1.
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) area += 0.5 * (v.density[i] + v.density[i + 1]) * step;
  if (area > 0.0)
    for (double& d : v.density) d /= area;
  return v;
}

double distribution_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::kArity, "distance needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  // Quantile breakpoints i/na and j/nb, kept as integers over na*nb.
  const auto na = static_cast<long long>(sa.size()), nb = static_cast<long long>(sb.size());
  long long i = 0, j = 0, t = 0;
  double area = 0.0;
  while (i < na && j < nb) {
    const long long next_a = (i + 1) * nb, next_b = (j + 1) * na;
    const long long next = std::min(next_a, next_b);
    area += std::abs(sa[static_cast<std::size_t>(i)] - sb[static_cast<std::size_t>(j)]) *
            static_cast<double>(next - t);
    t = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return area / (static_cast<double>(na) * static_cast<double>(nb));
}

ProxyMatrix proxy_matrix(std::span<const ProxyColumn> features,
                         std::span<const Partition> partitions, int grid_points) {
  ProxyMatrix out;
  for (const auto& f : features) {
    std::vector<double> distances;
    for (const auto& p : partitions) {
      if (p.side.size() != f.values.size())
        throw Error(ErrorKind::kDimension, "partition '" + p.name + "' and feature '" + f.name +
                                               "' differ in row count");
      std::vector<double> sides[2];
      for (std::size_t r = 0; r < f.values.size(); ++r)
        if (f.values[r] && p.side[r]) sides[*p.side[r]].push_back(*f.values[r]);
      for (int s = 0; s < 2; ++s)
        if (sides[s].empty())
          throw Error(ErrorKind::kDegenerateGroup, "partition '" + p.name + "' side '" +
                                                       p.side_names[s] + "' has no values of '" +
                                                       f.name + "'");
      ProxyEntry e;
      e.feature = f.name;
      e.partition = p.name;
      e.distance = distribution_distance(sides[0], sides[1]);
      for (int s = 0; s < 2; ++s) {
        e.violins[s] = violin_summary(sides[s], grid_points);
        e.violins[s].variable = f.name;
        e.violins[s].group = p.name + "=" + p.side_names[s];
      }
      distances.push_back(e.distance);
      out.entries.push_back(std::move(e));
    }
    for (std::size_t a = 0; a < partitions.size(); ++a)
      for (std::size_t b = a + 1; b < partitions.size(); ++b)
        out.scores.push_back({f.name, partitions[a].name, partitions[b].name,
                              std::abs(distances[a] - distances[b])});
  }
  return out;
}

Partition partition_from_table(const RecordTable& table, const std::string& name,
                               const std::vector<std::string>& race_levels) {
  Partition p;
  p.name = name;
  p.side.reserve(table.size());
  if (name == "race") {
    if (race_levels.size() < 2)
      throw Error(ErrorKind::kConfig, "race partition needs two configured race levels");
    p.side_names[0] = race_levels[0];
    p.side_names[1] = race_levels[1];
    for (const auto& r : table.records) {
      if (r.race == race_levels[0]) p.side.emplace_back(0);
      else if (r.race == race_levels[1]) p.side.emplace_back(1);
      else p.side.emplace_back(std::nullopt);
    }
  } else if (name == "sex") {
    p.side_names[0] = "Male";
    p.side_names[1] = "Female";
    for (const auto& r : table.records) p.side.emplace_back(r.sex == Sex::kMale ? 0 : 1);
  } else if (name == "two_year_recid") {
    p.side_names[0] = "0";
    p.side_names[1] = "1";
    for (const auto& r : table.records) p.side.emplace_back(r.outcome);
  } else {
    throw Error(ErrorKind::kConfig, "unknown partition '" + name +
                                        "' (expected race, sex or two_year_recid)");
  }
  return p;
}

ProxyMatrix proxy_report(const RecordTable& table, const std::vector<std::string>& features,
                         const std::vector<std::string>& partitions,
                         const std::vector<std::string>& race_levels, int grid_points) {
  std::vector<ProxyColumn> columns;
  for (const auto& f : features) {
    if (!is_numeric_variable(f)) {
      if (is_categorical_variable(f))
        throw Error(ErrorKind::kType, "proxy variable '" + f + "' is not numeric");
      throw Error(ErrorKind::kSchema, "unknown proxy variable '" + f + "'");
    }
    ProxyColumn c{f, {}};
    c.values.reserve(table.size());
    for (const auto& r : table.records) c.values.push_back(numeric_field(r, f));
    columns.push_back(std::move(c));
  }
  std::vector<Partition> parts;
  for (const auto& p : partitions) parts.push_back(partition_from_table(table, p, race_levels));
  return proxy_matrix(columns, parts, grid_points);
}

nlohmann::json to_json(const ParetoFront& front) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : front.points)
    pts.push_back({{"lambda", p.point.lambda},
                   {"seed", p.point.seed},
                   {"accuracy", p.point.accuracy},
                   {"ad", p.point.ad},
                   {"value", *p.point.fairness[index_of(front.notion)]},
                   {"unfairness", p.unfairness}});
  return {{"notion", label(front.notion)},
          {"name", name(front.notion)},
          {"unfairness", front.mode == Unfairness::kAbsolute ? "absolute" : "log_ratio"},
          {"points", pts}};
}

nlohmann::json to_json(const FairnessBaseline& b) {
  return {{"accuracy", b.accuracy},
          {"unfairness", b.unfairness},
          {"extrapolated", b.extrapolated},
          {"lambda", b.lambda},
          {"seed", b.seed}};
}

nlohmann::json to_json(const ViolinSummary& v) {
  return {{"variable", v.variable}, {"group", v.group},         {"count", v.count},
          {"q1", v.q1},             {"median", v.median},       {"q3", v.q3},
          {"bandwidth", v.bandwidth}, {"grid", v.grid},         {"density", v.density}};
}

nlohmann::json to_json(const ProxyMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"feature", e.feature},
                       {"partition", e.partition},
                       {"distance", e.distance},
                       {"violins", {to_json(e.violins[0]), to_json(e.violins[1])}}});
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : m.scores)
    scores.push_back({{"feature", s.feature},
                      {"partitions", {s.partition_a, s.partition_b}},
                      {"proxy_score", s.score}});
  return {{"entries", entries}, {"scores", scores}};
}

std::string sweep_to_csv(std::span<const TradeoffPoint> points) {
  csv::Row header{"lambda", "seed", "accuracy", "ad"};
  for (auto n : all_notions()) header.emplace_back(label(n));
  std::string out = csv::join(header) + "\n";
  for (const auto& p : points) {
    csv::Row row{csv::format_double(p.lambda), std::to_string(p.seed),
                 csv::format_double(p.accuracy), csv::format_double(p.ad)};
    for (const auto& v : p.fairness) row.push_back(v ? csv::format_double(*v) : "");
    out += csv::join(row) + "\n";
  }
  return out;
}

std::vector<TradeoffPoint> sweep_from_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->size() != 4 + kNotionCount || (*header)[0] != "lambda")
    throw Error(ErrorKind::kFormat, "sweep file must have columns lambda,seed,accuracy,ad,f1..f16");
  std::vector<TradeoffPoint> points;
  while (auto row = reader.next()) {
    if (row->size() == 1 && row->front().empty()) continue;
    if (row->size() != header->size())
      throw Error(ErrorKind::kFormat, "sweep row has the wrong number of fields");
    TradeoffPoint p;
    auto lambda = csv::parse_double((*row)[0]);
    auto seed = csv::parse_int((*row)[1]);
    auto acc = csv::parse_double((*row)[2]);
    auto ad = csv::parse_double((*row)[3]);
    if (!lambda || !seed || *seed < 0 || !acc || !ad)
      throw Error(ErrorKind::kFormat, "sweep row has unparseable fields");
    p.lambda = *lambda;
    p.seed = static_cast<std::uint64_t>(*seed);
    p.accuracy = *acc;
    p.ad = *ad;
    for (std::size_t k = 0; k < kNotionCount; ++k) {
      const auto& field = (*row)[4 + k];
      if (csv::trim(field).empty()) continue;
      auto v = csv::parse_double(field);
      if (!v) throw Error(ErrorKind::kFormat, "sweep value '" + field + "' is not a number");
      p.fairness[k] = *v;
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace fairgap
