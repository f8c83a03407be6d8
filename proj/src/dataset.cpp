#include "fairgap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fairgap/csv.hpp"
#include "fairgap/error.hpp"

namespace fairgap {

std::string_view to_string(Sex sex) { return sex == Sex::kMale ? "Male" : "Female"; }

std::string_view to_string(ChargeDegree degree) {
  switch (degree) {
    case ChargeDegree::kFelony: return "F";
    case ChargeDegree::kMisdemeanor: return "M";
    case ChargeDegree::kOther: return "O";
  }
  return "?";
}

std::string_view to_string(GroupAttribute attribute) {
  return attribute == GroupAttribute::kRace ? "race" : "sex";
}

GroupAttribute group_attribute_from_string(std::string_view name) {
  if (name == "race") return GroupAttribute::kRace;
  if (name == "sex") return GroupAttribute::kSex;
  throw Error(ErrorKind::kConfig, "unknown group attribute '" + std::string(name) + "'");
}

namespace {

std::optional<Sex> parse_sex(std::string_view text) {
  text = csv::trim(text);
  if (text == "Male") return Sex::kMale;
  if (text == "Female") return Sex::kFemale;
  return std::nullopt;
}

std::optional<ChargeDegree> parse_charge(std::string_view text) {
  text = csv::trim(text);
  if (text == "F") return ChargeDegree::kFelony;
  if (text == "M") return ChargeDegree::kMisdemeanor;
  if (text == "O") return ChargeDegree::kOther;
  return std::nullopt;
}

std::optional<int> parse_small_int(std::string_view text) {
  auto value = csv::parse_int(text);
  if (!value || *value < std::numeric_limits<int>::min() || *value > std::numeric_limits<int>::max())
    return std::nullopt;
  return static_cast<int>(*value);
}

}  // namespace

RecordTable load_records(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open input file " + path.string());
  return load_records(in, columns);
}

RecordTable load_records(std::istream& in, const ColumnMap& columns) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(ErrorKind::kFormat, "input is empty: expected a header row");

  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < header->size(); ++i) {
    std::string name(csv::trim((*header)[i]));
    if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.erase(0, 3);
    index.try_emplace(name, i);
  }

  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };

  const std::vector<const std::string*> required = {
      &columns.age,    &columns.sex,          &columns.race,
      &columns.priors_count, &columns.charge_degree, &columns.days_b_screening_arrest,
      &columns.outcome, &columns.decile_score};
  std::vector<std::string> missing;
  for (const auto* name : required)
    if (!find(*name)) missing.push_back(*name);
  if (!missing.empty()) {
    std::string msg = "missing required columns:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorKind::kSchema, msg);
  }

  const std::size_t c_age = *find(columns.age), c_sex = *find(columns.sex),
                    c_race = *find(columns.race), c_priors = *find(columns.priors_count),
                    c_charge = *find(columns.charge_degree),
                    c_days = *find(columns.days_b_screening_arrest),
                    c_outcome = *find(columns.outcome), c_decile = *find(columns.decile_score);
  const auto c_id = find(columns.id);
  const auto c_juv_fel = find(columns.juv_fel_count);
  const auto c_juv_misd = find(columns.juv_misd_count);
  const auto c_juv_other = find(columns.juv_other_count);

  RecordTable table;
  std::size_t row_number = 0;
  while (auto row = reader.next()) {
    ++row_number;
    if (row->size() == 1 && csv::trim(row->front()).empty()) continue;  // blank line
    auto field = [&](std::size_t c) -> std::string_view {
      return c < row->size() ? std::string_view((*row)[c]) : std::string_view();
    };
    auto optional_count = [&](const std::optional<std::size_t>& c) -> std::optional<int> {
      if (!c) return 0;
      return parse_small_int(field(*c));
    };

    Record r;
    auto age = parse_small_int(field(c_age));
    auto sex = parse_sex(field(c_sex));
    auto priors = parse_small_int(field(c_priors));
    auto charge = parse_charge(field(c_charge));
    auto outcome = parse_small_int(field(c_outcome));
    auto fel = optional_count(c_juv_fel);
    auto misd = optional_count(c_juv_misd);
    auto other = optional_count(c_juv_other);
    const auto race = csv::trim(field(c_race));
    if (!age || *age < 0 || !sex || !priors || *priors < 0 || !charge || !outcome ||
        (*outcome != 0 && *outcome != 1) || race.empty() || !fel || *fel < 0 || !misd ||
        *misd < 0 || !other || *other < 0) {
      ++table.dropped_rows;
      continue;
    }
    std::optional<int> days;
    if (!csv::trim(field(c_days)).empty()) {
      days = parse_small_int(field(c_days));
      if (!days) {
        ++table.dropped_rows;
        continue;
      }
    }
    std::optional<int> decile;
    if (!csv::trim(field(c_decile)).empty()) {
      decile = parse_small_int(field(c_decile));
      if (!decile) {
        ++table.dropped_rows;
        continue;
      }
    }
    r.id = c_id ? std::string(csv::trim(field(*c_id))) : std::to_string(row_number);
    r.age = *age;
    r.sex = *sex;
    r.race = std::string(race);
    r.priors_count = *priors;
    r.charge_degree = *charge;
    r.juv_fel_count = *fel;
    r.juv_misd_count = *misd;
    r.juv_other_count = *other;
    r.days_b_screening_arrest = days;
    r.outcome = *outcome;
    r.decile_score = decile;
    table.records.push_back(std::move(r));
  }
  return table;
}

std::string records_to_csv(const RecordTable& table) {
  const ColumnMap c;
  std::string out = csv::join({c.id, c.age, c.sex, c.race, c.priors_count, c.charge_degree,
                               c.juv_fel_count, c.juv_misd_count, c.juv_other_count,
                               c.days_b_screening_arrest, c.outcome, c.decile_score});
  out.push_back('\n');
  for (const auto& r : table.records) {
    out += csv::join({r.id, std::to_string(r.age), std::string(to_string(r.sex)), r.race,
                      std::to_string(r.priors_count), std::string(to_string(r.charge_degree)),
                      std::to_string(r.juv_fel_count), std::to_string(r.juv_misd_count),
                      std::to_string(r.juv_other_count),
                      r.days_b_screening_arrest ? std::to_string(*r.days_b_screening_arrest) : "",
                      std::to_string(r.outcome),
                      r.decile_score ? std::to_string(*r.decile_score) : ""});
    out.push_back('\n');
  }
  return out;
}

void CohortPolicy::validate() const {
  if (age_min > age_max)
    throw Error(ErrorKind::kConfig, "cohort age_min " + std::to_string(age_min) +
                                        " exceeds age_max " + std::to_string(age_max));
  if (group_attribute == GroupAttribute::kRace && allowed_races.empty())
    throw Error(ErrorKind::kConfig, "allowed_races must be non-empty when grouping by race");
  std::set<std::string> unique(allowed_races.begin(), allowed_races.end());
  if (unique.size() != allowed_races.size())
    throw Error(ErrorKind::kConfig, "allowed_races contains duplicates");
}

std::vector<std::string> CohortPolicy::group_levels() const {
  if (group_attribute == GroupAttribute::kRace) return allowed_races;
  return {"Male", "Female"};
}

RecordTable filter_cohort(const RecordTable& table, const CohortPolicy& policy,
                          FilterStages* stages) {
  policy.validate();
  if (table.empty()) throw Error(ErrorKind::kEmptyCohort, "cannot filter an empty table");

  const std::set<std::string, std::less<>> races(policy.allowed_races.begin(),
                                                 policy.allowed_races.end());
  FilterStages counts{{"input", table.size()}};
  std::vector<const Record*> current;
  current.reserve(table.size());
  for (const auto& r : table.records) current.push_back(&r);

  auto stage = [&](const char* name, auto keep) {
    std::erase_if(current, [&](const Record* r) { return !keep(*r); });
    counts.emplace_back(name, current.size());
  };
  stage("age", [&](const Record& r) { return r.age >= policy.age_min && r.age <= policy.age_max; });
  if (policy.group_attribute == GroupAttribute::kRace)
    stage("race", [&](const Record& r) { return races.contains(r.race); });
  if (policy.apply_screening_window) {
    stage("screening_window", [](const Record& r) {
      return r.days_b_screening_arrest && std::abs(*r.days_b_screening_arrest) <= 30 &&
             r.charge_degree != ChargeDegree::kOther;
    });
  }
  if (stages) *stages = counts;
  if (current.empty())
    throw Error(ErrorKind::kEmptyCohort, "cohort filter removed every record");

  RecordTable out;
  out.dropped_rows = table.dropped_rows;
  out.records.reserve(current.size());
  for (const auto* r : current) out.records.push_back(*r);
  return out;
}

bool is_numeric_variable(std::string_view name) {
  static constexpr std::string_view kNames[] = {
      "age", "priors_count", "juv_fel_count", "juv_misd_count", "juv_other_count",
      "days_b_screening_arrest", "two_year_recid", "decile_score"};
  return std::find(std::begin(kNames), std::end(kNames), name) != std::end(kNames);
}

bool is_categorical_variable(std::string_view name) {
  return name == "sex" || name == "race" || name == "c_charge_degree";
}

std::optional<double> numeric_field(const Record& r, std::string_view name) {
  if (name == "age") return r.age;
  if (name == "priors_count") return r.priors_count;
  if (name == "juv_fel_count") return r.juv_fel_count;
  if (name == "juv_misd_count") return r.juv_misd_count;
  if (name == "juv_other_count") return r.juv_other_count;
  if (name == "two_year_recid") return r.outcome;
  if (name == "days_b_screening_arrest") {
    if (!r.days_b_screening_arrest) return std::nullopt;
    return *r.days_b_screening_arrest;
  }
  if (name == "decile_score") {
    if (!r.decile_score) return std::nullopt;
    return *r.decile_score;
  }
  if (is_categorical_variable(name))
    throw Error(ErrorKind::kType, "variable '" + std::string(name) + "' is not numeric");
  throw Error(ErrorKind::kSchema, "unknown variable '" + std::string(name) + "'");
}

std::string categorical_field(const Record& r, std::string_view name) {
  if (name == "sex") return std::string(to_string(r.sex));
  if (name == "race") return r.race;
  if (name == "c_charge_degree") return std::string(to_string(r.charge_degree));
  if (is_numeric_variable(name))
    throw Error(ErrorKind::kType, "variable '" + std::string(name) + "' is not categorical");
  throw Error(ErrorKind::kSchema, "unknown variable '" + std::string(name) + "'");
}

FeatureSchema FeatureSchema::defaults_for(const CohortPolicy& policy) {
  FeatureSchema schema;
  schema.numeric = {"age", "priors_count", "juv_fel_count", "juv_misd_count", "juv_other_count"};
  schema.categorical = {"c_charge_degree"};
  if (policy.group_attribute == GroupAttribute::kRace) schema.categorical.push_back("sex");
  schema.group_attribute = policy.group_attribute;
  schema.group_levels = policy.group_levels();
  return schema;
}

void FeatureSchema::validate() const {
  const std::string group(to_string(group_attribute));
  auto check = [&](const std::string& name, bool numeric) {
    if (name == group)
      throw Error(ErrorKind::kSchema, "feature schema includes the group attribute '" + name + "'");
    if (name == "two_year_recid" || name == "decile_score")
      throw Error(ErrorKind::kSchema, "'" + name + "' cannot be a model feature");
    if (numeric && !is_numeric_variable(name)) {
      if (is_categorical_variable(name))
        throw Error(ErrorKind::kType, "'" + name + "' is categorical, listed as numeric");
      throw Error(ErrorKind::kSchema, "unknown numeric feature '" + name + "'");
    }
    if (!numeric && !is_categorical_variable(name)) {
      if (is_numeric_variable(name))
        throw Error(ErrorKind::kType, "'" + name + "' is numeric, listed as categorical");
      throw Error(ErrorKind::kSchema, "unknown categorical feature '" + name + "'");
    }
  };
  for (const auto& n : numeric) check(n, true);
  for (const auto& n : categorical) check(n, false);
  if (group_levels.empty()) throw Error(ErrorKind::kSchema, "feature schema has no group levels");
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> row_indices) const {
  FeatureMatrix out;
  out.column_names = column_names;
  out.group_names = group_names;
  out.values.resize(static_cast<Eigen::Index>(row_indices.size()), values.cols());
  out.group_ids.reserve(row_indices.size());
  out.labels.reserve(row_indices.size());
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const auto r = row_indices[i];
    if (r >= rows()) throw Error(ErrorKind::kDimension, "row index out of range");
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(r));
    out.group_ids.push_back(group_ids[r]);
    out.labels.push_back(labels[r]);
  }
  return out;
}

void FeatureMatrix::validate() const {
  if (group_ids.size() != rows() || labels.size() != rows())
    throw Error(ErrorKind::kDimension, "group ids / labels length differs from row count");
  if (column_names.size() != cols())
    throw Error(ErrorKind::kDimension, "column name count differs from column count");
  for (int g : group_ids)
    if (g < 0 || g >= num_groups()) throw Error(ErrorKind::kDimension, "group id out of range");
  for (int y : labels)
    if (y != 0 && y != 1) throw Error(ErrorKind::kDimension, "label outside {0,1}");
}

EncodedFeatures encode_features(const RecordTable& table, const FeatureSchema& schema,
                                const EncodingStats* stats) {
  schema.validate();
  EncodedFeatures out;
  const auto n = table.size();

  if (stats) {
    out.stats = *stats;
    if (out.stats.numeric.size() != schema.numeric.size() ||
        out.stats.categorical.size() != schema.categorical.size())
      throw Error(ErrorKind::kSchema, "encoding statistics do not match the feature schema");
    for (std::size_t j = 0; j < schema.numeric.size(); ++j)
      if (out.stats.numeric[j].name != schema.numeric[j])
        throw Error(ErrorKind::kSchema, "statistics column '" + out.stats.numeric[j].name +
                                            "' does not match schema '" + schema.numeric[j] + "'");
    for (std::size_t j = 0; j < schema.categorical.size(); ++j)
      if (out.stats.categorical[j].name != schema.categorical[j])
        throw Error(ErrorKind::kSchema, "statistics column '" + out.stats.categorical[j].name +
                                            "' does not match schema '" + schema.categorical[j] + "'");
  } else {
    for (const auto& name : schema.numeric) {
      // Missing values are excluded here and encode to the mean (zero) below.
      std::vector<double> present;
      present.reserve(n);
      for (const auto& r : table.records)
        if (auto v = numeric_field(r, name)) present.push_back(*v);
      const auto count = static_cast<double>(present.size());
      const double mean =
          present.empty() ? 0.0 : std::accumulate(present.begin(), present.end(), 0.0) / count;
      double ss = 0.0;
      for (double v : present) ss += (v - mean) * (v - mean);
      const double sd = present.empty() ? 0.0 : std::sqrt(ss / count);
      out.stats.numeric.push_back({name, mean, sd});
    }
    for (const auto& name : schema.categorical) {
      std::set<std::string> levels;
      for (const auto& r : table.records) levels.insert(categorical_field(r, name));
      out.stats.categorical.push_back({name, {levels.begin(), levels.end()}});
    }
  }

  auto& m = out.matrix;
  for (const auto& s : out.stats.numeric) m.column_names.push_back(s.name);
  for (const auto& c : out.stats.categorical)
    for (const auto& level : c.levels) m.column_names.push_back(c.name + "=" + level);
  m.group_names = schema.group_levels;
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(m.column_names.size()));
  m.group_ids.reserve(n);
  m.labels.reserve(n);

  const std::string group_var(to_string(schema.group_attribute));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.records[i];
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::Index col = 0;
    for (const auto& s : out.stats.numeric) {
      const double v = numeric_field(r, s.name).value_or(s.mean);
      // Constant columns encode to zero.
      const bool constant = !(s.sd > 1e-12 * std::max(1.0, std::abs(s.mean)));
      m.values(row, col++) = constant ? 0.0 : (v - s.mean) / s.sd;
    }
    for (const auto& c : out.stats.categorical) {
      const auto value = categorical_field(r, c.name);
      auto it = std::lower_bound(c.levels.begin(), c.levels.end(), value);
      if (it != c.levels.end() && *it == value)
        m.values(row, col + (it - c.levels.begin())) = 1.0;
      else
        ++m.unseen_levels;
      col += static_cast<Eigen::Index>(c.levels.size());
    }
    const auto group_value = categorical_field(r, group_var);
    auto g = std::find(m.group_names.begin(), m.group_names.end(), group_value);
    if (g == m.group_names.end())
      throw Error(ErrorKind::kSchema, "record " + r.id + " has " + group_var + " '" + group_value +
                                          "' outside the configured group levels");
    m.group_ids.push_back(static_cast<int>(g - m.group_names.begin()));
    m.labels.push_back(r.outcome);
  }
  return out;
}

SplitResult split(const FeatureMatrix& matrix, double test_fraction, std::uint64_t seed) {
  matrix.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::kConfig, "test fraction must lie in (0, 1)");

  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < matrix.rows(); ++i)
    cells[{matrix.group_ids[i], matrix.labels[i]}].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<char> is_test(matrix.rows(), 0);
  for (auto& [cell, members] : cells) {
    if (members.size() < 2) {
      const auto& name = matrix.group_names[static_cast<std::size_t>(cell.first)];
      throw Error(ErrorKind::kStratification,
                  "cell (group=" + name + ", label=" + std::to_string(cell.second) + ") has " +
                      std::to_string(members.size()) + " row(s); at least 2 are needed");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto m = static_cast<double>(members.size());
    auto k = static_cast<std::size_t>(std::llround(test_fraction * m));
    k = std::clamp<std::size_t>(k, 1, members.size() - 1);
    for (std::size_t i = 0; i < k; ++i) is_test[members[i]] = 1;
  }

  SplitResult out;
  for (std::size_t i = 0; i < matrix.rows(); ++i)
    (is_test[i] ? out.test_rows : out.train_rows).push_back(i);
  out.train = matrix.subset(out.train_rows);
  out.test = matrix.subset(out.test_rows);
  return out;
}

CohortSummary cohort_summary(const RecordTable& table) {
  CohortSummary s;
  s.total = table.size();
  s.dropped_rows = table.dropped_rows;
  s.sex_counts = {{"Male", 0}, {"Female", 0}};
  for (const auto& r : table.records) {
    ++s.race_counts[r.race];
    ++s.sex_counts[std::string(to_string(r.sex))];
    ++s.age_histogram[r.age];
  }
  return s;
}

nlohmann::json to_json(const CohortSummary& s) {
  nlohmann::json ages = nlohmann::json::object();
  for (const auto& [age, count] : s.age_histogram) ages[std::to_string(age)] = count;
  return {{"total", s.total},
          {"dropped_rows", s.dropped_rows},
          {"race_counts", s.race_counts},
          {"sex_counts", s.sex_counts},
          {"age_histogram", ages}};
}

nlohmann::json to_json(const EncodingStats& stats) {
  nlohmann::json numeric = nlohmann::json::array();
  for (const auto& s : stats.numeric)
    numeric.push_back({{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}});
  nlohmann::json categorical = nlohmann::json::array();
  for (const auto& c : stats.categorical)
    categorical.push_back({{"name", c.name}, {"levels", c.levels}});
  return {{"numeric", numeric}, {"categorical", categorical}};
}

EncodingStats encoding_stats_from_json(const nlohmann::json& doc) {
  try {
    EncodingStats stats;
    for (const auto& s : doc.at("numeric"))
      stats.numeric.push_back(
          {s.at("name").get<std::string>(), s.at("mean").get<double>(), s.at("sd").get<double>()});
    for (const auto& c : doc.at("categorical"))
      stats.categorical.push_back(
          {c.at("name").get<std::string>(), c.at("levels").get<std::vector<std::string>>()});
    return stats;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed encoding statistics: ") + e.what());
  }
}

std::string matrix_to_csv(const FeatureMatrix& m) {
  csv::Row header{"group", "label"};
  header.insert(header.end(), m.column_names.begin(), m.column_names.end());
  std::string out = csv::join(header) + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    csv::Row row{std::to_string(m.group_ids[i]), std::to_string(m.labels[i])};
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      row.push_back(csv::format_double(m.values(static_cast<Eigen::Index>(i), j)));
    out += csv::join(row) + "\n";
  }
  return out;
}

FeatureMatrix matrix_from_csv(std::istream& in, std::vector<std::string> group_names) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->size() < 2 || (*header)[0] != "group" || (*header)[1] != "label")
    throw Error(ErrorKind::kFormat, "matrix file must start with columns group,label");
  FeatureMatrix m;
  m.group_names = std::move(group_names);
  m.column_names.assign(header->begin() + 2, header->end());
  std::vector<std::vector<double>> rows;
  while (auto row = reader.next()) {
    if (row->size() == 1 && row->front().empty()) continue;
    if (row->size() != header->size())
      throw Error(ErrorKind::kFormat, "matrix row has " + std::to_string(row->size()) +
                                          " fields, expected " + std::to_string(header->size()));
    auto g = csv::parse_int((*row)[0]);
    auto y = csv::parse_int((*row)[1]);
    if (!g || !y) throw Error(ErrorKind::kFormat, "matrix row has a non-integer group or label");
    m.group_ids.push_back(static_cast<int>(*g));
    m.labels.push_back(static_cast<int>(*y));
    std::vector<double> values;
    for (std::size_t j = 2; j < row->size(); ++j) {
      auto v = csv::parse_double((*row)[j]);
      if (!v) throw Error(ErrorKind::kFormat, "matrix value '" + (*row)[j] + "' is not a number");
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.column_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  m.validate();
  return m;
}

}  // namespace fairgap
