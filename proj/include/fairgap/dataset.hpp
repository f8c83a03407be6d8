#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fairgap {

enum class Sex { kMale, kFemale };
enum class ChargeDegree { kFelony, kMisdemeanor, kOther };  // kOther: ordinary traffic ("O")

std::string_view to_string(Sex sex);
std::string_view to_string(ChargeDegree degree);

// One defendant row.
struct Record {
  std::string id;
  int age = 0;
  Sex sex = Sex::kMale;
  std::string race;
  int priors_count = 0;
  ChargeDegree charge_degree = ChargeDegree::kFelony;
  int juv_fel_count = 0;
  int juv_misd_count = 0;
  int juv_other_count = 0;
  std::optional<int> days_b_screening_arrest;
  int outcome = 0;                   // two-year recidivism
  std::optional<int> decile_score;   // reporting only, never a feature

  bool operator==(const Record&) const = default;
};

struct RecordTable {
  std::vector<Record> records;
  std::size_t dropped_rows = 0;  // rows rejected by load_records

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Maps logical fields onto input column names. Defaults follow the ProPublica export.
struct ColumnMap {
  std::string id = "id";
  std::string age = "age";
  std::string sex = "sex";
  std::string race = "race";
  std::string priors_count = "priors_count";
  std::string charge_degree = "c_charge_degree";
  std::string juv_fel_count = "juv_fel_count";
  std::string juv_misd_count = "juv_misd_count";
  std::string juv_other_count = "juv_other_count";
  std::string days_b_screening_arrest = "days_b_screening_arrest";
  std::string outcome = "two_year_recid";
  std::string decile_score = "decile_score";
};

// Reads comma-separated text with a header row. The first occurrence of a
// duplicated header name wins. Rows with unparseable required fields are
// dropped and counted in RecordTable::dropped_rows.
RecordTable load_records(const std::filesystem::path& path, const ColumnMap& columns = {});
RecordTable load_records(std::istream& in, const ColumnMap& columns = {});

// Writes records back out with the default column names.
std::string records_to_csv(const RecordTable& table);

enum class GroupAttribute { kRace, kSex };
std::string_view to_string(GroupAttribute attribute);
GroupAttribute group_attribute_from_string(std::string_view name);

struct CohortPolicy {
  // Order defines group ids when grouping by race: the first entry is group 0.
  std::vector<std::string> allowed_races{"African-American", "Caucasian"};
  int age_min = 18;
  int age_max = 40;
  GroupAttribute group_attribute = GroupAttribute::kRace;
  bool apply_screening_window = true;

  void validate() const;
  // Group names in id order: allowed_races for race, {Male, Female} for sex.
  std::vector<std::string> group_levels() const;
};

// Row counts after each filter stage, in application order.
using FilterStages = std::vector<std::pair<std::string, std::size_t>>;

RecordTable filter_cohort(const RecordTable& table, const CohortPolicy& policy,
                          FilterStages* stages = nullptr);

// Numeric variables: age, priors_count, juv_fel_count, juv_misd_count,
// juv_other_count, days_b_screening_arrest, two_year_recid, decile_score.
// Throws kType for categorical variables and kSchema for unknown names.
std::optional<double> numeric_field(const Record& record, std::string_view name);
// Categorical variables: sex, race, c_charge_degree.
std::string categorical_field(const Record& record, std::string_view name);
bool is_numeric_variable(std::string_view name);
bool is_categorical_variable(std::string_view name);

struct FeatureSchema {
  std::vector<std::string> numeric;      // standardized
  std::vector<std::string> categorical;  // one indicator per level
  GroupAttribute group_attribute = GroupAttribute::kRace;
  std::vector<std::string> group_levels{"African-American", "Caucasian"};

  // age, priors_count, juvenile counts, charge degree, plus sex when grouping by race.
  static FeatureSchema defaults_for(const CohortPolicy& policy);
  void validate() const;
};

struct NumericStat {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;  // population (1/n)
};

struct CategoricalLevels {
  std::string name;
  std::vector<std::string> levels;  // sorted
};

struct EncodingStats {
  std::vector<NumericStat> numeric;
  std::vector<CategoricalLevels> categorical;
};

struct FeatureMatrix {
  Eigen::MatrixXd values;  // rows x cols
  std::vector<std::string> column_names;
  std::vector<int> group_ids;
  std::vector<int> labels;
  std::vector<std::string> group_names;  // index = group id
  std::size_t unseen_levels = 0;         // categorical values absent from the statistics

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  int num_groups() const { return static_cast<int>(group_names.size()); }

  FeatureMatrix subset(std::span<const std::size_t> row_indices) const;
  void validate() const;
};

struct EncodedFeatures {
  FeatureMatrix matrix;
  EncodingStats stats;
};

// When `stats` is null they are computed from `table`; otherwise applied unchanged.
EncodedFeatures encode_features(const RecordTable& table, const FeatureSchema& schema,
                                const EncodingStats* stats = nullptr);

struct SplitResult {
  FeatureMatrix train;
  FeatureMatrix test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// Stratified jointly on (group, label); every cell keeps at least one row on
// each side. Rows keep their input order within each side.
SplitResult split(const FeatureMatrix& matrix, double test_fraction, std::uint64_t seed);

struct CohortSummary {
  std::size_t total = 0;
  std::size_t dropped_rows = 0;
  std::map<std::string, std::size_t> race_counts;
  std::map<std::string, std::size_t> sex_counts;
  std::map<int, std::size_t> age_histogram;
};

CohortSummary cohort_summary(const RecordTable& table);

nlohmann::json to_json(const CohortSummary& summary);
nlohmann::json to_json(const EncodingStats& stats);
EncodingStats encoding_stats_from_json(const nlohmann::json& doc);

// Matrix CSV: group, label, then one column per feature.
std::string matrix_to_csv(const FeatureMatrix& matrix);
FeatureMatrix matrix_from_csv(std::istream& in, std::vector<std::string> group_names);

}  // namespace fairgap
