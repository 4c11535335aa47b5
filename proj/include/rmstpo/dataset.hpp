#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rmstpo {

// One subject after encoding: observed time Y = min(T, C), event flag,
// arm assignment and the encoded covariate vector.
struct SurvivalRecord {
  std::string id;
  int arm = 0;     // 0 or 1
  double time = 0.0;  // > 0, days
  int event = 0;   // 1 = event, 0 = censored
  std::vector<double> covariates;
};

// Description of one raw covariate column.
struct CovariateSpec {
  std::string name;
  bool categorical = false;
  std::vector<std::string> levels;  // sorted; first level is the reference
};

struct CovariateSchema {
  std::vector<CovariateSpec> columns;        // raw columns, input order
  std::vector<std::string> encoded_names;    // names after one-hot encoding

  std::size_t encoded_dim() const { return encoded_names.size(); }
};

struct StudyData {
  std::vector<SurvivalRecord> records;
  CovariateSchema schema;

  std::size_t size() const { return records.size(); }
  std::size_t arm_count(int arm) const;
};

// Optional override of the reserved column names (id, arm, time, event).
struct SchemaHint {
  std::optional<std::string> id_column;
  std::optional<std::string> arm_column;
  std::optional<std::string> time_column;
  std::optional<std::string> event_column;
};

// Raw parsed CSV, kept so tools can echo the input columns verbatim.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column_index(const std::string& name) const;
};

// Index view of the records belonging to one arm, original order preserved.
struct ArmView {
  const StudyData* data = nullptr;
  std::vector<std::size_t> rows;

  std::size_t size() const { return rows.size(); }
  const SurvivalRecord& record(std::size_t i) const {
    return data->records[rows[i]];
  }
  std::vector<double> times() const;
  std::vector<int> events() const;
};

CsvTable parse_csv(std::istream& in);
CsvTable parse_csv_file(const std::string& path);

// Validates and encodes a raw table. Categorical covariates are one-hot
// encoded with the lexicographically smallest level as reference; numeric
// covariates pass through. Missing cells, non-numeric time, out-of-range
// arm/event values and duplicate ids raise ValidationError with the
// offending row number.
StudyData encode(const CsvTable& table, const SchemaHint& hint = {});

StudyData load_csv(const std::string& path, const SchemaHint& hint = {});

// Throws ValidationError unless both arms have at least two subjects.
void validate_two_arm(const StudyData& data);

// Partition into per-arm views: (arm1, arm0).
std::pair<ArmView, ArmView> split_by_arm(const StudyData& data);

// Writes id, arm, time, event plus the encoded covariate columns. Reals
// are printed with enough digits to round-trip bit-exactly.
void write_csv(const StudyData& data, std::ostream& out);

}  // namespace rmstpo
