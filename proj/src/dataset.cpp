#include "rmstpo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rmstpo/errors.hpp"

namespace rmstpo {

namespace {

// Strict double parse: the whole cell must be consumed.
std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  const char* end = begin + s.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<int> parse_binary(const std::string& s) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::size_t StudyData::arm_count(int arm) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(),
                    [arm](const SurvivalRecord& r) { return r.arm == arm; }));
}

std::optional<std::size_t> CsvTable::column_index(
    const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw ValidationError("row " + std::to_string(row_number) + ": expected " +
                            std::to_string(table.header.size()) +
                            " cells, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable parse_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  return parse_csv(in);
}

StudyData encode(const CsvTable& table, const SchemaHint& hint) {
  const std::string id_col = hint.id_column.value_or("id");
  const std::string arm_col = hint.arm_column.value_or("arm");
  const std::string time_col = hint.time_column.value_or("time");
  const std::string event_col = hint.event_column.value_or("event");

  auto require = [&](const std::string& name) {
    auto idx = table.column_index(name);
    if (!idx) throw ValidationError("missing required column: " + name);
    return *idx;
  };
  const std::size_t ci_id = require(id_col);
  const std::size_t ci_arm = require(arm_col);
  const std::size_t ci_time = require(time_col);
  const std::size_t ci_event = require(event_col);

  std::vector<std::size_t> cov_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i != ci_id && i != ci_arm && i != ci_time && i != ci_event) {
      cov_cols.push_back(i);
    }
  }

  // Row numbers in error messages are file rows (header = row 1).
  auto row_no = [](std::size_t r) { return std::to_string(r + 2); };

  // Pass 1: classify covariate columns. A column is numeric iff every cell
  // parses as a number; otherwise categorical with sorted distinct levels.
  CovariateSchema schema;
  for (std::size_t c : cov_cols) {
    CovariateSpec spec;
    spec.name = table.header[c];
    bool numeric = true;
    std::set<std::string> levels;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& cell = table.rows[r][c];
      if (cell.empty()) {
        throw ValidationError("row " + row_no(r) + ": missing value in column '" +
                              spec.name + "'");
      }
      if (!parse_double(cell)) numeric = false;
      levels.insert(cell);
    }
    if (!numeric) {
      spec.categorical = true;
      spec.levels.assign(levels.begin(), levels.end());  // lexicographic
      // reference level = first; one indicator per remaining level
      for (std::size_t l = 1; l < spec.levels.size(); ++l) {
        schema.encoded_names.push_back(spec.name + "=" + spec.levels[l]);
      }
    } else {
      schema.encoded_names.push_back(spec.name);
    }
    schema.columns.push_back(std::move(spec));
  }

  StudyData data;
  data.schema = schema;
  data.records.reserve(table.rows.size());
  std::set<std::string> seen_ids;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    SurvivalRecord rec;
    rec.id = cells[ci_id];
    if (rec.id.empty()) {
      throw ValidationError("row " + row_no(r) + ": missing id");
    }
    if (!seen_ids.insert(rec.id).second) {
      throw ValidationError("row " + row_no(r) + ": duplicate id '" + rec.id +
                            "'");
    }
    auto arm = parse_binary(cells[ci_arm]);
    if (!arm) {
      throw ValidationError("row " + row_no(r) + ": arm must be 0 or 1, got '" +
                            cells[ci_arm] + "'");
    }
    rec.arm = *arm;
    auto time = parse_double(cells[ci_time]);
    if (!time) {
      throw ValidationError("row " + row_no(r) + ": non-numeric time '" +
                            cells[ci_time] + "'");
    }
    if (!(*time > 0.0)) {
      throw ValidationError("row " + row_no(r) + ": time must be positive, got " +
                            cells[ci_time]);
    }
    rec.time = *time;
    auto event = parse_binary(cells[ci_event]);
    if (!event) {
      throw ValidationError("row " + row_no(r) +
                            ": event must be 0 or 1, got '" + cells[ci_event] +
                            "'");
    }
    rec.event = *event;

    rec.covariates.reserve(schema.encoded_dim());
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      const auto& spec = schema.columns[k];
      const std::string& cell = cells[cov_cols[k]];
      if (spec.categorical) {
        if (std::find(spec.levels.begin(), spec.levels.end(), cell) ==
            spec.levels.end()) {
          throw ValidationError("row " + row_no(r) + ": unknown level '" + cell +
                                "' in column '" + spec.name + "'");
        }
        for (std::size_t l = 1; l < spec.levels.size(); ++l) {
          rec.covariates.push_back(cell == spec.levels[l] ? 1.0 : 0.0);
        }
      } else {
        rec.covariates.push_back(*parse_double(cell));
      }
    }
    data.records.push_back(std::move(rec));
  }

  validate_two_arm(data);
  return data;
}

StudyData load_csv(const std::string& path, const SchemaHint& hint) {
  return encode(parse_csv_file(path), hint);
}

void validate_two_arm(const StudyData& data) {
  const std::size_t n1 = data.arm_count(1);
  const std::size_t n0 = data.arm_count(0);
  if (n1 < 2 || n0 < 2) {
    throw ValidationError("need at least 2 subjects per arm, got n1=" +
                          std::to_string(n1) + ", n0=" + std::to_string(n0));
  }
}

std::pair<ArmView, ArmView> split_by_arm(const StudyData& data) {
  ArmView arm1{&data, {}};
  ArmView arm0{&data, {}};
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    (data.records[i].arm == 1 ? arm1 : arm0).rows.push_back(i);
  }
  return {arm1, arm0};
}

std::vector<double> ArmView::times() const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = record(i).time;
  return out;
}

std::vector<int> ArmView::events() const {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = record(i).event;
  return out;
}

void write_csv(const StudyData& data, std::ostream& out) {
  out << "id,arm,time,event";
  for (const auto& name : data.schema.encoded_names) out << "," << name;
  out << "\n";
  for (const auto& rec : data.records) {
    out << rec.id << "," << rec.arm << "," << format_double(rec.time) << ","
        << rec.event;
    for (double v : rec.covariates) out << "," << format_double(v);
    out << "\n";
  }
}

}  // namespace rmstpo
