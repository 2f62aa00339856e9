#include "mectrust/csv_loader.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "mectrust/errors.hpp"

namespace mectrust {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool glob_match(const std::string& pattern, const std::string& value) {
  if (pattern == "*") return true;
  if (!pattern.empty() && pattern.back() == '*') {
    const auto prefix = pattern.substr(0, pattern.size() - 1);
    return value.compare(0, prefix.size(), prefix) == 0;
  }
  if (!pattern.empty() && pattern.front() == '*') {
    const auto suffix = pattern.substr(1);
    return value.size() >= suffix.size() && value.compare(value.size() - suffix.size(), suffix.size(), suffix) == 0;
  }
  return pattern == value;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.size() > 2 && cell[0] == '0' && (cell[1] == 'x' || cell[1] == 'X')) {
    char* end = nullptr;
    const auto v = std::strtoll(cell.c_str() + 2, &end, 16);
    if (end != cell.c_str() + cell.size()) return std::nullopt;
    return static_cast<double>(v);
  }
  double v = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

ColumnRole role_from_string(const std::string& s) {
  if (s == "numeric") return ColumnRole::numeric;
  if (s == "categorical") return ColumnRole::categorical;
  if (s == "label") return ColumnRole::label;
  if (s == "drop") return ColumnRole::drop;
  throw ValidationError("unknown column role '" + s + "'");
}

const char* role_to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::numeric:
      return "numeric";
    case ColumnRole::categorical:
      return "categorical";
    case ColumnRole::label:
      return "label";
    case ColumnRole::drop:
      return "drop";
  }
  return "drop";
}

}  // namespace

int LabelMapping::map(const std::string& raw) const {
  const auto value = trim(raw);
  for (const auto& p : benign) {
    if (glob_match(p, value)) return 1;
  }
  for (const auto& p : harmful) {
    if (glob_match(p, value)) return -1;
  }
  throw ValidationError("unknown label value '" + value + "'");
}

Schema Schema::from_json(const nlohmann::json& doc) {
  Schema s;
  s.dataset_name = doc.value("dataset_name", std::string("dataset"));
  s.has_header = doc.value("has_header", true);
  const auto source = doc.value("label_source", std::string("column"));
  if (source == "column") {
    s.label_source = LabelSource::column;
  } else if (source == "path") {
    s.label_source = LabelSource::path;
  } else {
    throw ValidationError("label_source must be 'column' or 'path'");
  }
  for (const auto& c : doc.at("columns")) {
    s.columns.push_back(ColumnSpec{c.at("name").get<std::string>(), role_from_string(c.at("role").get<std::string>())});
  }
  const auto& labels = doc.at("labels");
  s.labels.benign = labels.at("benign").get<std::vector<std::string>>();
  s.labels.harmful = labels.at("harmful").get<std::vector<std::string>>();
  if (doc.contains("missing_numeric") && !doc.at("missing_numeric").is_null()) {
    s.missing_numeric = doc.at("missing_numeric").get<double>();
  }
  if (doc.contains("device_column") && !doc.at("device_column").is_null()) {
    s.device_column = doc.at("device_column").get<std::string>();
  }

  const auto label_cols = std::count_if(s.columns.begin(), s.columns.end(),
                                        [](const ColumnSpec& c) { return c.role == ColumnRole::label; });
  if (s.label_source == LabelSource::column && label_cols != 1) {
    throw ValidationError("schema needs exactly one label column");
  }
  if (s.label_source == LabelSource::path && label_cols != 0) {
    throw ValidationError("path-labelled schema must not declare a label column");
  }
  std::set<std::string> names;
  for (const auto& c : s.columns) {
    if (!names.insert(c.name).second) throw ValidationError("duplicate column '" + c.name + "'");
  }
  if (s.device_column && !names.count(*s.device_column)) {
    throw ValidationError("device_column '" + *s.device_column + "' is not a schema column");
  }
  return s;
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("schema " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Schema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns) cols.push_back({{"name", c.name}, {"role", role_to_string(c.role)}});
  nlohmann::json doc{{"dataset_name", dataset_name},
                     {"has_header", has_header},
                     {"label_source", label_source == LabelSource::column ? "column" : "path"},
                     {"columns", cols},
                     {"labels", {{"benign", labels.benign}, {"harmful", labels.harmful}}}};
  if (missing_numeric) doc["missing_numeric"] = *missing_numeric;
  if (device_column) doc["device_column"] = *device_column;
  return doc;
}

std::size_t RawTable::categorical_count() const {
  return static_cast<std::size_t>(std::count_if(
      columns.begin(), columns.end(), [](const RawColumn& c) { return c.role == ColumnRole::categorical; }));
}

std::vector<RawColumn> raw_layout(const Schema& schema) {
  std::vector<RawColumn> out;
  std::size_t numeric = 0;
  std::size_t categorical = 0;
  for (const auto& c : schema.columns) {
    if (c.role == ColumnRole::numeric) out.push_back(RawColumn{c.name, c.role, numeric++});
    if (c.role == ColumnRole::categorical) out.push_back(RawColumn{c.name, c.role, categorical++});
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

RawTable load_csv(const std::filesystem::path& path, const Schema& schema,
                  const std::optional<std::string>& path_label) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  if (schema.label_source == LabelSource::path && !path_label) {
    throw std::invalid_argument("schema takes labels from the path but none was given");
  }

  RawTable table;
  table.columns = raw_layout(schema);
  std::optional<int> fixed_label;
  if (path_label) fixed_label = schema.labels.map(*path_label);

  std::string line;
  std::size_t row_no = 0;
  if (schema.has_header) {
    if (!std::getline(in, line)) return table;
    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);
    if (header.size() != schema.columns.size()) {
      throw ValidationError(path.string() + ": header has " + std::to_string(header.size()) + " columns, schema has " +
                            std::to_string(schema.columns.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] != schema.columns[c].name) {
        throw ValidationError(path.string() + ": header column " + std::to_string(c) + " is '" + header[c] +
                              "', schema expects '" + schema.columns[c].name + "'");
      }
    }
  }

  const std::size_t n_numeric = static_cast<std::size_t>(std::count_if(
      schema.columns.begin(), schema.columns.end(), [](const ColumnSpec& c) { return c.role == ColumnRole::numeric; }));
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != schema.columns.size()) {
      throw ParseError(row_no, cells.size(), "expected " + std::to_string(schema.columns.size()) + " fields");
    }
    RawRow row;
    row.numeric.reserve(n_numeric);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& spec = schema.columns[c];
      if (schema.device_column && spec.name == *schema.device_column) row.device = trim(cells[c]);
      switch (spec.role) {
        case ColumnRole::numeric: {
          const auto cell = trim(cells[c]);
          auto v = parse_number(cell);
          if (!v && cell.empty() && schema.missing_numeric) v = schema.missing_numeric;
          if (!v) throw ParseError(row_no, c, "cannot parse '" + cell + "' as a number in column '" + spec.name + "'");
          row.numeric.push_back(*v);
          break;
        }
        case ColumnRole::categorical:
          row.categorical.push_back(trim(cells[c]));
          break;
        case ColumnRole::label:
          row.label = schema.labels.map(cells[c]);
          break;
        case ColumnRole::drop:
          break;
      }
    }
    if (fixed_label) row.label = *fixed_label;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mectrust
