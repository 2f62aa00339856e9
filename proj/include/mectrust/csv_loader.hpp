#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mectrust {

enum class ColumnRole { numeric, categorical, label, drop };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::numeric;
};

// Maps raw label strings to +1 / -1. Patterns may end or start with '*'.
struct LabelMapping {
  std::vector<std::string> benign;
  std::vector<std::string> harmful;

  // Throws ValidationError for values matching neither list.
  int map(const std::string& raw) const;
};

enum class LabelSource {
  column,  // a column with role "label"
  path,    // the file path relative to the device directory, '/' -> '_', no extension
};

struct Schema {
  std::string dataset_name;
  std::vector<ColumnSpec> columns;
  bool has_header = true;
  LabelSource label_source = LabelSource::column;
  LabelMapping labels;
  // Numeric cells that are empty after trimming take this value; without it
  // they are a parse error.
  std::optional<double> missing_numeric;
  // When set, rows are grouped into devices by this column's value instead
  // of by file or directory.
  std::optional<std::string> device_column;

  static Schema from_json(const nlohmann::json& doc);
  static Schema load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// A kept (numeric or categorical) column of a raw table.
struct RawColumn {
  std::string name;
  ColumnRole role = ColumnRole::numeric;
  std::size_t slot = 0;  // index into RawRow::numeric or RawRow::categorical
};

struct RawRow {
  std::vector<double> numeric;
  std::vector<std::string> categorical;
  int label = 1;
  std::string device;
};

struct RawTable {
  std::vector<RawColumn> columns;
  std::vector<RawRow> rows;

  std::size_t categorical_count() const;
};

// Layout of kept columns implied by a schema.
std::vector<RawColumn> raw_layout(const Schema& schema);

// Reads one CSV file. path_label supplies the raw label string when the
// schema takes labels from the file path.
// Errors: IoError (missing file), ParseError (row, column), ValidationError
// (unknown label, header mismatch).
RawTable load_csv(const std::filesystem::path& path, const Schema& schema,
                  const std::optional<std::string>& path_label = std::nullopt);

// Splits one CSV line into fields, honouring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace mectrust
