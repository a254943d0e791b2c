#pragma once

#include <string>
#include <vector>

namespace lobliq {

struct Column {
  std::string name;
  std::string description;
};

/// A numeric table: one CSV file, one JSON file and one schema sidecar.
struct Table {
  std::string name;  // file stem
  std::string title;
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);  // throws std::invalid_argument on a width mismatch
};

inline constexpr const char* kTableSchemaVersion = "lobliq.table/1";
inline constexpr const char* kManifestSchemaVersion = "lobliq.manifest/1";

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

std::string to_csv(const Table& table);
/// {"schema", "name", "title", "columns", "data": {column: [values]}}. Non-finite values are null.
std::string to_json(const Table& table);
/// Column names, order and descriptions.
std::string schema_json(const Table& table);

/// Writes through a temporary file in the same directory and renames it over
/// `path`. Throws std::runtime_error on IO failure.
void write_file_atomic(const std::string& path, const std::string& content);

/// Writes <dir>/<name>.csv (+ <name>.schema.json) and/or <dir>/<name>.json.
/// format is csv, json or both. Returns the file names written.
std::vector<std::string> emit_table(const Table& table, const std::string& dir, const std::string& format);

}  // namespace lobliq
