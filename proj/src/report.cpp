#include "lobliq/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <unistd.h>

#include "json.hpp"

namespace lobliq {

namespace fs = std::filesystem;

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("table " + name + ": row width " + std::to_string(row.size()) + " != " +
                                std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out += ',';
    out += table.columns[j].name;
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_number(row[j]);
    }
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::ordered_json columns_json(const Table& table) {
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : table.columns) cols.push_back({{"name", c.name}, {"description", c.description}});
  return cols;
}

}  // namespace

std::string to_json(const Table& table) {
  nlohmann::ordered_json doc;
  doc["schema"] = kTableSchemaVersion;
  doc["name"] = table.name;
  doc["title"] = table.title;
  doc["columns"] = columns_json(table);
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    auto values = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      if (std::isfinite(row[j])) values.push_back(row[j]);
      else values.push_back(nullptr);
    }
    data[table.columns[j].name] = std::move(values);
  }
  doc["data"] = std::move(data);
  return doc.dump(1) + "\n";
}

std::string schema_json(const Table& table) {
  nlohmann::ordered_json doc;
  doc["schema"] = kTableSchemaVersion;
  doc["name"] = table.name;
  doc["title"] = table.title;
  doc["number_format"] = "%.17g; nan, inf, -inf for non-finite values";
  doc["columns"] = columns_json(table);
  return doc.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto " + target.string() + ": " + ec.message());
  }
}

std::vector<std::string> emit_table(const Table& table, const std::string& dir, const std::string& format) {
  if (format != "csv" && format != "json" && format != "both")
    throw std::invalid_argument("unknown output format '" + format + "'");
  fs::create_directories(dir);
  std::vector<std::string> written;
  const auto put = [&](const std::string& file, const std::string& content) {
    write_file_atomic((fs::path(dir) / file).string(), content);
    written.push_back(file);
  };
  if (format != "json") {
    put(table.name + ".csv", to_csv(table));
    put(table.name + ".schema.json", schema_json(table));
  }
  if (format != "csv") put(table.name + ".json", to_json(table));
  return written;
}

}  // namespace lobliq
