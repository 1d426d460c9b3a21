#include "d2dcache/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "d2dcache/errors.hpp"

namespace d2dcache {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

// RFC 4180 record splitter; handles quoted fields spanning lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch = 0;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (any) fields.push_back(std::move(field));
  return any;
}

Cell parse_field(const std::string& s) {
  if (s.empty()) return std::monostate{};
  const char* begin = s.data();
  const char* end = begin + s.size();
  std::uint64_t u = 0;
  if (auto [p, ec] = std::from_chars(begin, end, u); ec == std::errc{} && p == end) return u;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(begin, end, d); ec == std::errc{} && p == end) return d;
  return s;
}

}  // namespace

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

std::size_t ResultTable::column_index(std::string_view name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw std::out_of_range("no column named " + std::string(name));
  return static_cast<std::size_t>(it - columns_.begin());
}

const Cell& ResultTable::at(std::size_t row, std::string_view column) const {
  return rows_.at(row).at(column_index(column));
}

void ResultTable::set(std::vector<Cell>& row, std::string_view column, Cell value) const {
  row.at(column_index(column)) = std::move(value);
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, table has " +
                                std::to_string(columns_.size()) + " columns");
  }
  rows_.push_back(std::move(row));
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

void write_csv(const ResultTable& table, std::ostream& out) {
  const auto& cols = table.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << csv_escape(cols[i]);
  }
  out << '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << csv_escape(format_cell(row[i]));
    }
    out << '\n';
  }
}

void write_jsonl(const ResultTable& table, std::ostream& out) {
  const auto& cols = table.columns();
  for (const auto& row : table.rows()) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Cell& cell = row[i];
      if (const auto* d = std::get_if<double>(&cell)) {
        // Same 12 significant digits as the CSV writer.
        obj[cols[i]] = std::isfinite(*d) ? nlohmann::ordered_json(std::stod(format_number(*d)))
                                         : nlohmann::ordered_json(nullptr);
      } else if (const auto* u = std::get_if<std::uint64_t>(&cell)) {
        obj[cols[i]] = *u;
      } else if (const auto* s = std::get_if<std::string>(&cell)) {
        obj[cols[i]] = *s;
      } else {
        obj[cols[i]] = nullptr;
      }
    }
    out << obj.dump() << '\n';
  }
}

ResultTable read_csv(std::istream& in) {
  std::vector<std::string> fields;
  if (!read_record(in, fields)) return {};
  ResultTable table(fields);
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_field(f));
    table.add_row(std::move(row));
  }
  return table;
}

void emit_results(const ResultTable& table, OutputFormat format,
                  const std::filesystem::path& path) {
  auto write = [&](std::ostream& out) {
    if (format == OutputFormat::csv) {
      write_csv(table, out);
    } else {
      write_jsonl(table, out);
    }
    out.flush();
  };
  if (path.empty() || path == "-") {
    write(std::cout);
    if (!std::cout) throw IoError("failed writing results to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write(out);
  if (!out) throw IoError("failed writing results to " + path.string());
}

}  // namespace d2dcache
