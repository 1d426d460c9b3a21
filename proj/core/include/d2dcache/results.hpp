#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "d2dcache/config.hpp"

namespace d2dcache {

/// Empty, real, unsigned integer (trials, seeds) or text.
using Cell = std::variant<std::monostate, double, std::uint64_t, std::string>;

/// Column-ordered result table. Rows keep insertion order.
class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  /// Throws std::out_of_range for an unknown column.
  std::size_t column_index(std::string_view name) const;
  const Cell& at(std::size_t row, std::string_view column) const;

  /// Row with every column empty, to be filled with `set`.
  std::vector<Cell> blank_row() const { return std::vector<Cell>(columns_.size()); }
  void set(std::vector<Cell>& row, std::string_view column, Cell value) const;
  /// Throws std::invalid_argument if the width does not match.
  void add_row(std::vector<Cell> row);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// 12 significant digits; "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double value);
std::string format_cell(const Cell& cell);

void write_csv(const ResultTable& table, std::ostream& out);
void write_jsonl(const ResultTable& table, std::ostream& out);

/// Reads a table written by write_csv. Unsigned integers come back as
/// uint64, other numbers as double, empty fields as empty cells.
ResultTable read_csv(std::istream& in);

/// Writes to `path`, or to stdout when the path is empty or "-".
/// Throws IoError naming the path.
void emit_results(const ResultTable& table, OutputFormat format, const std::filesystem::path& path);

}  // namespace d2dcache
