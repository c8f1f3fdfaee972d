#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablemaster/errors.hpp"

namespace tablemaster {

using Row = std::vector<std::string>;

// Rectangular grid of text cells under a single header row. Immutable once
// built; the constructor enforces rectangularity and a non-empty header.
class Table {
 public:
  Table(std::vector<std::string> headers, std::vector<Row> rows,
        std::optional<std::string> name = std::nullopt);

  const std::vector<std::string>& headers() const { return headers_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::optional<std::string>& name() const { return name_; }

  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return headers_.size(); }
  const std::string& cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

  // Column values top to bottom.
  std::vector<std::string> column(std::size_t col) const;
  std::optional<std::size_t> column_index(std::string_view header) const;

  Table with_name(std::optional<std::string> name) const;

  bool operator==(const Table&) const = default;

 private:
  std::vector<std::string> headers_;
  std::vector<Row> rows_;
  std::optional<std::string> name_;
};

enum class TableFormat { markdown, csv, tsv, jsonl_table };

TableFormat parse_table_format(std::string_view name);
std::string_view to_string(TableFormat format);
// Guess from a file extension (".md", ".csv", ".tsv", ".json"/".jsonl").
std::optional<TableFormat> format_from_extension(std::string_view path);

// Lenient mode right-pads short rows with empty cells and truncates long ones;
// strict mode throws ParseError on any ragged row.
Table parse_table(std::string_view text, TableFormat format, bool strict = false);

// RFC-4180 style reader for an arbitrary single-byte delimiter. Returns raw
// records; rectangularity is the caller's concern.
std::vector<Row> read_delimited(std::string_view text, char delimiter, bool quoting = true);

std::string render_markdown(const Table& table, bool with_addresses = false);
std::string render_csv(const Table& table);
std::string render_jsonl_table(const Table& table);

// First column is promoted to the header row. transpose(transpose(T)) == T for
// any table with at least one row and two columns.
Table transpose(const Table& table);

// First min(k, m) rows; headers always kept.
Table peek(const Table& table, std::size_t k);

struct CellSelection {
  std::vector<std::size_t> row_indices;
  std::vector<std::size_t> column_indices;

  static CellSelection all(const Table& table);
};

// Rows and columns kept in original relative order. Throws IndexError when the
// selection is out of bounds, unsorted or has duplicates.
Table project(const Table& table, const CellSelection& selection);

struct SizeMetrics {
  std::size_t row_count = 0;
  std::size_t column_count = 0;
  std::size_t area = 0;
  std::size_t token_estimate = 0;
};

using Tokenizer = std::function<std::size_t(std::string_view)>;

// ceil(characters / 4), counting UTF-8 code points.
std::size_t heuristic_token_count(std::string_view text);

SizeMetrics measure(const Table& table, const Tokenizer& tokenizer = heuristic_token_count);

}  // namespace tablemaster
