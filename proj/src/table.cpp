#include "tablemaster/table.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "text_util.hpp"

namespace tablemaster {

using detail::trim;

Table::Table(std::vector<std::string> headers, std::vector<Row> rows,
             std::optional<std::string> name)
    : headers_(std::move(headers)), rows_(std::move(rows)), name_(std::move(name)) {
  if (headers_.empty()) throw ShapeError("table header is empty");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != headers_.size()) {
      throw ShapeError("row " + std::to_string(i) + " has " + std::to_string(rows_[i].size()) +
                       " cells, expected " + std::to_string(headers_.size()));
    }
  }
}

std::vector<std::string> Table::column(std::size_t col) const {
  if (col >= headers_.size()) throw IndexError("column " + std::to_string(col) + " out of range");
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) out.push_back(row[col]);
  return out;
}

std::optional<std::size_t> Table::column_index(std::string_view header) const {
  for (std::size_t j = 0; j < headers_.size(); ++j) {
    if (headers_[j] == header) return j;
  }
  return std::nullopt;
}

Table Table::with_name(std::optional<std::string> name) const {
  return Table(headers_, rows_, std::move(name));
}

TableFormat parse_table_format(std::string_view name) {
  if (name == "markdown" || name == "md") return TableFormat::markdown;
  if (name == "csv") return TableFormat::csv;
  if (name == "tsv") return TableFormat::tsv;
  if (name == "jsonl-table" || name == "json") return TableFormat::jsonl_table;
  throw ConfigError("unknown table format '" + std::string(name) + "'");
}

std::string_view to_string(TableFormat format) {
  switch (format) {
    case TableFormat::markdown: return "markdown";
    case TableFormat::csv: return "csv";
    case TableFormat::tsv: return "tsv";
    case TableFormat::jsonl_table: return "jsonl-table";
  }
  return "markdown";
}

std::optional<TableFormat> format_from_extension(std::string_view path) {
  const std::string lowered = detail::lower(path);
  auto ends_with = [&](std::string_view suffix) {
    return lowered.size() >= suffix.size() && std::string_view(lowered).substr(lowered.size() - suffix.size()) == suffix;
  };
  if (ends_with(".md") || ends_with(".markdown")) return TableFormat::markdown;
  if (ends_with(".csv")) return TableFormat::csv;
  if (ends_with(".tsv")) return TableFormat::tsv;
  if (ends_with(".json") || ends_with(".jsonl")) return TableFormat::jsonl_table;
  return std::nullopt;
}

namespace {

Table rectangularize(std::vector<Row> records, bool strict, std::string_view what) {
  if (records.empty()) throw ParseError(std::string(what) + ": no header row");
  Row header = std::move(records.front());
  if (header.empty()) throw ParseError(std::string(what) + ": empty header");
  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    Row& r = records[i];
    if (r.size() != header.size()) {
      if (strict) {
        throw ParseError(std::string(what) + ": row " + std::to_string(i) + " has " +
                         std::to_string(r.size()) + " cells, header has " +
                         std::to_string(header.size()));
      }
      r.resize(header.size());
    }
    rows.push_back(std::move(r));
  }
  return Table(std::move(header), std::move(rows));
}

bool is_separator_cell(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == ':') cell.remove_prefix(1);
  if (!cell.empty() && cell.back() == ':') cell.remove_suffix(1);
  return !cell.empty() && std::all_of(cell.begin(), cell.end(), [](char c) { return c == '-'; });
}

Row split_markdown_row(std::string_view line, std::size_t line_no) {
  line = trim(line);
  if (line.find('|') == std::string_view::npos) {
    throw ParseError("markdown: line " + std::to_string(line_no) + " has no pipe delimiter");
  }
  if (line.front() == '|') line.remove_prefix(1);
  // A trailing pipe closes the row unless it is escaped.
  if (!line.empty() && line.back() == '|' && !(line.size() >= 2 && line[line.size() - 2] == '\\')) {
    line.remove_suffix(1);
  }
  Row cells;
  std::string current;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
      current += '|';
      ++i;
    } else if (c == '|') {
      cells.emplace_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  cells.emplace_back(trim(current));
  return cells;
}

Table parse_markdown(std::string_view text, bool strict) {
  std::vector<Row> records;
  auto lines = detail::split_lines(text);
  bool saw_separator = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    Row cells = split_markdown_row(lines[i], i + 1);
    if (records.size() == 1 && !saw_separator &&
        std::all_of(cells.begin(), cells.end(), is_separator_cell)) {
      saw_separator = true;
      continue;
    }
    records.push_back(std::move(cells));
  }
  if (strict && !saw_separator) throw ParseError("markdown: missing separator row");
  return rectangularize(std::move(records), strict, "markdown");
}

std::string json_cell(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

Table parse_json_table(std::string_view text, bool strict) {
  std::string_view body = trim(text);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    // jsonl: take the first non-empty line.
    auto lines = detail::split_lines(body);
    auto it = std::find_if(lines.begin(), lines.end(), [](auto l) { return !trim(l).empty(); });
    try {
      doc = nlohmann::json::parse(*it);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("jsonl-table: ") + e.what());
    }
  }
  if (!doc.is_object() || !doc.contains("header") || !doc["header"].is_array()) {
    throw ParseError("jsonl-table: expected an object with a \"header\" array");
  }
  std::vector<Row> records;
  Row header;
  for (const auto& h : doc["header"]) header.push_back(json_cell(h));
  records.push_back(std::move(header));
  if (doc.contains("rows")) {
    if (!doc["rows"].is_array()) throw ParseError("jsonl-table: \"rows\" must be an array");
    for (const auto& r : doc["rows"]) {
      if (!r.is_array()) throw ParseError("jsonl-table: every row must be an array");
      Row row;
      for (const auto& c : r) row.push_back(json_cell(c));
      records.push_back(std::move(row));
    }
  }
  return rectangularize(std::move(records), strict, "jsonl-table");
}

}  // namespace

std::vector<Row> read_delimited(std::string_view text, char delimiter, bool quoting) {
  std::vector<Row> records;
  Row record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes an empty line from a record with one empty field
  std::size_t i = 0;
  auto end_record = [&] {
    if (field_started || !record.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (quoting && c == '"' && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      end_record();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      field += c;
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw ParseError("delimited text: unterminated quoted field");
  end_record();
  return records;
}

Table parse_table(std::string_view text, TableFormat format, bool strict) {
  if (trim(text).empty()) throw ParseError("table text is empty");
  switch (format) {
    case TableFormat::markdown: return parse_markdown(text, strict);
    case TableFormat::csv: return rectangularize(read_delimited(text, ',', true), strict, "csv");
    case TableFormat::tsv: return rectangularize(read_delimited(text, '\t', false), strict, "tsv");
    case TableFormat::jsonl_table: return parse_json_table(text, strict);
  }
  throw ParseError("unsupported format");
}

namespace {

std::string escape_markdown_cell(std::string_view cell) {
  std::string out;
  out.reserve(cell.size());
  for (char c : cell) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

void append_markdown_row(std::string& out, const std::vector<std::string>& cells) {
  out += '|';
  for (const auto& c : cells) {
    out += ' ';
    out += escape_markdown_cell(c);
    out += " |";
  }
}

}  // namespace

std::string render_markdown(const Table& table, bool with_addresses) {
  std::vector<std::string> header = table.headers();
  if (with_addresses) header.insert(header.begin(), "#");
  std::string out;
  append_markdown_row(out, header);
  out += "\n|";
  for (std::size_t j = 0; j < header.size(); ++j) out += " --- |";
  for (std::size_t i = 0; i < table.row_count(); ++i) {
    out += '\n';
    if (with_addresses) {
      Row row = table.rows()[i];
      row.insert(row.begin(), std::to_string(i + 1));
      append_markdown_row(out, row);
    } else {
      append_markdown_row(out, table.rows()[i]);
    }
  }
  return out;
}

namespace {

std::string csv_field(const std::string& cell) {
  bool needs_quotes = cell.find_first_of(",\"\n\r") != std::string::npos ||
                      (!cell.empty() && (cell.front() == ' ' || cell.back() == ' '));
  if (!needs_quotes) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void append_csv_record(std::string& out, const std::vector<std::string>& cells) {
  // A lone empty field would otherwise read back as a blank line.
  if (cells.size() == 1 && cells[0].empty()) {
    out += "\"\"\n";
    return;
  }
  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (j) out += ',';
    out += csv_field(cells[j]);
  }
  out += '\n';
}

}  // namespace

std::string render_csv(const Table& table) {
  std::string out;
  append_csv_record(out, table.headers());
  for (const auto& row : table.rows()) append_csv_record(out, row);
  return out;
}

std::string render_jsonl_table(const Table& table) {
  nlohmann::json doc;
  doc["header"] = table.headers();
  doc["rows"] = table.rows();
  return doc.dump();
}

Table transpose(const Table& table) {
  if (table.row_count() == 0) throw TransposeError("cannot transpose a table with no rows");
  std::vector<std::string> headers;
  headers.reserve(table.row_count() + 1);
  headers.push_back(table.headers()[0]);
  for (const auto& row : table.rows()) headers.push_back(row[0]);
  std::vector<Row> rows;
  for (std::size_t j = 1; j < table.column_count(); ++j) {
    Row out;
    out.reserve(headers.size());
    out.push_back(table.headers()[j]);
    for (const auto& row : table.rows()) out.push_back(row[j]);
    rows.push_back(std::move(out));
  }
  return Table(std::move(headers), std::move(rows), table.name());
}

Table peek(const Table& table, std::size_t k) {
  if (k >= table.row_count()) return table;
  std::vector<Row> rows(table.rows().begin(), table.rows().begin() + static_cast<std::ptrdiff_t>(k));
  return Table(table.headers(), std::move(rows), table.name());
}

CellSelection CellSelection::all(const Table& table) {
  CellSelection s;
  for (std::size_t i = 0; i < table.row_count(); ++i) s.row_indices.push_back(i);
  for (std::size_t j = 0; j < table.column_count(); ++j) s.column_indices.push_back(j);
  return s;
}

namespace {

void check_indices(const std::vector<std::size_t>& idx, std::size_t bound, std::string_view what) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= bound) {
      throw IndexError(std::string(what) + " index " + std::to_string(idx[i]) +
                       " out of range (size " + std::to_string(bound) + ")");
    }
    if (i > 0 && idx[i] <= idx[i - 1]) {
      throw IndexError(std::string(what) + " indices must be strictly ascending");
    }
  }
}

}  // namespace

Table project(const Table& table, const CellSelection& selection) {
  check_indices(selection.row_indices, table.row_count(), "row");
  check_indices(selection.column_indices, table.column_count(), "column");
  if (selection.column_indices.empty()) throw IndexError("projection selects no columns");
  std::vector<std::string> headers;
  for (auto j : selection.column_indices) headers.push_back(table.headers()[j]);
  std::vector<Row> rows;
  rows.reserve(selection.row_indices.size());
  for (auto i : selection.row_indices) {
    Row row;
    row.reserve(headers.size());
    for (auto j : selection.column_indices) row.push_back(table.rows()[i][j]);
    rows.push_back(std::move(row));
  }
  return Table(std::move(headers), std::move(rows), table.name());
}

std::size_t heuristic_token_count(std::string_view text) {
  std::size_t chars = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++chars;
  }
  return (chars + 3) / 4;
}

SizeMetrics measure(const Table& table, const Tokenizer& tokenizer) {
  SizeMetrics m;
  m.row_count = table.row_count();
  m.column_count = table.column_count();
  m.area = m.row_count * m.column_count;
  m.token_estimate = tokenizer(render_markdown(table, false));
  return m;
}

}  // namespace tablemaster
