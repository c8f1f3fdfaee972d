#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tablemaster/table.hpp"

namespace tablemaster {

enum class Kind { integer, decimal, date, text, mixed };
std::string_view to_string(Kind kind);

struct ColumnKind {
  Kind kind = Kind::text;
  double parse_ratio = 0.0;  // fraction of non-empty cells parseable as `kind`
};

enum class OrientationValue { row_major, column_major };
std::string_view to_string(OrientationValue value);

struct Orientation {
  OrientationValue value = OrientationValue::row_major;
  double confidence = 0.5;
  double row_major_score = 0.0;
  double column_major_score = 0.0;
};

struct NormalizedTable {
  Table table;
  std::vector<ColumnKind> column_kinds;
  bool transposed = false;
  // One entry per column: the canonicalizations applied, plus "unparsed:row N"
  // markers for cells left verbatim inside a typed column.
  std::vector<std::vector<std::string>> provenance;
};

// Single-cell parsers. Both accept thousands separators, a leading sign and a
// currency symbol; they return the canonical spelling.
std::optional<std::string> canonical_integer(std::string_view cell);
std::optional<std::string> canonical_decimal(std::string_view cell);

struct ParsedDate {
  std::string iso;         // YYYY-MM-DD
  bool ambiguous = false;  // numeric D/M vs M/D both valid; resolved as M/D
};
std::optional<ParsedDate> parse_date(std::string_view cell);

Orientation detect_orientation(const Table& table);
ColumnKind infer_column_kind(const std::vector<std::string>& cells);

// Best-effort and total: orientation, then per-column canonicalization.
NormalizedTable normalize(const Table& table);

// Kinds inferred, cells untouched. Used when normalization is switched off.
NormalizedTable classify_only(const Table& table);

}  // namespace tablemaster
