#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tablemaster/normalize.hpp"
#include "tablemaster/session.hpp"
#include "tablemaster/sql_rows.hpp"

namespace tablemaster {

struct StructureInfo {
  std::vector<std::string> headers;
  std::string key_column;
  std::size_t peek_used = 0;  // rows actually shown, min(k, m)
};

struct RankedColumns {
  std::vector<std::string> order;  // permutation of the headers
};

struct TableOfFocus {
  Table table;
  RowSet selected_rows;
  std::vector<std::string> selected_columns;  // C0 first, then columns added by re-construction
  std::size_t initial_column_count = 0;      // |C0|
  std::size_t reconstruction_count = 0;      // e
  std::size_t estimations = 0;               // sufficiency checks run
  double condensation_ratio = 1.0;           // area(focus) / area(normalized table)
};

StructureInfo extract_structure(const NormalizedTable& table, std::size_t k, LmSession& lm);

RankedColumns rank_columns(const NormalizedTable& table, const std::string& question, std::size_t k,
                           LmSession& lm);

// |C0| <= b_max; always contains the top-ranked column, and the key column
// when one is given.
std::vector<std::string> column_lookup(const RankedColumns& ranked, const std::string& question,
                                       std::size_t b_max, LmSession& lm,
                                       const std::optional<std::string>& key_column = std::nullopt);

// Never throws on model misbehaviour: SQL errors and aggregate-only queries
// fall back to all rows with empty_reason set.
RowSet row_lookup(const NormalizedTable& table, const std::string& question, std::size_t k, LmSession& lm,
                  SqlEngine& engine);

// Projection of the normalized table in original row/column order.
TableOfFocus construct_focus(const NormalizedTable& table, const RowSet& rows,
                             const std::vector<std::string>& columns);

// area(focus) / area(full); 1.0 when the full table has zero area.
double condensation_ratio(const Table& focus, const Table& full);

}  // namespace tablemaster
