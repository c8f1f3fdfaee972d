#pragma once

#include <string>
#include <vector>

#include "tablemaster/structure.hpp"

namespace tablemaster {

struct SufficiencyVerdict {
  bool sufficient = true;
  std::string raw_reply;
};

struct VerbalizedTable {
  std::string text;
  std::string source_focus_hash;
  bool mechanical = false;  // produced by the fallback, not the model
};

std::string focus_hash(const TableOfFocus& focus);

// Unparseable or failed replies count as sufficient (with a warning).
SufficiencyVerdict estimate_information(const TableOfFocus& focus, const std::string& question, LmSession& lm);

// Table-of-Focus re-construction. Starting from C0, repeatedly estimates
// sufficiency and, while insufficient and candidates remain, appends the next
// ranked candidate column. Rows stay fixed. At most |H| - |C0| + 1 estimations.
TableOfFocus reconstruct_focus(const NormalizedTable& table, const std::string& question, const RowSet& rows,
                               const std::vector<std::string>& initial_columns, const RankedColumns& ranked,
                               LmSession& lm);

// "Row 1: a=1; b=2. Row 2: ..."
std::string mechanical_verbalization(const Table& table);

VerbalizedTable verbalize(const TableOfFocus& focus, LmSession& lm);

}  // namespace tablemaster
