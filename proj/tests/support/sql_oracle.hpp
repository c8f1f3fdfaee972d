#pragma once

// Brute-force reference for row lookup: generates a typed table plus a
// predicate, renders the predicate as SQL, and filters rows directly with
// three-valued logic.

#include <string>
#include <vector>

#include "tablemaster/normalize.hpp"
#include "test_support.hpp"

namespace tmtest {

struct SqlCase {
  tablemaster::NormalizedTable table;
  std::string sql;
  std::vector<std::size_t> expected;
};

SqlCase generate_sql_case(Rng& rng);

// SQL LIKE: '%' any run, '_' one character, ASCII case-insensitive.
bool like_reference(const std::string& text, const std::string& pattern);

}  // namespace tmtest
