#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tablemaster/normalize.hpp"

namespace tablemaster {

// Carries the byte offset of the offending token when it is known.
class SqlError : public Error {
 public:
  SqlError(const std::string& what, std::size_t position = npos)
      : Error(position == npos ? what : what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t position_;
};

TABLEMASTER_DEFINE_ERROR(SqlSyntaxError, SqlError)
TABLEMASTER_DEFINE_ERROR(SqlSemanticError, SqlError)
TABLEMASTER_DEFINE_ERROR(SqlPolicyError, SqlError)
TABLEMASTER_DEFINE_ERROR(SqlTimeout, SqlError)

struct SqlColumn {
  std::string original;
  std::string name;
  Kind kind = Kind::text;
};

struct SqlSchema {
  std::string table_name = "t";
  std::vector<SqlColumn> columns;
  std::string row_id_column = "_row_id";

  // CREATE TABLE-style listing with the original headers as comments; this is
  // what row-lookup prompts show the model.
  std::string describe() const;
  std::optional<std::string> sanitized(std::string_view original) const;
};

struct RowSet {
  std::vector<std::size_t> indices;  // sorted, unique, within [0, m)
  std::string sql;                   // the statement actually executed
  std::optional<std::string> empty_reason;
  bool aggregate_fallback = false;   // only the WHERE clause of an aggregate query was re-run
  std::vector<std::string> warnings;

  static RowSet all_rows(std::size_t row_count, std::string reason);
};

// Lowercase, non-alphanumerics to '_', runs collapsed, trailing '_' trimmed,
// leading digit prefixed with "c_", reserved words suffixed with '_',
// collisions resolved with "_2", "_3", ... The result is added to `taken`.
std::string sanitize_identifier(std::string_view header, std::set<std::string>& taken);

SqlSchema build_schema(const NormalizedTable& table);

// In-memory relational view of one table, queried with a restricted SELECT
// dialect. Typed columns are stored as numbers (dates as ISO text);
// unparseable typed cells become NULL.
class SqlEngine {
 public:
  explicit SqlEngine(const NormalizedTable& table,
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  ~SqlEngine();
  SqlEngine(SqlEngine&&) noexcept;
  SqlEngine& operator=(SqlEngine&&) noexcept;
  SqlEngine(const SqlEngine&) = delete;
  SqlEngine& operator=(const SqlEngine&) = delete;

  const SqlSchema& schema() const;
  std::size_t row_count() const;

  // Indices of the tuples the statement selects, regardless of its select list.
  RowSet execute(std::string_view sql);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RowSet execute_row_lookup(const NormalizedTable& table, std::string_view sql);

}  // namespace tablemaster
