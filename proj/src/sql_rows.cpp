#include "tablemaster/sql_rows.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <array>
#include <unordered_set>

#include "text_util.hpp"

namespace tablemaster {

using detail::lower;

RowSet RowSet::all_rows(std::size_t row_count, std::string reason) {
  RowSet r;
  for (std::size_t i = 0; i < row_count; ++i) r.indices.push_back(i);
  r.empty_reason = std::move(reason);
  return r;
}

namespace {

const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> words = {
      "all",     "alter",   "and",     "as",        "between",   "by",      "case",       "check",
      "collate", "commit",  "constraint", "create", "cross",     "default", "deferrable", "delete",
      "distinct", "drop",   "else",    "escape",    "except",    "exists",  "foreign",    "from",
      "full",    "glob",    "group",   "having",    "in",        "index",   "inner",      "insert",
      "intersect", "into",  "is",      "isnull",    "join",      "left",    "like",       "limit",
      "natural", "not",     "notnull", "null",      "on",        "or",      "order",      "outer",
      "primary", "references", "right", "select",   "set",       "table",   "then",       "to",
      "transaction", "union", "unique", "update",   "using",     "values",  "when",       "where"};
  return words;
}

}  // namespace

std::string sanitize_identifier(std::string_view header, std::set<std::string>& taken) {
  std::string base;
  for (char c : detail::trim(header)) {
    if (detail::is_alnum(c) && static_cast<unsigned char>(c) < 0x80) {
      base += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (base.empty() || base.back() != '_') {
      base += '_';
    }
  }
  while (!base.empty() && base.back() == '_') base.pop_back();
  if (base.empty()) base = "col";
  if (detail::is_digit(base.front())) base = "c_" + base;
  if (reserved_words().count(base)) base += '_';
  std::string name = base;
  for (int n = 2; taken.count(name); ++n) name = base + "_" + std::to_string(n);
  taken.insert(name);
  return name;
}

SqlSchema build_schema(const NormalizedTable& table) {
  SqlSchema schema;
  std::set<std::string> taken;
  const auto& headers = table.table.headers();
  for (std::size_t j = 0; j < headers.size(); ++j) {
    Kind kind = j < table.column_kinds.size() ? table.column_kinds[j].kind : Kind::text;
    schema.columns.push_back(SqlColumn{headers[j], sanitize_identifier(headers[j], taken), kind});
  }
  while (taken.count(schema.row_id_column)) schema.row_id_column += "_x";
  return schema;
}

namespace {

std::string_view sql_type(Kind kind) {
  switch (kind) {
    case Kind::integer: return "INTEGER";
    case Kind::decimal: return "REAL";
    default: return "TEXT";
  }
}

}  // namespace

std::string SqlSchema::describe() const {
  std::string out = "CREATE TABLE " + table_name + " (\n";
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out += "  " + columns[j].name + " " + std::string(sql_type(columns[j].kind));
    if (j + 1 < columns.size()) out += ",";
    out += "  -- \"" + columns[j].original + "\"";
    if (columns[j].kind == Kind::date) out += " (ISO date YYYY-MM-DD)";
    out += "\n";
  }
  out += ")";
  return out;
}

std::optional<std::string> SqlSchema::sanitized(std::string_view original) const {
  for (const auto& c : columns) {
    if (c.original == original) return c.name;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Lexical policy layer. Runs before SQLite sees the statement.

namespace {

enum class TokKind { word, string, number, quoted_ident, op, semicolon };

struct Token {
  TokKind kind;
  std::string text;  // uppercased for words
  std::size_t pos;
  std::size_t end;
};

std::vector<Token> tokenize_sql(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < sql.size()) {
    char c = sql[i];
    if (detail::is_space(c)) {
      ++i;
    } else if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      while (i < sql.size() && sql[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < sql.size() && sql[i + 1] == '*') {
      auto close = sql.find("*/", i + 2);
      i = close == std::string_view::npos ? sql.size() : close + 2;
    } else if (c == '\'' || c == '"' || c == '`' || c == '[') {
      char closer = c == '[' ? ']' : c;
      std::size_t start = i++;
      while (i < sql.size()) {
        if (sql[i] == closer) {
          if (closer != ']' && i + 1 < sql.size() && sql[i + 1] == closer) {
            i += 2;
            continue;
          }
          break;
        }
        ++i;
      }
      if (i >= sql.size()) throw SqlSyntaxError("unterminated quoted token", start);
      ++i;
      out.push_back({c == '\'' ? TokKind::string : TokKind::quoted_ident,
                     std::string(sql.substr(start, i - start)), start, i});
    } else if (detail::is_alnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80) {
      std::size_t start = i;
      bool numeric = detail::is_digit(c);
      while (i < sql.size() && (detail::is_alnum(sql[i]) || sql[i] == '_' || sql[i] == '$' ||
                                static_cast<unsigned char>(sql[i]) >= 0x80 || (numeric && sql[i] == '.'))) {
        ++i;
      }
      std::string text(sql.substr(start, i - start));
      if (!numeric) {
        std::transform(text.begin(), text.end(), text.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
      }
      out.push_back({numeric ? TokKind::number : TokKind::word, std::move(text), start, i});
    } else if (c == ';') {
      out.push_back({TokKind::semicolon, ";", i, i + 1});
      ++i;
    } else {
      out.push_back({TokKind::op, std::string(1, c), i, i + 1});
      ++i;
    }
  }
  return out;
}

bool is_word(const Token& t, std::string_view w) { return t.kind == TokKind::word && t.text == w; }

struct StatementShape {
  std::size_t select_list_pos = 0;  // byte offset where the select list starts
  bool aggregate = false;
  std::optional<std::pair<std::size_t, std::size_t>> where_span;  // byte range of the WHERE predicate
};

StatementShape check_policy(std::string_view sql, const std::vector<Token>& toks) {
  static constexpr std::array<std::string_view, 21> kStatements = {
      "INSERT", "UPDATE", "DELETE",  "DROP",   "CREATE",   "ALTER",    "ATTACH",
      "DETACH", "PRAGMA", "REPLACE", "VACUUM", "REINDEX",  "ANALYZE",  "BEGIN",
      "COMMIT", "ROLLBACK", "SAVEPOINT", "RELEASE", "WITH", "EXPLAIN", "VALUES"};
  if (toks.empty()) throw SqlSyntaxError("empty statement", 0);
  for (const auto& t : toks) {
    if (t.kind == TokKind::semicolon) throw SqlPolicyError("only a single statement is allowed", t.pos);
  }
  const Token& first = toks.front();
  if (!is_word(first, "SELECT")) {
    if (first.kind == TokKind::word &&
        std::find(kStatements.begin(), kStatements.end(), first.text) != kStatements.end()) {
      throw SqlPolicyError("only SELECT statements are allowed, got " + first.text, first.pos);
    }
    throw SqlSyntaxError("expected SELECT near \"" + std::string(sql.substr(first.pos, first.end - first.pos)) +
                             "\"",
                         first.pos);
  }

  StatementShape shape;
  std::size_t i = 1;
  if (i < toks.size() && (is_word(toks[i], "DISTINCT") || is_word(toks[i], "ALL"))) ++i;
  shape.select_list_pos = i < toks.size() ? toks[i].pos : sql.size();

  static constexpr std::array<std::string_view, 7> kAggregates = {"COUNT", "SUM", "AVG", "MIN",
                                                                   "MAX", "TOTAL", "GROUP_CONCAT"};
  int depth = 0;
  bool in_select_list = true;
  std::optional<std::size_t> where_start;
  for (; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokKind::op && t.text == "(") {
      ++depth;
      continue;
    }
    if (t.kind == TokKind::op && t.text == ")") {
      --depth;
      continue;
    }
    if (in_select_list && t.kind == TokKind::word && i + 1 < toks.size() && toks[i + 1].text == "(" &&
        std::find(kAggregates.begin(), kAggregates.end(), t.text) != kAggregates.end()) {
      shape.aggregate = true;
    }
    if (depth != 0 || t.kind != TokKind::word) continue;
    if (t.text == "FROM") in_select_list = false;
    if (t.text == "UNION" || t.text == "INTERSECT" || t.text == "EXCEPT") {
      throw SqlPolicyError("compound SELECT is not supported", t.pos);
    }
    if (t.text == "GROUP" || t.text == "HAVING") shape.aggregate = true;
    if (t.text == "WHERE") {
      where_start = t.end;
    } else if (where_start && !shape.where_span &&
               (t.text == "GROUP" || t.text == "HAVING" || t.text == "ORDER" || t.text == "LIMIT" ||
                t.text == "WINDOW")) {
      shape.where_span = std::make_pair(*where_start, t.pos);
    }
  }
  if (where_start && !shape.where_span) shape.where_span = std::make_pair(*where_start, sql.size());
  return shape;
}

std::string_view strip_trailing_semicolons(std::string_view sql) {
  sql = detail::trim(sql);
  while (!sql.empty() && sql.back() == ';') sql = detail::trim(sql.substr(0, sql.size() - 1));
  return sql;
}

int authorizer(void*, int action, const char* arg1, const char*, const char*, const char*) {
  switch (action) {
    case SQLITE_SELECT: return SQLITE_OK;
    case SQLITE_READ: return (arg1 != nullptr && std::string_view(arg1) == "t") ? SQLITE_OK : SQLITE_DENY;
    case SQLITE_FUNCTION: {
      std::string name = arg1 ? lower(arg1) : "";
      if (name == "load_extension" || name == "readfile" || name == "writefile" || name == "edit" ||
          name == "fts3_tokenizer") {
        return SQLITE_DENY;
      }
      return SQLITE_OK;
    }
    default: return SQLITE_DENY;
  }
}

std::size_t locate(std::string_view sql, std::string_view fragment) {
  if (fragment.empty()) return SqlError::npos;
  auto pos = sql.find(fragment);
  if (pos != std::string_view::npos) return pos;
  auto lpos = lower(sql).find(lower(fragment));
  return lpos == std::string::npos ? SqlError::npos : lpos;
}

[[noreturn]] void raise_sqlite(int rc, const std::string& msg, std::string_view user_sql) {
  if (rc == SQLITE_INTERRUPT) throw SqlTimeout("statement exceeded the time limit");
  std::size_t pos = SqlError::npos;
  auto near = msg.find("near \"");
  if (near != std::string::npos) {
    auto close = msg.find('"', near + 6);
    if (close != std::string::npos) pos = locate(user_sql, msg.substr(near + 6, close - near - 6));
  } else if (auto colon = msg.rfind(": "); colon != std::string::npos) {
    pos = locate(user_sql, msg.substr(colon + 2));
  }
  if (msg.find("not authorized") != std::string::npos || rc == SQLITE_AUTH) {
    throw SqlPolicyError("statement touches something other than table t: " + msg, pos);
  }
  if (msg.find("syntax error") != std::string::npos || msg.find("incomplete input") != std::string::npos ||
      msg.find("unrecognized token") != std::string::npos) {
    throw SqlSyntaxError(msg, pos);
  }
  throw SqlSemanticError(msg, pos);
}

}  // namespace

// ---------------------------------------------------------------------------

struct SqlEngine::Impl {
  sqlite3* db = nullptr;
  SqlSchema schema;
  std::size_t rows = 0;
  std::chrono::milliseconds timeout{5000};
  std::chrono::steady_clock::time_point deadline;

  ~Impl() {
    if (db) sqlite3_close(db);
  }

  void exec(const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error("sqlite setup failed: " + msg);
    }
  }

  static int progress(void* self) {
    auto* impl = static_cast<Impl*>(self);
    return std::chrono::steady_clock::now() > impl->deadline ? 1 : 0;
  }
};

namespace {

std::string quote_ident(const std::string& name) { return "\"" + name + "\""; }

void bind_cell(sqlite3_stmt* stmt, int slot, Kind kind, const std::string& cell) {
  switch (kind) {
    case Kind::integer:
      if (auto canon = canonical_integer(cell)) {
        try {
          sqlite3_bind_int64(stmt, slot, std::stoll(*canon));
          return;
        } catch (const std::out_of_range&) {
          sqlite3_bind_double(stmt, slot, std::stod(*canon));
          return;
        }
      }
      sqlite3_bind_null(stmt, slot);
      return;
    case Kind::decimal:
      if (auto canon = canonical_decimal(cell)) {
        sqlite3_bind_double(stmt, slot, std::stod(*canon));
      } else {
        sqlite3_bind_null(stmt, slot);
      }
      return;
    case Kind::date:
      if (auto d = parse_date(cell)) {
        sqlite3_bind_text(stmt, slot, d->iso.c_str(), static_cast<int>(d->iso.size()), SQLITE_TRANSIENT);
      } else {
        sqlite3_bind_null(stmt, slot);
      }
      return;
    default:
      sqlite3_bind_text(stmt, slot, cell.c_str(), static_cast<int>(cell.size()), SQLITE_TRANSIENT);
      return;
  }
}

}  // namespace

SqlEngine::SqlEngine(const NormalizedTable& table, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
  impl_->schema = build_schema(table);
  impl_->rows = table.table.row_count();
  impl_->timeout = timeout;
  if (sqlite3_open_v2(":memory:", &impl_->db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_MEMORY, nullptr) !=
      SQLITE_OK) {
    throw Error("cannot open in-memory database");
  }
  sqlite3_db_config(impl_->db, SQLITE_DBCONFIG_ENABLE_LOAD_EXTENSION, 0, nullptr);
  sqlite3_db_config(impl_->db, SQLITE_DBCONFIG_DEFENSIVE, 1, nullptr);

  const auto& cols = impl_->schema.columns;
  std::string create = "CREATE TABLE t (" + quote_ident(impl_->schema.row_id_column) + " INTEGER";
  std::string insert = "INSERT INTO t VALUES (?";
  for (const auto& c : cols) {
    create += ", " + quote_ident(c.name) + " " + std::string(sql_type(c.kind));
    insert += ", ?";
  }
  create += ")";
  insert += ")";
  impl_->exec(create);
  impl_->exec("BEGIN");
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(impl_->db, insert.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    throw Error(std::string("sqlite setup failed: ") + sqlite3_errmsg(impl_->db));
  }
  for (std::size_t i = 0; i < table.table.row_count(); ++i) {
    sqlite3_reset(stmt);
    sqlite3_bind_int64(stmt, 1, static_cast<sqlite3_int64>(i));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      bind_cell(stmt, static_cast<int>(j + 2), cols[j].kind, table.table.cell(i, j));
    }
    if (sqlite3_step(stmt) != SQLITE_DONE) {
      std::string msg = sqlite3_errmsg(impl_->db);
      sqlite3_finalize(stmt);
      throw Error("sqlite load failed: " + msg);
    }
  }
  sqlite3_finalize(stmt);
  impl_->exec("COMMIT");
  sqlite3_set_authorizer(impl_->db, authorizer, nullptr);
  sqlite3_progress_handler(impl_->db, 1000, &Impl::progress, impl_.get());
}

SqlEngine::~SqlEngine() = default;
SqlEngine::SqlEngine(SqlEngine&&) noexcept = default;
SqlEngine& SqlEngine::operator=(SqlEngine&&) noexcept = default;

const SqlSchema& SqlEngine::schema() const { return impl_->schema; }
std::size_t SqlEngine::row_count() const { return impl_->rows; }

RowSet SqlEngine::execute(std::string_view raw_sql) {
  const std::string_view user_sql = strip_trailing_semicolons(raw_sql);
  const auto tokens = tokenize_sql(user_sql);
  const StatementShape shape = check_policy(user_sql, tokens);
  const std::string rid = quote_ident(impl_->schema.row_id_column);

  RowSet out;
  std::string statement;
  if (shape.aggregate) {
    statement = "SELECT " + rid + " FROM t";
    if (shape.where_span) {
      statement += " WHERE " + std::string(user_sql.substr(shape.where_span->first,
                                                           shape.where_span->second - shape.where_span->first));
    }
    out.aggregate_fallback = true;
    out.warnings.push_back("aggregate query; re-ran its WHERE clause to recover rows");
  } else {
    statement = std::string(user_sql.substr(0, shape.select_list_pos)) + rid + ", " +
                std::string(user_sql.substr(shape.select_list_pos));
  }
  out.sql = statement;

  sqlite3_stmt* stmt = nullptr;
  impl_->deadline = std::chrono::steady_clock::now() + impl_->timeout;
  int rc = sqlite3_prepare_v2(impl_->db, statement.c_str(), -1, &stmt, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = sqlite3_errmsg(impl_->db);
    sqlite3_finalize(stmt);
    raise_sqlite(rc, msg, user_sql);
  }
  std::vector<std::size_t> indices;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    if (sqlite3_column_type(stmt, 0) != SQLITE_INTEGER) continue;
    auto v = sqlite3_column_int64(stmt, 0);
    if (v >= 0 && static_cast<std::size_t>(v) < impl_->rows) indices.push_back(static_cast<std::size_t>(v));
  }
  if (rc != SQLITE_DONE) {
    std::string msg = sqlite3_errmsg(impl_->db);
    sqlite3_finalize(stmt);
    raise_sqlite(rc, msg, user_sql);
  }
  sqlite3_finalize(stmt);
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  out.indices = std::move(indices);
  if (out.indices.empty()) out.empty_reason = "no rows matched";
  return out;
}

RowSet execute_row_lookup(const NormalizedTable& table, std::string_view sql) {
  SqlEngine engine(table);
  return engine.execute(sql);
}

}  // namespace tablemaster
