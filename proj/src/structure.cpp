#include "tablemaster/structure.hpp"

#include <algorithm>

#include "text_util.hpp"

namespace tablemaster {

namespace {

std::string header_list(const std::vector<std::string>& headers) { return detail::join(headers, ", "); }

}  // namespace

StructureInfo extract_structure(const NormalizedTable& table, std::size_t k, LmSession& lm) {
  const Table peeked = peek(table.table, std::max<std::size_t>(k, 1));
  StructureInfo info;
  info.headers = table.table.headers();
  info.peek_used = peeked.row_count();
  info.key_column = info.headers.front();

  auto reply = lm.try_complete(TemplateId::structure_extraction, {{"table", render_markdown(peeked)}});
  if (!reply) {
    lm.warn("key column unavailable; using first header");
    return info;
  }
  // Prefer an explicit "key column: X" line, else the first header named anywhere.
  std::string text = reply->text;
  std::string lowered = detail::lower(text);
  std::optional<std::string> key;
  const auto marker = lowered.find("key column");
  if (auto pos = marker; pos != std::string::npos) {
    std::string_view rest = std::string_view(text).substr(pos + 10);
    auto colon = rest.find_first_of(":=");
    if (colon != std::string_view::npos) rest.remove_prefix(colon + 1);
    auto nl = rest.find('\n');
    std::string candidate(detail::trim(rest.substr(0, nl)));
    try {
      auto parsed = parse_delimited_list(candidate, info.headers);
      key = parsed.items.front();
    } catch (const EmptyList&) {
    }
  }
  if (!key && marker == std::string::npos) {
    std::size_t best = std::string::npos;
    for (const auto& h : info.headers) {
      auto pos = detail::find_word(lowered, detail::lower(h));
      if (pos != std::string::npos && pos < best) {
        best = pos;
        key = h;
      }
    }
  }
  if (key) {
    info.key_column = *key;
  } else {
    lm.warn("KeyColumnInvalid: reply names no existing header; using first header");
  }
  return info;
}

RankedColumns rank_columns(const NormalizedTable& table, const std::string& question, std::size_t k,
                           LmSession& lm) {
  const auto& headers = table.table.headers();
  RankedColumns ranked;
  auto reply = lm.try_complete(TemplateId::column_ranking,
                               {{"table", render_markdown(peek(table.table, std::max<std::size_t>(k, 1)))},
                                {"headers", header_list(headers)},
                                {"question", question}});
  std::vector<std::string> parsed;
  if (reply) {
    try {
      auto list = parse_delimited_list(reply->text, headers);
      parsed = std::move(list.items);
      if (!list.dropped.empty()) lm.warn("ranking named unknown columns: " + detail::join(list.dropped, ", "));
    } catch (const EmptyList&) {
      lm.warn("EmptyList: column ranking unparseable; keeping original order");
    }
  }
  for (const auto& name : parsed) {
    if (std::find(ranked.order.begin(), ranked.order.end(), name) == ranked.order.end()) {
      ranked.order.push_back(name);
    }
  }
  for (const auto& h : headers) {
    if (std::find(ranked.order.begin(), ranked.order.end(), h) == ranked.order.end()) ranked.order.push_back(h);
  }
  return ranked;
}

std::vector<std::string> column_lookup(const RankedColumns& ranked, const std::string& question,
                                       std::size_t b_max, LmSession& lm,
                                       const std::optional<std::string>& key_column) {
  b_max = std::max<std::size_t>(b_max, 1);
  std::vector<std::string> selected;
  auto reply = lm.try_complete(TemplateId::column_lookup,
                               {{"headers", header_list(ranked.order)},
                                {"question", question},
                                {"max_columns", std::to_string(b_max)}});
  if (reply) {
    try {
      auto list = parse_delimited_list(reply->text, ranked.order);
      for (const auto& c : list.items) {
        if (std::find(selected.begin(), selected.end(), c) == selected.end()) selected.push_back(c);
      }
      if (!list.dropped.empty()) lm.warn("lookup named unknown columns: " + detail::join(list.dropped, ", "));
    } catch (const EmptyList&) {
      lm.warn("EmptyList: column lookup unparseable; using top-ranked column");
    }
  }
  if (selected.size() > b_max) {
    lm.warn("column lookup selected " + std::to_string(selected.size()) + " columns; capped at " +
            std::to_string(b_max));
    selected.resize(b_max);
  }
  if (selected.empty()) selected.push_back(ranked.order.front());
  if (key_column && std::find(selected.begin(), selected.end(), *key_column) == selected.end()) {
    selected.push_back(*key_column);
  }
  return selected;
}

RowSet row_lookup(const NormalizedTable& table, const std::string& question, std::size_t k, LmSession& lm,
                  SqlEngine& engine) {
  const std::size_t m = table.table.row_count();
  auto reply = lm.try_complete(
      TemplateId::row_lookup_sql,
      {{"table", render_markdown(peek(table.table, std::max<std::size_t>(k, 1)))},
       {"schema", engine.schema().describe()},
       {"question", question}});
  if (!reply) return RowSet::all_rows(m, "row lookup unavailable; using all rows");

  const std::string sql = extract_code_block(reply->text);
  try {
    RowSet rows = engine.execute(sql);
    if (rows.aggregate_fallback) {
      lm.warn("aggregate-only row lookup query; using all rows");
      RowSet all = RowSet::all_rows(m, "aggregate query; using all rows");
      all.sql = rows.sql;
      all.aggregate_fallback = true;
      return all;
    }
    return rows;
  } catch (const SqlPolicyError& e) {
    lm.warn(std::string("SqlPolicyError: ") + e.what() + "; using all rows");
    return RowSet::all_rows(m, std::string("policy violation: ") + e.what());
  } catch (const SqlTimeout& e) {
    lm.warn(std::string("SqlTimeout: ") + e.what() + "; using all rows");
    return RowSet::all_rows(m, std::string("timeout: ") + e.what());
  } catch (const SqlSyntaxError& e) {
    lm.warn(std::string("SqlSyntaxError: ") + e.what() + "; using all rows");
    return RowSet::all_rows(m, std::string("syntax error: ") + e.what());
  } catch (const SqlError& e) {
    lm.warn(std::string("SqlSemanticError: ") + e.what() + "; using all rows");
    return RowSet::all_rows(m, std::string("semantic error: ") + e.what());
  }
}

double condensation_ratio(const Table& focus, const Table& full) {
  const double full_area = static_cast<double>(full.row_count() * full.column_count());
  if (full_area == 0.0) return 1.0;
  return static_cast<double>(focus.row_count() * focus.column_count()) / full_area;
}

TableOfFocus construct_focus(const NormalizedTable& table, const RowSet& rows,
                             const std::vector<std::string>& columns) {
  if (columns.empty()) throw IndexError("focus needs at least one column");
  CellSelection sel;
  sel.row_indices = rows.indices;
  for (const auto& c : columns) {
    auto j = table.table.column_index(c);
    if (!j) throw IndexError("unknown column '" + c + "'");
    sel.column_indices.push_back(*j);
  }
  std::sort(sel.column_indices.begin(), sel.column_indices.end());
  sel.column_indices.erase(std::unique(sel.column_indices.begin(), sel.column_indices.end()),
                           sel.column_indices.end());
  Table focus_table = project(table.table, sel);
  const double ratio = condensation_ratio(focus_table, table.table);
  TableOfFocus focus{std::move(focus_table), rows, columns, columns.size(), 0, 0, ratio};
  return focus;
}

}  // namespace tablemaster
