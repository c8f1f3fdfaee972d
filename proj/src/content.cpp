#include "tablemaster/content.hpp"

#include <algorithm>
#include <deque>

#include "tablemaster/hash.hpp"
#include "text_util.hpp"

namespace tablemaster {

std::string focus_hash(const TableOfFocus& focus) { return sha256_hex(render_markdown(focus.table)); }

SufficiencyVerdict estimate_information(const TableOfFocus& focus, const std::string& question, LmSession& lm) {
  auto reply = lm.try_complete(TemplateId::information_estimation,
                               {{"table", render_markdown(focus.table)}, {"question", question}});
  if (!reply) return {true, ""};
  try {
    return {parse_bool(reply->text), reply->text};
  } catch (const UnparseableReply&) {
    lm.warn("UnparseableReply: sufficiency verdict unclear; assuming sufficient");
    return {true, reply->text};
  }
}

TableOfFocus reconstruct_focus(const NormalizedTable& table, const std::string& question, const RowSet& rows,
                               const std::vector<std::string>& initial_columns, const RankedColumns& ranked,
                               LmSession& lm) {
  std::deque<std::string> candidates;
  for (const auto& c : ranked.order) {
    if (std::find(initial_columns.begin(), initial_columns.end(), c) == initial_columns.end()) {
      candidates.push_back(c);
    }
  }
  std::vector<std::string> columns = initial_columns;
  std::size_t estimations = 0;
  while (true) {
    TableOfFocus focus = construct_focus(table, rows, columns);
    SufficiencyVerdict verdict = estimate_information(focus, question, lm);
    ++estimations;
    if (verdict.sufficient || candidates.empty()) {
      focus.initial_column_count = initial_columns.size();
      focus.reconstruction_count = columns.size() - initial_columns.size();
      focus.estimations = estimations;
      return focus;
    }
    columns.push_back(candidates.front());
    candidates.pop_front();
  }
}

std::string mechanical_verbalization(const Table& table) {
  if (table.row_count() == 0) {
    return "The table has columns " + detail::join(table.headers(), ", ") + " and no rows.";
  }
  std::string out;
  for (std::size_t i = 0; i < table.row_count(); ++i) {
    if (i) out += ' ';
    out += "Row " + std::to_string(i + 1) + ": ";
    for (std::size_t j = 0; j < table.column_count(); ++j) {
      if (j) out += "; ";
      out += table.headers()[j] + "=" + table.cell(i, j);
    }
    out += '.';
  }
  return out;
}

VerbalizedTable verbalize(const TableOfFocus& focus, LmSession& lm) {
  VerbalizedTable out;
  out.source_focus_hash = focus_hash(focus);
  auto reply = lm.try_complete(TemplateId::verbalization, {{"table", render_markdown(focus.table)}});
  if (reply && !detail::trim(reply->text).empty()) {
    out.text = reply->text;
    return out;
  }
  lm.warn("empty verbalization; using mechanical description");
  out.text = mechanical_verbalization(focus.table);
  out.mechanical = true;
  return out;
}

}  // namespace tablemaster
