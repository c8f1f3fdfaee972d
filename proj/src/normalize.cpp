#include "tablemaster/normalize.hpp"

#include <array>
#include <chrono>
#include <cstdio>

#include "text_util.hpp"

namespace tablemaster {

using detail::is_digit;
using detail::trim;

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::integer: return "integer";
    case Kind::decimal: return "decimal";
    case Kind::date: return "date";
    case Kind::text: return "text";
    case Kind::mixed: return "mixed";
  }
  return "text";
}

std::string_view to_string(OrientationValue value) {
  return value == OrientationValue::row_major ? "row_major" : "column_major";
}

namespace {

constexpr std::array<std::string_view, 5> kCurrency = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5",
                                                       "\xE2\x82\xB9"};  // $ € £ ¥ ₹

struct NumberParts {
  bool negative = false;
  std::string int_digits;
  std::optional<std::string> frac_digits;
};

std::optional<NumberParts> scan_number(std::string_view s) {
  s = trim(s);
  NumberParts parts;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    parts.negative = s.front() == '-';
    s.remove_prefix(1);
  }
  for (auto sym : kCurrency) {
    if (s.substr(0, sym.size()) == sym) {
      s.remove_prefix(sym.size());
      break;
    }
  }
  s = trim(s);
  std::size_t i = 0;
  std::size_t group_len = 0;
  bool grouped = false;
  bool first_group = true;
  while (i < s.size() && (is_digit(s[i]) || s[i] == ',')) {
    if (s[i] == ',') {
      if (group_len == 0 || (first_group && group_len > 3) || (!first_group && group_len != 3)) {
        return std::nullopt;
      }
      grouped = true;
      first_group = false;
      group_len = 0;
    } else {
      parts.int_digits += s[i];
      ++group_len;
    }
    ++i;
  }
  if (grouped && group_len != 3) return std::nullopt;
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::string frac;
    while (i < s.size() && is_digit(s[i])) frac += s[i++];
    if (frac.empty()) return std::nullopt;
    parts.frac_digits = frac;
  }
  if (i != s.size()) return std::nullopt;
  if (parts.int_digits.empty() && !parts.frac_digits) return std::nullopt;
  return parts;
}

std::string_view strip_ordinal(std::string_view s) {
  if (s.size() > 2) {
    auto tail = detail::lower(s.substr(s.size() - 2));
    if ((tail == "st" || tail == "nd" || tail == "rd" || tail == "th") && is_digit(s[s.size() - 3])) {
      s.remove_suffix(2);
    }
  }
  return s;
}

std::optional<int> month_from_name(std::string_view word) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  std::string w = detail::lower(word);
  if (!w.empty() && w.back() == '.') w.pop_back();
  if (w.size() < 3) return std::nullopt;
  if (w == "sept") return 9;
  for (std::size_t m = 0; m < kMonths.size(); ++m) {
    if (w == kMonths[m] || (w.size() == 3 && kMonths[m].substr(0, 3) == w)) {
      return static_cast<int>(m + 1);
    }
  }
  return std::nullopt;
}

std::optional<int> to_int(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (!is_digit(c)) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

std::optional<std::string> iso_date(int y, int m, int d) {
  using namespace std::chrono;
  if (y < 1 || y > 9999) return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return std::string(buf);
}

std::vector<std::string_view> tokenize_date(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (detail::is_space(s[i]) || s[i] == ',')) ++i;
    std::size_t start = i;
    while (i < s.size() && !detail::is_space(s[i]) && s[i] != ',') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

enum class CellType { empty, number, date, text };

CellType classify_cell(std::string_view cell) {
  if (trim(cell).empty()) return CellType::empty;
  if (scan_number(cell)) return CellType::number;
  if (parse_date(cell)) return CellType::date;
  return CellType::text;
}

// Fraction of body columns with >= 2 non-empty cells whose cells all share
// one primitive type. Columns with fewer cells carry no evidence.
double homogeneity(const Table& table) {
  std::size_t eligible = 0;
  std::size_t homogeneous = 0;
  for (std::size_t j = 0; j < table.column_count(); ++j) {
    std::optional<CellType> first;
    std::size_t filled = 0;
    bool same = true;
    for (const auto& row : table.rows()) {
      CellType t = classify_cell(row[j]);
      if (t == CellType::empty) continue;
      ++filled;
      if (!first) {
        first = t;
      } else if (*first != t) {
        same = false;
      }
    }
    if (filled < 2) continue;
    ++eligible;
    if (same) ++homogeneous;
  }
  return eligible == 0 ? 0.0 : static_cast<double>(homogeneous) / static_cast<double>(eligible);
}

}  // namespace

std::optional<std::string> canonical_integer(std::string_view cell) {
  auto parts = scan_number(cell);
  if (!parts || parts->frac_digits || parts->int_digits.empty()) return std::nullopt;
  return (parts->negative ? "-" : "") + parts->int_digits;
}

std::optional<std::string> canonical_decimal(std::string_view cell) {
  auto parts = scan_number(cell);
  if (!parts) return std::nullopt;
  std::string out = parts->negative ? "-" : "";
  out += parts->int_digits.empty() ? "0" : parts->int_digits;
  if (parts->frac_digits) out += "." + *parts->frac_digits;
  return out;
}

std::optional<ParsedDate> parse_date(std::string_view cell) {
  std::string_view s = trim(cell);
  if (s.empty() || s.size() > 40) return std::nullopt;

  // Numeric forms: Y-M-D, or A/B/Y with '/', '-' or '.' separators.
  for (char sep : {'-', '/', '.'}) {
    std::size_t p1 = s.find(sep);
    if (p1 == std::string_view::npos) continue;
    std::size_t p2 = s.find(sep, p1 + 1);
    if (p2 == std::string_view::npos || s.find(sep, p2 + 1) != std::string_view::npos) continue;
    auto a = to_int(s.substr(0, p1));
    auto b = to_int(s.substr(p1 + 1, p2 - p1 - 1));
    auto c = to_int(s.substr(p2 + 1));
    if (!a || !b || !c) return std::nullopt;
    if (p1 == 4) {
      if (auto iso = iso_date(*a, *b, *c)) return ParsedDate{*iso, false};
      return std::nullopt;
    }
    if (s.size() - p2 - 1 != 4) return std::nullopt;
    if (*a > 12) {
      if (auto iso = iso_date(*c, *b, *a)) return ParsedDate{*iso, false};
      return std::nullopt;
    }
    auto iso = iso_date(*c, *a, *b);
    if (!iso) return std::nullopt;
    bool ambiguous = *b <= 12 && *a != *b;
    return ParsedDate{*iso, ambiguous};
  }

  // Month-name forms: "Jan 5, 2020", "January 5th 2020", "5 January 2020".
  auto tokens = tokenize_date(s);
  if (tokens.size() != 3) return std::nullopt;
  auto year = to_int(tokens[2]);
  if (!year || tokens[2].size() != 4) return std::nullopt;
  if (auto m = month_from_name(tokens[0])) {
    if (auto d = to_int(strip_ordinal(tokens[1]))) {
      if (auto iso = iso_date(*year, *m, *d)) return ParsedDate{*iso, false};
    }
    return std::nullopt;
  }
  if (auto m = month_from_name(tokens[1])) {
    if (auto d = to_int(strip_ordinal(tokens[0]))) {
      if (auto iso = iso_date(*year, *m, *d)) return ParsedDate{*iso, false};
    }
  }
  return std::nullopt;
}

Orientation detect_orientation(const Table& table) {
  Orientation out;
  if (table.row_count() < 1 || table.column_count() < 2) return out;
  out.row_major_score = homogeneity(table);
  out.column_major_score = homogeneity(transpose(table));
  if (out.column_major_score > out.row_major_score) out.value = OrientationValue::column_major;
  out.confidence = 0.5 + std::abs(out.row_major_score - out.column_major_score) / 2.0;
  return out;
}

ColumnKind infer_column_kind(const std::vector<std::string>& cells) {
  std::size_t total = 0;
  std::size_t integers = 0;
  std::size_t numbers = 0;
  std::size_t dates = 0;
  for (const auto& c : cells) {
    if (trim(c).empty()) continue;
    ++total;
    if (auto parts = scan_number(c)) {
      ++numbers;
      if (!parts->frac_digits && !parts->int_digits.empty()) ++integers;
    } else if (parse_date(c)) {
      ++dates;
    }
  }
  if (total == 0) return {Kind::text, 0.0};
  const double n = static_cast<double>(total);
  // Tie order integer > decimal > date.
  const std::array<std::pair<Kind, double>, 3> ranked = {
      std::pair{Kind::integer, integers / n}, std::pair{Kind::decimal, numbers / n},
      std::pair{Kind::date, dates / n}};
  auto best = ranked[0];
  for (const auto& r : ranked) {
    if (r.second > best.second) best = r;
  }
  if (best.second >= 0.8) return {best.first, best.second};
  if (best.second >= 0.5) return {Kind::mixed, best.second};
  return {Kind::text, best.second};
}

namespace {

NormalizedTable canonicalize(const Table& table, bool transposed) {
  std::vector<Row> rows = table.rows();
  std::vector<ColumnKind> kinds;
  std::vector<std::vector<std::string>> provenance(table.column_count());
  for (std::size_t j = 0; j < table.column_count(); ++j) {
    ColumnKind kind = infer_column_kind(table.column(j));
    kinds.push_back(kind);
    auto& prov = provenance[j];
    if (kind.kind != Kind::integer && kind.kind != Kind::decimal && kind.kind != Kind::date) continue;
    bool changed = false;
    bool ambiguous = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::string& cell = rows[i][j];
      if (trim(cell).empty()) continue;
      std::optional<std::string> canon;
      if (kind.kind == Kind::date) {
        if (auto d = parse_date(cell)) {
          canon = d->iso;
          ambiguous = ambiguous || d->ambiguous;
        }
      } else {
        // A decimal column may hold integer cells; both share the decimal spelling.
        canon = kind.kind == Kind::integer ? canonical_integer(cell) : canonical_decimal(cell);
      }
      if (!canon) {
        prov.push_back("unparsed:row " + std::to_string(i + 1));
        continue;
      }
      if (*canon != cell) {
        cell = *canon;
        changed = true;
      }
    }
    if (changed) {
      prov.insert(prov.begin(), kind.kind == Kind::date ? "date_to_iso" : "numeric_canonical");
    }
    if (ambiguous) prov.insert(prov.begin(), "ambiguous_day_month_resolved_as_mdy");
  }
  return NormalizedTable{Table(table.headers(), std::move(rows), table.name()), std::move(kinds),
                         transposed, std::move(provenance)};
}

}  // namespace

NormalizedTable normalize(const Table& table) {
  Orientation o = detect_orientation(table);
  if (o.value == OrientationValue::column_major) return canonicalize(transpose(table), true);
  return canonicalize(table, false);
}

NormalizedTable classify_only(const Table& table) {
  std::vector<ColumnKind> kinds;
  for (std::size_t j = 0; j < table.column_count(); ++j) kinds.push_back(infer_column_kind(table.column(j)));
  return NormalizedTable{table, std::move(kinds), false,
                         std::vector<std::vector<std::string>>(table.column_count())};
}

}  // namespace tablemaster
