#include "properties.hpp"

#include <algorithm>
#include <functional>

#include "tablemaster/evaluation.hpp"
#include "tablemaster/lm.hpp"
#include "tablemaster/normalize.hpp"
#include "test_support.hpp"

namespace tmtest {

using namespace tablemaster;

namespace {

PropertyResult run_property(const std::string& name, std::uint64_t seed, std::size_t cases,
                            const std::function<std::optional<std::string>(Rng&)>& body) {
  PropertyResult r{name, 0, 0, {}};
  Rng rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++r.cases;
    std::optional<std::string> problem;
    try {
      problem = body(rng);
    } catch (const std::exception& e) {
      problem = std::string("threw: ") + e.what();
    }
    if (problem) {
      if (r.failures == 0) r.first_failure = "case " + std::to_string(i) + ": " + *problem;
      ++r.failures;
    }
  }
  return r;
}

std::string ascii_word(Rng& rng, std::size_t lo = 1, std::size_t hi = 8) {
  std::string s;
  for (std::size_t i = 0, n = uniform(rng, lo, hi); i < n; ++i) s += static_cast<char>('a' + uniform(rng, 0, 25));
  return s;
}

std::string with_commas(const std::string& digits) {
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

const char* kMonths[] = {"January", "February", "March",     "April",   "May",      "June",
                         "July",    "August",   "September", "October", "November", "December"};

// Typed cells in assorted spellings, so normalization has real work to do.
std::string typed_cell(Rng& rng, int kind) {
  switch (kind) {
    case 0: {
      std::string d = std::to_string(uniform(rng, 0, 9999999));
      return coin(rng) ? with_commas(d) : d;
    }
    case 1: return (coin(rng, 0.3) ? "$" : "") + std::to_string(uniform(rng, 0, 9999)) + "." +
                   std::to_string(uniform(rng, 10, 99));
    case 2: {
      int y = static_cast<int>(uniform(rng, 1950, 2030));
      int m = static_cast<int>(uniform(rng, 1, 12));
      int d = static_cast<int>(uniform(rng, 13, 28));
      switch (uniform(rng, 0, 2)) {
        case 0: return std::string(kMonths[m - 1]) + " " + std::to_string(d) + ", " + std::to_string(y);
        case 1: return std::to_string(d) + " " + kMonths[m - 1] + " " + std::to_string(y);
        default: {
          char buf[16];
          std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
          return buf;
        }
      }
    }
    default: return ascii_word(rng) + (coin(rng) ? " " + ascii_word(rng) : "");
  }
}

Table typed_table(Rng& rng) {
  std::size_t cols = uniform(rng, 1, 6);
  std::size_t rows = uniform(rng, 0, 12);
  std::vector<std::string> headers;
  std::vector<int> kinds;
  for (std::size_t j = 0; j < cols; ++j) {
    headers.push_back(ascii_word(rng, 3, 8) + std::to_string(j));
    kinds.push_back(static_cast<int>(uniform(rng, 0, 3)));
  }
  std::vector<Row> body;
  for (std::size_t i = 0; i < rows; ++i) {
    Row r;
    for (std::size_t j = 0; j < cols; ++j) {
      if (coin(rng, 0.05)) {
        r.push_back(coin(rng) ? "" : ascii_word(rng));
      } else {
        r.push_back(typed_cell(rng, kinds[j]));
      }
    }
    body.push_back(std::move(r));
  }
  Table t(std::move(headers), std::move(body));
  if (t.row_count() >= 1 && t.column_count() >= 2 && coin(rng, 0.25)) return transpose(t);
  return t;
}

std::string describe(const Table& t) { return render_markdown(t); }

}  // namespace

PropertyResult check_transpose_involution(std::uint64_t seed, std::size_t cases) {
  return run_property("transpose involution", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    Table t = random_table(rng, 10, 7, 2);
    if (t.row_count() == 0) t = Table(t.headers(), {Row(t.column_count(), "v")});
    Table back = transpose(transpose(t));
    if (back != t) return "transpose(transpose(T)) != T for\n" + describe(t);
    Table once = transpose(t);
    if (once.column_count() != t.row_count() + 1 || once.row_count() != t.column_count() - 1) {
      return std::string("transpose has the wrong shape");
    }
    return std::nullopt;
  });
}

PropertyResult check_peek(std::uint64_t seed, std::size_t cases) {
  return run_property("peek identity/idempotence", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    Table t = random_table(rng, 40, 5);
    const std::size_t m = t.row_count();
    const std::size_t k1 = uniform(rng, 0, 45), k2 = uniform(rng, 0, 45);
    if (peek(t, m) != t || peek(t, m + uniform(rng, 0, 10)) != t) return std::string("peek(T, >=m) != T");
    if (peek(peek(t, k1), k2) != peek(t, std::min(k1, k2))) return std::string("peek does not compose");
    if (peek(peek(t, k1), k1) != peek(t, k1)) return std::string("peek not idempotent");
    Table p = peek(t, k1);
    if (p.headers() != t.headers() || p.row_count() != std::min(k1, m)) return std::string("peek shape");
    for (std::size_t i = 0; i < p.row_count(); ++i) {
      if (p.rows()[i] != t.rows()[i]) return std::string("peek is not a prefix");
    }
    return std::nullopt;
  });
}

PropertyResult check_project(std::uint64_t seed, std::size_t cases) {
  return run_property("project identity/composition", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    Table t = random_table(rng, 12, 6);
    if (project(t, CellSelection::all(t)) != t) return std::string("identity selection changed the table");
    auto subset = [&](std::size_t n) {
      std::vector<std::size_t> out;
      for (std::size_t i = 0; i < n; ++i) {
        if (coin(rng, 0.6)) out.push_back(i);
      }
      return out;
    };
    CellSelection s1{subset(t.row_count()), subset(t.column_count())};
    if (s1.column_indices.empty()) s1.column_indices.push_back(0);
    Table p1 = project(t, s1);
    CellSelection s2{subset(p1.row_count()), subset(p1.column_count())};
    if (s2.column_indices.empty()) s2.column_indices.push_back(0);
    CellSelection composed;
    for (auto i : s2.row_indices) composed.row_indices.push_back(s1.row_indices[i]);
    for (auto j : s2.column_indices) composed.column_indices.push_back(s1.column_indices[j]);
    if (project(p1, s2) != project(t, composed)) return std::string("project does not compose");
    return std::nullopt;
  });
}

PropertyResult check_markdown_round_trip(std::uint64_t seed, std::size_t cases) {
  return run_property("markdown round trip", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    Table t = typed_table(rng);
    for (std::size_t i = 0; i < 3; ++i) {
      Table r = random_table(rng, 6, 4);
      bool clean = true;
      auto ok = [](const std::string& c) {
        return c.find('|') == std::string::npos && c.find('\n') == std::string::npos && !c.empty() &&
               c.front() != ' ' && c.back() != ' ';
      };
      for (const auto& h : r.headers()) clean = clean && ok(h);
      for (const auto& row : r.rows()) {
        for (const auto& c : row) clean = clean && ok(c);
      }
      if (clean) {
        t = r;
        break;
      }
    }
    Table back = parse_table(render_markdown(t), TableFormat::markdown, true);
    if (back != t) return "markdown round trip failed for\n" + describe(t);
    Table csv = parse_table(render_csv(t), TableFormat::csv, true);
    if (csv != t) return "csv round trip failed for\n" + describe(t);
    return std::nullopt;
  });
}

PropertyResult check_normalize_idempotent(std::uint64_t seed, std::size_t cases) {
  return run_property("normalize idempotence", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    Table t = coin(rng) ? typed_table(rng) : random_table(rng, 10, 6);
    NormalizedTable once = normalize(t);
    NormalizedTable twice = normalize(once.table);
    if (twice.table != once.table) {
      return "normalize not idempotent\ninput:\n" + describe(t) + "once:\n" + describe(once.table) + "twice:\n" +
             describe(twice.table);
    }
    if (twice.transposed) return std::string("second pass transposed again");
    std::size_t in_cells = t.row_count() * t.column_count() + t.column_count();
    std::size_t out_cells = once.table.row_count() * once.table.column_count() + once.table.column_count();
    if (in_cells != out_cells) return std::string("normalize added or dropped cells");
    return std::nullopt;
  });
}

PropertyResult check_orientation_flip(std::uint64_t seed, std::size_t cases) {
  return run_property("orientation flips under transpose", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    Table t = typed_table(rng);
    if (t.row_count() == 0 || t.column_count() < 2) return std::nullopt;
    Orientation a = detect_orientation(t);
    Orientation b = detect_orientation(transpose(t));
    if (a.confidence >= 0.75 && b.confidence >= 0.75 && a.value == b.value) {
      return "both orientations confidently " + std::string(to_string(a.value)) + "\n" + describe(t);
    }
    return std::nullopt;
  });
}

PropertyResult check_exact_match_table(std::uint64_t seed, std::size_t cases) {
  return run_property("exact_match normalization table", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    // A canonical answer and a surface variant that normalization must erase.
    std::string base;
    bool integer = false;
    switch (uniform(rng, 0, 2)) {
      case 0: base = ascii_word(rng) + (coin(rng) ? " " + ascii_word(rng) : ""); break;
      case 1: base = std::to_string(uniform(rng, 0, 99999999)); integer = true; break;
      default: base = std::to_string(uniform(rng, 0, 9999)) + "." + std::to_string(uniform(rng, 1, 9)); break;
    }
    std::string v = base;
    if (integer && coin(rng)) v = with_commas(v);
    if (integer && coin(rng, 0.3)) v += ".0";
    if (coin(rng)) {
      for (auto& c : v) {
        if (coin(rng)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
    }
    if (coin(rng, 0.3)) {
      auto sp = v.find(' ');
      if (sp != std::string::npos) v.insert(sp, "  ");
    }
    if (coin(rng, 0.3)) v = "\"" + v + "\"";
    if (coin(rng, 0.3)) v += ".";
    if (coin(rng, 0.5)) v = std::string(uniform(rng, 1, 3), ' ') + v + std::string(uniform(rng, 0, 3), ' ');

    const std::string nb = normalize_answer(base), nv = normalize_answer(v);
    if (nv != nb) return "normalize_answer('" + v + "') = '" + nv + "', expected '" + nb + "'";
    if (normalize_answer(nv) != nv) return "normalize_answer not idempotent on '" + v + "'";
    if (!exact_match(v, {base}) || !exact_match(base, {v})) return "variant '" + v + "' does not match '" + base + "'";
    // Beyond the relative tolerance, so it must never match.
    std::string other = integer ? std::to_string(std::stoull(base) * 2 + 1) : base + "x";
    if (exact_match(v, {other}) != exact_match(other, {v})) return std::string("exact_match not symmetric");
    if (exact_match(v, {other})) return "'" + v + "' matched a different answer '" + other + "'";
    return std::nullopt;
  });
}

PropertyResult check_parsers_total(std::uint64_t seed, std::size_t cases) {
  return run_property("reply parsers total", seed, cases, [](Rng& rng) -> std::optional<std::string> {
    static const std::vector<std::string> pieces = {"yes", "No", "```", "```python\n", "\n", "|", ",", "symbolic",
                                                    "textual", "Country", "  ", "key column:", "\"", "1.", "ü", "-"};
    std::string reply;
    for (std::size_t i = 0, n = uniform(rng, 0, 12); i < n; ++i) reply += pick(rng, pieces);
    auto guarded = [&](auto&& fn) -> std::optional<std::string> {
      try {
        fn();
      } catch (const UnparseableReply&) {
      } catch (const std::exception& e) {
        return "parser threw outside the error channel on '" + reply + "': " + e.what();
      }
      return std::nullopt;
    };
    if (auto p = guarded([&] { parse_bool(reply); })) return p;
    if (auto p = guarded([&] { parse_choice(reply, {"textual", "symbolic"}); })) return p;
    if (auto p = guarded([&] { parse_delimited_list(reply, std::vector<std::string>{"Country", "Wins"}); })) return p;
    if (auto p = guarded([&] { parse_delimited_list(reply); })) return p;
    if (auto p = guarded([&] { extract_code_block(reply); })) return p;
    return std::nullopt;
  });
}

}  // namespace tmtest
