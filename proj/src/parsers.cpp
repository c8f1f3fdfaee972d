#include <algorithm>
#include <limits>

#include "tablemaster/lm.hpp"
#include "text_util.hpp"

namespace tablemaster {

using detail::lower;
using detail::trim;

namespace {

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (detail::is_alnum(c) || c == '\'') {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool contains(std::initializer_list<std::string_view> set, std::string_view w) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

}  // namespace

bool parse_bool(std::string_view reply) {
  auto ws = words(reply);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto& w = ws[i];
    if (contains({"yes", "true", "sufficient"}, w)) {
      bool negated = i > 0 && contains({"not", "never", "isn't", "aren't", "cannot"}, ws[i - 1]);
      return !negated;
    }
    if (contains({"no", "false", "insufficient"}, w)) return false;
  }
  throw UnparseableReply("reply has no yes/no verdict", std::string(reply));
}

std::string parse_choice(std::string_view reply, const std::vector<std::string>& options,
                         const std::map<std::string, std::string>& synonyms) {
  if (options.size() < 2) throw std::invalid_argument("parse_choice needs at least two options");
  const std::string hay = lower(reply);
  auto earliest = [&](const std::vector<std::pair<std::string, std::string>>& needles)
      -> std::optional<std::string> {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::optional<std::string> label;
    for (const auto& [needle, target] : needles) {
      std::size_t pos = detail::find_word(hay, lower(needle));
      if (pos != std::string::npos && pos < best) {
        best = pos;
        label = target;
      }
    }
    return label;
  };
  std::vector<std::pair<std::string, std::string>> labels;
  for (const auto& o : options) labels.emplace_back(o, o);
  if (auto hit = earliest(labels)) return *hit;
  std::vector<std::pair<std::string, std::string>> syn;
  for (const auto& [word, target] : synonyms) {
    if (std::find(options.begin(), options.end(), target) != options.end()) syn.emplace_back(word, target);
  }
  if (auto hit = earliest(syn)) return *hit;
  throw UnparseableReply("reply names none of the options", std::string(reply));
}

namespace {

std::string clean_item(std::string_view item) {
  item = trim(item);
  if (item.size() >= 2 && (item[0] == '-' || item[0] == '*') && item[1] == ' ') item.remove_prefix(2);
  if (item.substr(0, 3) == "\xE2\x80\xA2") item.remove_prefix(3);  // bullet
  std::size_t digits = 0;
  while (digits < item.size() && detail::is_digit(item[digits])) ++digits;
  if (digits > 0 && digits + 1 < item.size() && (item[digits] == '.' || item[digits] == ')') &&
      item[digits + 1] == ' ') {
    item.remove_prefix(digits + 2);
  }
  item = trim(item);
  while (item.size() >= 2) {
    char f = item.front(), b = item.back();
    bool paired = (f == b && (f == '"' || f == '\'' || f == '`')) || (f == '[' && b == ']');
    if (!paired) break;
    item = trim(item.substr(1, item.size() - 2));
  }
  return std::string(item);
}

std::optional<std::string> match_universe(const std::string& item,
                                          const std::vector<std::string>& universe) {
  for (const auto& u : universe) {
    if (u == item) return u;
  }
  std::string li = lower(item);
  for (const auto& u : universe) {
    if (lower(u) == li) return u;
  }
  return std::nullopt;
}

}  // namespace

DelimitedList parse_delimited_list(std::string_view reply,
                                   const std::optional<std::vector<std::string>>& universe) {
  DelimitedList out;
  std::string cur;
  auto flush = [&] {
    std::string item = clean_item(cur);
    cur.clear();
    if (item.empty()) return;
    if (!universe) {
      out.items.push_back(std::move(item));
      return;
    }
    auto hit = match_universe(item, *universe);
    if (!hit) {
      // "Columns: Country" style prefixes.
      auto colon = item.rfind(':');
      if (colon != std::string::npos) hit = match_universe(clean_item(item.substr(colon + 1)), *universe);
    }
    if (hit) {
      out.items.push_back(*hit);
    } else {
      out.dropped.push_back(std::move(item));
    }
  };
  for (char c : reply) {
    if (c == '\n' || c == ',' || c == '|') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  if (out.items.empty()) throw EmptyList("reply contains no usable list items", std::string(reply));
  return out;
}

std::string extract_code_block(std::string_view reply) {
  std::size_t open = reply.find("```");
  if (open == std::string_view::npos) return std::string(trim(reply));
  std::string_view rest = reply.substr(open + 3);
  std::size_t close = rest.find("```");
  std::string_view body = close == std::string_view::npos ? rest : rest.substr(0, close);
  std::size_t nl = body.find('\n');
  if (nl != std::string_view::npos) {
    std::string_view tag = trim(body.substr(0, nl));
    bool is_tag = std::all_of(tag.begin(), tag.end(), [](char c) {
      return detail::is_alnum(c) || c == '_' || c == '+' || c == '-' || c == '.';
    });
    if (is_tag) body.remove_prefix(nl + 1);
  }
  // Strip blank lines around the body but keep indentation of the first line.
  while (!body.empty() && (body.front() == '\n' || body.front() == '\r')) body.remove_prefix(1);
  while (!body.empty() && detail::is_space(body.back())) body.remove_suffix(1);
  return std::string(body);
}

}  // namespace tablemaster
