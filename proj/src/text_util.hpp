#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace tablemaster::detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Case-insensitive search for `needle` bounded by non-alphanumerics on both
// sides. Returns npos when absent.
inline std::size_t find_word(std::string_view haystack_lower, std::string_view needle_lower,
                             std::size_t from = 0) {
  while (true) {
    std::size_t pos = haystack_lower.find(needle_lower, from);
    if (pos == std::string_view::npos) return pos;
    bool left_ok = pos == 0 || !is_alnum(haystack_lower[pos - 1]);
    std::size_t end = pos + needle_lower.size();
    bool right_ok = end >= haystack_lower.size() || !is_alnum(haystack_lower[end]);
    if (left_ok && right_ok) return pos;
    from = pos + 1;
  }
}

}  // namespace tablemaster::detail
