#include "tablemaster/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace tablemaster {

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto v = detail::trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

bool parse_flag(std::string_view key, std::string_view value) {
  std::string v = detail::lower(detail::trim(value));
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid on/off value for " + std::string(key) + ": '" + std::string(value) + "'");
}

std::vector<std::string> split_words(std::string_view value) {
  std::istringstream in{std::string(value)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view raw) {
  const std::string value(detail::trim(raw));
  if (key == "peek_size") {
    peek_size = parse_number<std::size_t>(key, value);
  } else if (key == "b_max") {
    b_max = parse_number<std::size_t>(key, value);
  } else if (key == "mode") {
    try {
      mode = parse_cassette_mode(value);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "cassette") {
    cassette_path = value;
  } else if (key == "normalization") {
    normalization = parse_flag(key, value);
  } else if (key == "full_table_fallback") {
    full_table_fallback = parse_flag(key, value);
  } else if (key == "reasoning_table") {
    reasoning_table = parse_reasoning_table(value);
  } else if (key == "template_dir") {
    template_dir = value;
  } else if (key == "sql_timeout_ms") {
    sql_timeout = std::chrono::milliseconds(parse_number<long>(key, value));
  } else if (key == "max_tokens") {
    max_tokens = parse_number<int>(key, value);
  } else if (key == "parallelism") {
    parallelism = parse_number<std::size_t>(key, value);
  } else if (key == "executor.interpreter") {
    executor.interpreter = split_words(value);
  } else if (key == "executor.extension") {
    executor.extension = value;
  } else if (key == "executor.timeout_ms") {
    executor.timeout = std::chrono::milliseconds(parse_number<long>(key, value));
  } else if (key == "executor.memory_mb") {
    executor.memory_mb = parse_number<std::size_t>(key, value);
  } else if (key == "executor.max_parallel") {
    executor.max_parallel = parse_number<std::size_t>(key, value);
  } else if (key == "executor.scratch_root") {
    executor.scratch_root = value;
  } else if (key == "http.base_url") {
    http.base_url = value;
  } else if (key == "http.model") {
    http.model = value;
  } else if (key == "http.api_key_env") {
    http.api_key_env = value;
  } else if (key == "http.timeout_seconds") {
    http.timeout_seconds = parse_number<int>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void PipelineConfig::validate() const {
  if (peek_size < 1) throw ConfigError("peek_size must be at least 1");
  if (b_max < 1) throw ConfigError("b_max must be at least 1");
  if (mode != CassetteMode::passthrough && cassette_path.empty()) {
    throw ConfigError(std::string(to_string(mode)) + " mode requires a cassette path");
  }
  if (executor.interpreter.empty()) throw ConfigError("executor.interpreter is empty");
  if (executor.timeout.count() <= 0) throw ConfigError("executor.timeout_ms must be positive");
  if (sql_timeout.count() <= 0) throw ConfigError("sql_timeout_ms must be positive");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
}

nlohmann::json PipelineConfig::snapshot() const {
  std::string interpreter = detail::join(executor.interpreter, " ");
  return {{"peek_size", peek_size},
          {"b_max", b_max},
          {"mode", std::string(to_string(mode))},
          {"cassette", cassette_path.string()},
          {"normalization", normalization},
          {"full_table_fallback", full_table_fallback},
          {"reasoning_table", to_string(reasoning_table)},
          {"template_dir", template_dir.string()},
          {"sql_timeout_ms", sql_timeout.count()},
          {"max_tokens", max_tokens},
          {"executor.interpreter", interpreter},
          {"executor.extension", executor.extension},
          {"executor.timeout_ms", executor.timeout.count()},
          {"executor.memory_mb", executor.memory_mb},
          {"http.base_url", http.base_url},
          {"http.model", http.model}};
}

PipelineConfig parse_config_text(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  for (auto line : detail::split_lines(text)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    base.set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), std::move(base));
}

}  // namespace tablemaster
