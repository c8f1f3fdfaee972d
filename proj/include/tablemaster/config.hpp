#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tablemaster/executor.hpp"
#include "tablemaster/lm.hpp"
#include "tablemaster/reasoning.hpp"

namespace tablemaster {

struct PipelineConfig {
  std::size_t peek_size = 25;
  std::size_t b_max = 6;
  ExecutorProfile executor;
  CassetteMode mode = CassetteMode::passthrough;
  std::filesystem::path cassette_path;
  bool normalization = true;
  bool full_table_fallback = true;
  ReasoningTable reasoning_table = ReasoningTable::focus;
  std::filesystem::path template_dir;  // empty: bundled prompts
  std::chrono::milliseconds sql_timeout{5000};
  HttpBackendConfig http;
  int max_tokens = 1024;
  std::size_t parallelism = 1;

  // Keys as in the config file, e.g. "peek_size", "executor.timeout_ms".
  void set(std::string_view key, std::string_view value);
  void validate() const;
  // Every key with its current value; no credentials.
  nlohmann::json snapshot() const;
};

// Flat key=value lines; '#' starts a comment. Applied on top of `base`.
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});
PipelineConfig parse_config_text(std::string_view text, PipelineConfig base = {});

}  // namespace tablemaster
