#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tablemaster/lm.hpp"

namespace tablemaster {

// One LM call as seen by the trace.
struct StepRecord {
  std::size_t index = 0;
  std::string template_id;
  std::string request_key;
  std::string reply_digest;  // sha256 of the reply text; empty when the call failed
  std::string reply;
  std::string backend_id;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::optional<std::string> error;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const StepRecord& step);

// Append-only record of the LM calls and warnings of one pipeline run.
class TraceLog {
 public:
  void add_step(StepRecord step);
  // Attaches to the latest step, or to the run when there is none yet.
  void warn_step(std::string message);
  void warn(std::string message);

  const std::vector<StepRecord>& steps() const { return steps_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t failed_calls() const;
  std::size_t cassette_misses() const;

 private:
  std::vector<StepRecord> steps_;
  std::vector<std::string> warnings_;
};

// The handle pipeline stages use to reach the model. Every call lands in the
// trace exactly once, whether it succeeds or not.
class LmSession {
 public:
  LmSession(const TemplateRegistry& registry, LmBackend& backend, TraceLog& trace, int max_tokens = 1024)
      : registry_(registry), backend_(backend), trace_(trace), max_tokens_(max_tokens) {}

  // Rethrows LmError after recording the failed step.
  LmResponse complete(TemplateId id, Bindings bindings);
  // Returns nullopt on LmError (recorded, with a warning).
  std::optional<LmResponse> try_complete(TemplateId id, Bindings bindings);

  void warn(std::string message) { trace_.warn_step(std::move(message)); }
  TraceLog& trace() { return trace_; }
  const TemplateRegistry& registry() const { return registry_; }

 private:
  const TemplateRegistry& registry_;
  LmBackend& backend_;
  TraceLog& trace_;
  int max_tokens_;
};

}  // namespace tablemaster
