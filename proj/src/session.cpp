#include "tablemaster/session.hpp"

#include "tablemaster/hash.hpp"

namespace tablemaster {

nlohmann::json to_json(const StepRecord& s) {
  nlohmann::json j{{"index", s.index},
                   {"template_id", s.template_id},
                   {"request_key", s.request_key},
                   {"reply_digest", s.reply_digest},
                   {"reply", s.reply},
                   {"backend_id", s.backend_id},
                   {"prompt_tokens", s.prompt_tokens},
                   {"completion_tokens", s.completion_tokens},
                   {"warnings", s.warnings}};
  j["error"] = s.error ? nlohmann::json(*s.error) : nlohmann::json(nullptr);
  return j;
}

void TraceLog::add_step(StepRecord step) {
  step.index = steps_.size();
  steps_.push_back(std::move(step));
}

void TraceLog::warn_step(std::string message) {
  if (steps_.empty()) {
    warnings_.push_back(std::move(message));
  } else {
    steps_.back().warnings.push_back(std::move(message));
  }
}

void TraceLog::warn(std::string message) { warnings_.push_back(std::move(message)); }

std::size_t TraceLog::failed_calls() const {
  std::size_t n = 0;
  for (const auto& s : steps_) n += s.error.has_value();
  return n;
}

std::size_t TraceLog::cassette_misses() const {
  std::size_t n = 0;
  for (const auto& s : steps_) n += s.error && s.error->rfind("CassetteMiss", 0) == 0;
  return n;
}

LmResponse LmSession::complete(TemplateId id, Bindings bindings) {
  LmRequest req = make_request(registry_, id, std::move(bindings));
  req.max_tokens = max_tokens_;
  StepRecord step;
  step.template_id = std::string(to_string(id));
  step.request_key = request_key(req);
  try {
    LmResponse resp = backend_.complete(req);
    step.reply = resp.text;
    step.reply_digest = sha256_hex(resp.text);
    step.backend_id = resp.backend_id;
    step.prompt_tokens = resp.prompt_tokens;
    step.completion_tokens = resp.completion_tokens;
    trace_.add_step(std::move(step));
    return resp;
  } catch (const CassetteMiss& e) {
    step.error = std::string("CassetteMiss: ") + e.what();
    trace_.add_step(std::move(step));
    throw;
  } catch (const ProviderError& e) {
    step.error = std::string("ProviderError: ") + e.what();
    trace_.add_step(std::move(step));
    throw;
  } catch (const LmError& e) {
    step.error = std::string("TransportError: ") + e.what();
    trace_.add_step(std::move(step));
    throw;
  }
}

std::optional<LmResponse> LmSession::try_complete(TemplateId id, Bindings bindings) {
  try {
    return complete(id, std::move(bindings));
  } catch (const LmError& e) {
    trace_.warn_step(std::string(to_string(id)) + " call failed; degrading");
    return std::nullopt;
  }
}

}  // namespace tablemaster
