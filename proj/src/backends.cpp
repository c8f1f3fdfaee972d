#include "tablemaster/lm.hpp"

namespace tablemaster {

ProviderError::ProviderError(int status, std::string body)
    : LmError("provider returned HTTP " + std::to_string(status) + ": " + body),
      status_(status),
      body_(std::move(body)) {}

ScriptedBackend& ScriptedBackend::push(TemplateId id, std::string reply) {
  std::lock_guard lock(mu_);
  queues_[id].push_back(std::move(reply));
  return *this;
}

ScriptedBackend& ScriptedBackend::push_all(TemplateId id, const std::vector<std::string>& replies) {
  for (const auto& r : replies) push(id, r);
  return *this;
}

ScriptedBackend& ScriptedBackend::sticky(TemplateId id, std::string reply) {
  std::lock_guard lock(mu_);
  sticky_[id] = std::move(reply);
  return *this;
}

LmResponse ScriptedBackend::complete(const LmRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  std::optional<std::string> reply;
  auto& q = queues_[request.template_id];
  if (!q.empty()) {
    reply = std::move(q.front());
    q.pop_front();
  } else if (auto it = sticky_.find(request.template_id); it != sticky_.end()) {
    reply = it->second;
  } else if (responder_) {
    reply = responder_(request);
  }
  if (!reply) {
    throw CassetteMiss("scripted backend has no reply for " + std::string(to_string(request.template_id)));
  }
  LmResponse resp;
  resp.text = *reply;
  resp.prompt_tokens = static_cast<std::int64_t>((request.rendered.size() + 3) / 4);
  resp.completion_tokens = static_cast<std::int64_t>((reply->size() + 3) / 4);
  resp.backend_id = id();
  return resp;
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string_view to_string(CassetteMode mode) {
  switch (mode) {
    case CassetteMode::record: return "record";
    case CassetteMode::replay: return "replay";
    case CassetteMode::passthrough: return "passthrough";
  }
  return "replay";
}

CassetteMode parse_cassette_mode(std::string_view name) {
  if (name == "record") return CassetteMode::record;
  if (name == "replay") return CassetteMode::replay;
  if (name == "passthrough") return CassetteMode::passthrough;
  throw ConfigError("unknown backend mode '" + std::string(name) + "'");
}

CassetteBackend::CassetteBackend(CassetteMode mode, std::shared_ptr<Cassette> cassette,
                                 std::shared_ptr<LmBackend> inner)
    : mode_(mode), cassette_(std::move(cassette)), inner_(std::move(inner)) {
  if (mode_ != CassetteMode::passthrough && !cassette_) {
    throw ConfigError(std::string(to_string(mode_)) + " mode requires a cassette");
  }
  if (mode_ != CassetteMode::replay && !inner_) {
    throw ConfigError(std::string(to_string(mode_)) + " mode requires a network backend");
  }
}

LmResponse CassetteBackend::complete(const LmRequest& request) {
  switch (mode_) {
    case CassetteMode::replay: {
      const std::string key = request_key(request);
      if (auto hit = cassette_->find(key)) return hit->response;
      throw CassetteMiss("no recording for " + std::string(to_string(request.template_id)) + " (key " +
                         key + ")");
    }
    case CassetteMode::record: {
      LmResponse resp = inner_->complete(request);
      cassette_->put(CassetteEntry{request_key(request), std::string(to_string(request.template_id)),
                                   request.rendered, resp});
      return resp;
    }
    case CassetteMode::passthrough:
      return inner_->complete(request);
  }
  throw ConfigError("invalid cassette mode");
}

std::string CassetteBackend::id() const {
  std::string out = "cassette:" + std::string(to_string(mode_));
  if (inner_) out += "/" + inner_->id();
  return out;
}

}  // namespace tablemaster
