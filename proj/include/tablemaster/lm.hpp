#pragma once

// Language-model gateway: prompt templates, request/response types, reply
// parsers and backends (HTTP, scripted, record/replay cassette).

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tablemaster/errors.hpp"

namespace tablemaster {

enum class TemplateId {
  structure_extraction,
  column_ranking,
  column_lookup,
  row_lookup_sql,
  verbalization,
  information_estimation,
  strategy_assessment,
  textual_reasoning,
  textual_guidance,
  symbolic_reasoning,
  answer_formatting,
};

inline constexpr std::array<TemplateId, 11> kAllTemplateIds = {
    TemplateId::structure_extraction,   TemplateId::column_ranking,
    TemplateId::column_lookup,          TemplateId::row_lookup_sql,
    TemplateId::verbalization,          TemplateId::information_estimation,
    TemplateId::strategy_assessment,    TemplateId::textual_reasoning,
    TemplateId::textual_guidance,       TemplateId::symbolic_reasoning,
    TemplateId::answer_formatting,
};

std::string_view to_string(TemplateId id);
TemplateId parse_template_id(std::string_view name);

TABLEMASTER_DEFINE_ERROR(TemplateError, Error)
TABLEMASTER_DEFINE_ERROR(MissingBinding, TemplateError)
TABLEMASTER_DEFINE_ERROR(UnknownBinding, TemplateError)

using Bindings = std::map<std::string, std::string>;

// Body text with {{name}} placeholders. required_bindings is derived from the
// body, so the two always agree.
class PromptTemplate {
 public:
  PromptTemplate(TemplateId id, std::string body);

  TemplateId id() const { return id_; }
  const std::string& body() const { return body_; }
  const std::set<std::string>& required_bindings() const { return required_; }

 private:
  TemplateId id_;
  std::string body_;
  std::set<std::string> required_;
};

// Bindings must cover required_bindings exactly. Substitution is single-pass:
// placeholder syntax inside a bound value is not expanded.
std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings);

class TemplateRegistry {
 public:
  // Reads <dir>/<template_id>.txt for every id.
  static TemplateRegistry load_directory(const std::filesystem::path& dir);
  static TemplateRegistry load_default();

  void add(PromptTemplate tmpl);
  const PromptTemplate& get(TemplateId id) const;

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

struct LmRequest {
  TemplateId template_id{};
  Bindings bindings;
  std::string rendered;
  double temperature = 0.0;
  int max_tokens = 1024;
};

LmRequest make_request(const TemplateRegistry& registry, TemplateId id, Bindings bindings);

// Stable key of (template id, rendered text); bindings order is irrelevant.
std::string request_key(const LmRequest& request);

struct LmResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string backend_id;
};

TABLEMASTER_DEFINE_ERROR(LmError, Error)
TABLEMASTER_DEFINE_ERROR(CassetteMiss, LmError)
TABLEMASTER_DEFINE_ERROR(TransportError, LmError)

class ProviderError : public LmError {
 public:
  ProviderError(int status, std::string body);
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

class LmBackend {
 public:
  virtual ~LmBackend() = default;
  virtual LmResponse complete(const LmRequest& request) = 0;
  virtual std::string id() const = 0;
};

inline LmResponse complete(const LmRequest& request, LmBackend& backend) {
  return backend.complete(request);
}

// OpenAI-compatible chat completions endpoint.
struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 120;
};

class HttpBackend : public LmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  LmResponse complete(const LmRequest& request) override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpBackendConfig config_;
  std::string api_key_;
};

// Replies served from per-template queues, or from a callback. Exhausted
// queues raise CassetteMiss so callers exercise the same degrade paths as an
// incomplete recording. The last reply of a queue marked sticky repeats.
class ScriptedBackend : public LmBackend {
 public:
  using Responder = std::function<std::optional<std::string>(const LmRequest&)>;

  ScriptedBackend() = default;
  explicit ScriptedBackend(Responder responder) : responder_(std::move(responder)) {}

  ScriptedBackend& push(TemplateId id, std::string reply);
  ScriptedBackend& push_all(TemplateId id, const std::vector<std::string>& replies);
  ScriptedBackend& sticky(TemplateId id, std::string reply);

  LmResponse complete(const LmRequest& request) override;
  std::string id() const override { return "scripted"; }

  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  std::map<TemplateId, std::deque<std::string>> queues_;
  std::map<TemplateId, std::string> sticky_;
  Responder responder_;
  std::size_t calls_ = 0;
};

enum class CassetteMode { record, replay, passthrough };
std::string_view to_string(CassetteMode mode);
CassetteMode parse_cassette_mode(std::string_view name);

struct CassetteEntry {
  std::string key;
  std::string template_id;
  std::string rendered;
  LmResponse response;
};

// Directory of <key>.json files. Writes are serialized by an internal mutex.
class Cassette {
 public:
  explicit Cassette(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<CassetteEntry> find(const std::string& key) const;
  void put(const CassetteEntry& entry);
  std::vector<CassetteEntry> entries() const;
  bool erase(const std::string& key);
  std::size_t size() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, CassetteEntry> entries_;
};

// record: inner backend, then persist. replay: cassette only, never the
// inner backend. passthrough: inner backend only.
class CassetteBackend : public LmBackend {
 public:
  CassetteBackend(CassetteMode mode, std::shared_ptr<Cassette> cassette,
                  std::shared_ptr<LmBackend> inner);

  LmResponse complete(const LmRequest& request) override;
  std::string id() const override;
  CassetteMode mode() const { return mode_; }

 private:
  CassetteMode mode_;
  std::shared_ptr<Cassette> cassette_;
  std::shared_ptr<LmBackend> inner_;
};

// Parser failures keep the raw reply for trace logging.
class UnparseableReply : public Error {
 public:
  UnparseableReply(const std::string& what, std::string reply)
      : Error(what), reply_(std::move(reply)) {}
  const std::string& reply() const { return reply_; }

 private:
  std::string reply_;
};

class EmptyList : public UnparseableReply {
 public:
  using UnparseableReply::UnparseableReply;
};

bool parse_bool(std::string_view reply);

// Explicit labels win over synonyms; among either, the earliest occurrence in
// the reply wins. Matching is case-insensitive and word-bounded.
std::string parse_choice(std::string_view reply, const std::vector<std::string>& options,
                         const std::map<std::string, std::string>& synonyms = {});

struct DelimitedList {
  std::vector<std::string> items;
  std::vector<std::string> dropped;
};

DelimitedList parse_delimited_list(std::string_view reply,
                                   const std::optional<std::vector<std::string>>& universe = std::nullopt);

// Contents of the first ``` fence with any language tag removed; the whole
// reply when there is no fence.
std::string extract_code_block(std::string_view reply);

}  // namespace tablemaster
