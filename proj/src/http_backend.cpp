#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "tablemaster/lm.hpp"

#include <cstdlib>

namespace tablemaster {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // no trailing slash
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
  split_url(config_.base_url);  // validate early
}

LmResponse HttpBackend::complete(const LmRequest& request) {
  const SplitUrl url = split_url(config_.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);

  nlohmann::json body{{"model", config_.model},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.rendered}}})},
                      {"temperature", request.temperature},
                      {"max_tokens", request.max_tokens},
                      {"n", 1}};
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(url.path + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw TransportError("request to " + config_.base_url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) throw ProviderError(res->status, res->body);

  LmResponse out;
  out.backend_id = id();
  try {
    auto doc = nlohmann::json::parse(res->body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    out.text = content.is_null() ? "" : content.get<std::string>();
    if (doc.contains("usage")) {
      out.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
      out.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(res->status, std::string("malformed completion body (") + e.what() + "): " + res->body);
  }
  return out;
}

}  // namespace tablemaster
