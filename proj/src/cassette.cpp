#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tablemaster/lm.hpp"

namespace tablemaster {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const CassetteEntry& e) {
  return json{{"key", e.key},
              {"template_id", e.template_id},
              {"rendered", e.rendered},
              {"response",
               {{"text", e.response.text},
                {"prompt_tokens", e.response.prompt_tokens},
                {"completion_tokens", e.response.completion_tokens},
                {"backend_id", e.response.backend_id}}}};
}

CassetteEntry from_json(const json& j) {
  CassetteEntry e;
  e.key = j.at("key").get<std::string>();
  e.template_id = j.value("template_id", "");
  e.rendered = j.value("rendered", "");
  const auto& r = j.at("response");
  e.response.text = r.at("text").get<std::string>();
  e.response.prompt_tokens = r.value("prompt_tokens", std::int64_t{0});
  e.response.completion_tokens = r.value("completion_tokens", std::int64_t{0});
  e.response.backend_id = r.value("backend_id", "");
  return e;
}

}  // namespace

Cassette::Cassette(fs::path dir) : dir_(std::move(dir)) {
  if (!fs::exists(dir_)) {
    fs::create_directories(dir_);
    return;
  }
  if (!fs::is_directory(dir_)) throw ConfigError("cassette path is not a directory: " + dir_.string());
  for (const auto& ent : fs::directory_iterator(dir_)) {
    if (ent.path().extension() != ".json") continue;
    std::ifstream in(ent.path(), std::ios::binary);
    try {
      auto e = from_json(json::parse(in));
      entries_.emplace(e.key, std::move(e));
    } catch (const json::exception& ex) {
      throw ConfigError("corrupt cassette entry " + ent.path().string() + ": " + ex.what());
    }
  }
}

std::optional<CassetteEntry> Cassette::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Cassette::put(const CassetteEntry& entry) {
  std::lock_guard lock(mu_);
  const fs::path final_path = dir_ / (entry.key + ".json");
  const fs::path tmp_path = dir_ / (entry.key + ".json.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write cassette entry " + tmp_path.string());
    out << to_json(entry).dump(2) << '\n';
  }
  fs::rename(tmp_path, final_path);
  entries_.insert_or_assign(entry.key, entry);
}

std::vector<CassetteEntry> Cassette::entries() const {
  std::lock_guard lock(mu_);
  std::vector<CassetteEntry> out;
  for (const auto& [k, e] : entries_) out.push_back(e);
  return out;
}

bool Cassette::erase(const std::string& key) {
  std::lock_guard lock(mu_);
  if (!entries_.erase(key)) return false;
  fs::remove(dir_ / (key + ".json"));
  return true;
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace tablemaster
