#include <fstream>
#include <sstream>

#include "tablemaster/hash.hpp"
#include "tablemaster/lm.hpp"

namespace tablemaster {

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::structure_extraction: return "structure_extraction";
    case TemplateId::column_ranking: return "column_ranking";
    case TemplateId::column_lookup: return "column_lookup";
    case TemplateId::row_lookup_sql: return "row_lookup_sql";
    case TemplateId::verbalization: return "verbalization";
    case TemplateId::information_estimation: return "information_estimation";
    case TemplateId::strategy_assessment: return "strategy_assessment";
    case TemplateId::textual_reasoning: return "textual_reasoning";
    case TemplateId::textual_guidance: return "textual_guidance";
    case TemplateId::symbolic_reasoning: return "symbolic_reasoning";
    case TemplateId::answer_formatting: return "answer_formatting";
  }
  return "unknown";
}

TemplateId parse_template_id(std::string_view name) {
  for (auto id : kAllTemplateIds) {
    if (to_string(id) == name) return id;
  }
  throw TemplateError("unknown template id '" + std::string(name) + "'");
}

namespace {

bool is_name_char(char c, bool first) {
  if (c == '_' || (c >= 'a' && c <= 'z')) return true;
  return !first && c >= '0' && c <= '9';
}

// Calls on_text for literal runs and on_placeholder for each {{name}}.
template <typename TextFn, typename PlaceholderFn>
void scan_placeholders(std::string_view body, TextFn on_text, PlaceholderFn on_placeholder) {
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t open = body.find("{{", pos);
    if (open == std::string_view::npos) break;
    std::size_t close = body.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    std::string_view name = body.substr(open + 2, close - open - 2);
    bool valid = !name.empty();
    for (std::size_t i = 0; i < name.size() && valid; ++i) valid = is_name_char(name[i], i == 0);
    if (!valid) {
      on_text(body.substr(pos, open + 2 - pos));
      pos = open + 2;
      continue;
    }
    on_text(body.substr(pos, open - pos));
    on_placeholder(name);
    pos = close + 2;
  }
  on_text(body.substr(pos));
}

}  // namespace

PromptTemplate::PromptTemplate(TemplateId id, std::string body) : id_(id), body_(std::move(body)) {
  scan_placeholders(body_, [](std::string_view) {},
                    [&](std::string_view name) { required_.emplace(name); });
}

std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings) {
  for (const auto& name : tmpl.required_bindings()) {
    if (!bindings.count(name)) {
      throw MissingBinding(std::string(to_string(tmpl.id())) + ": missing binding '" + name + "'");
    }
  }
  for (const auto& [name, value] : bindings) {
    if (!tmpl.required_bindings().count(name)) {
      throw UnknownBinding(std::string(to_string(tmpl.id())) + ": unknown binding '" + name + "'");
    }
  }
  std::string out;
  scan_placeholders(tmpl.body(), [&](std::string_view text) { out += text; },
                    [&](std::string_view name) { out += bindings.at(std::string(name)); });
  return out;
}

TemplateRegistry TemplateRegistry::load_directory(const std::filesystem::path& dir) {
  TemplateRegistry reg;
  for (auto id : kAllTemplateIds) {
    auto path = dir / (std::string(to_string(id)) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TemplateError("cannot read prompt template " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    reg.add(PromptTemplate(id, ss.str()));
  }
  return reg;
}

TemplateRegistry TemplateRegistry::load_default() {
  return load_directory(TABLEMASTER_DEFAULT_PROMPT_DIR);
}

void TemplateRegistry::add(PromptTemplate tmpl) {
  auto id = tmpl.id();
  templates_.insert_or_assign(id, std::move(tmpl));
}

const PromptTemplate& TemplateRegistry::get(TemplateId id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw TemplateError("no template registered for " + std::string(to_string(id)));
  return it->second;
}

LmRequest make_request(const TemplateRegistry& registry, TemplateId id, Bindings bindings) {
  LmRequest req;
  req.template_id = id;
  req.rendered = render_prompt(registry.get(id), bindings);
  req.bindings = std::move(bindings);
  return req;
}

std::string request_key(const LmRequest& request) {
  std::string material(to_string(request.template_id));
  material += '\0';
  material += request.rendered;
  return sha256_hex(material);
}

}  // namespace tablemaster
