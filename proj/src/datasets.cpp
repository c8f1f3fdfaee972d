#include <fstream>
#include <map>
#include <sstream>

#include "tablemaster/evaluation.hpp"
#include "text_util.hpp"

namespace tablemaster {

namespace fs = std::filesystem;

DatasetFormat parse_dataset_format(std::string_view name) {
  std::string n = detail::lower(detail::trim(name));
  if (n == "jsonl") return DatasetFormat::jsonl;
  if (n == "wikitq-tsv" || n == "wikitq") return DatasetFormat::wikitq_tsv;
  if (n == "tabfact-json" || n == "tabfact") return DatasetFormat::tabfact_json;
  throw ConfigError("unknown dataset format '" + std::string(name) + "'");
}

std::string to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::jsonl: return "jsonl";
    case DatasetFormat::wikitq_tsv: return "wikitq-tsv";
    case DatasetFormat::tabfact_json: return "tabfact-json";
  }
  return "jsonl";
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetFormatError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Skip {
  std::string reason;
};

std::string json_text(const nlohmann::json& v, const char* field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw Skip{std::string(field) + " is not text"};
}

std::optional<std::string> verdict_label(std::string_view raw) {
  std::string v = detail::lower(detail::trim(raw));
  if (v == "true" || v == "1" || v == "entailed") return "True";
  if (v == "false" || v == "0" || v == "refuted") return "False";
  return std::nullopt;
}

EvalInstance jsonl_instance(const nlohmann::json& j) {
  if (!j.is_object()) throw Skip{"record is not an object"};
  for (const char* f : {"id", "table", "question", "answers"}) {
    if (!j.contains(f)) throw Skip{std::string("missing \"") + f + "\""};
  }
  const auto& t = j["table"];
  if (!t.is_object() || !t.contains("header") || !t.contains("rows") || !t["header"].is_array() ||
      !t["rows"].is_array()) {
    throw Skip{"table needs header and rows arrays"};
  }
  std::vector<std::string> header;
  for (const auto& h : t["header"]) header.push_back(json_text(h, "header cell"));
  std::vector<Row> rows;
  for (const auto& r : t["rows"]) {
    if (!r.is_array()) throw Skip{"row is not an array"};
    Row row;
    for (const auto& c : r) row.push_back(c.is_null() ? std::string() : json_text(c, "cell"));
    rows.push_back(std::move(row));
  }
  EvalInstance inst{json_text(j["id"], "id"), Table(std::move(header), std::move(rows)),
                    json_text(j["question"], "question"), {}, TaskKind::qa};
  if (!j["answers"].is_array() || j["answers"].empty()) throw Skip{"answers must be a non-empty array"};
  for (const auto& a : j["answers"]) inst.gold_answers.push_back(json_text(a, "answer"));
  if (j.contains("task")) {
    try {
      inst.task_kind = parse_task_kind(json_text(j["task"], "task"));
    } catch (const ConfigError& e) {
      throw Skip{e.what()};
    }
  }
  if (inst.task_kind == TaskKind::fact_verification) {
    for (auto& g : inst.gold_answers) {
      auto label = verdict_label(g);
      if (!label) throw Skip{"fact verification gold must be True or False"};
      g = *label;
    }
  }
  return inst;
}

void load_jsonl(const fs::path& path, LoadedDataset& out) {
  std::string text = read_file(path);
  std::size_t line_no = 0;
  for (auto line : detail::split_lines(text)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      out.instances.push_back(jsonl_instance(nlohmann::json::parse(line)));
    } catch (const Skip& s) {
      ++out.skipped;
      out.skip_reasons.push_back("line " + std::to_string(line_no) + ": " + s.reason);
    } catch (const nlohmann::json::exception&) {
      ++out.skipped;
      out.skip_reasons.push_back("line " + std::to_string(line_no) + ": invalid JSON");
    } catch (const ShapeError& e) {
      ++out.skipped;
      out.skip_reasons.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string unescape_wikitq(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char c = s[++i];
      if (c == 'n') out += '\n';
      else if (c == 'p') out += '|';
      else if (c == '\\') out += '\\';
      else { out += '\\'; out += c; }
    } else {
      out += s[i];
    }
  }
  return out;
}

std::optional<fs::path> resolve_near(const fs::path& anchor, const fs::path& relative) {
  fs::path dir = anchor.parent_path();
  for (const fs::path& base : {dir, dir.parent_path()}) {
    fs::path candidate = base / relative;
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

void load_wikitq(const fs::path& path, LoadedDataset& out) {
  std::string text = read_file(path);
  auto lines = detail::split_lines(text);
  if (lines.empty()) return;
  std::map<std::string, std::size_t> col;
  {
    auto header = read_delimited(lines.front(), '\t', false);
    if (header.empty()) return;
    for (std::size_t i = 0; i < header.front().size(); ++i) col[std::string(detail::trim(header.front()[i]))] = i;
  }
  for (const char* f : {"id", "utterance", "context", "targetValue"}) {
    if (!col.count(f)) throw DatasetFormatError(std::string("wikitq header lacks ") + f);
  }
  std::map<std::string, std::optional<Table>> cache;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    auto rec = read_delimited(lines[ln], '\t', false);
    auto skip = [&](const std::string& why) {
      ++out.skipped;
      out.skip_reasons.push_back("line " + std::to_string(ln + 1) + ": " + why);
    };
    if (rec.empty() || rec.front().size() != col.size()) {
      skip("wrong field count");
      continue;
    }
    const auto& f = rec.front();
    std::string context = f[col["context"]];
    auto it = cache.find(context);
    if (it == cache.end()) {
      std::optional<Table> table;
      if (auto p = resolve_near(path, context)) {
        try {
          table = parse_table(read_file(*p), TableFormat::csv, true);
        } catch (const Error&) {
        }
      }
      it = cache.emplace(context, std::move(table)).first;
    }
    if (!it->second) {
      skip("table " + context + " missing or malformed");
      continue;
    }
    std::string gold = unescape_wikitq(f[col["targetValue"]]);
    if (detail::trim(gold).empty()) {
      skip("empty targetValue");
      continue;
    }
    out.instances.push_back(
        EvalInstance{f[col["id"]], *it->second, unescape_wikitq(f[col["utterance"]]), {gold}, TaskKind::qa});
  }
}

std::optional<Table> load_tabfact_table(const fs::path& json_path, const std::string& name) {
  std::optional<fs::path> p = resolve_near(json_path, fs::path("all_csv") / name);
  if (!p) p = resolve_near(json_path, fs::path("data") / "all_csv" / name);
  if (!p) return std::nullopt;
  try {
    auto records = read_delimited(read_file(*p), '#', false);
    if (records.empty()) return std::nullopt;
    Row header = records.front();
    std::vector<Row> rows(records.begin() + 1, records.end());
    return Table(std::move(header), std::move(rows));
  } catch (const Error&) {
    return std::nullopt;
  }
}

void load_tabfact(const fs::path& path, LoadedDataset& out) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DatasetFormatError(std::string("tabfact file is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DatasetFormatError("tabfact file must be an object keyed by table file");
  for (const auto& [name, entry] : doc.items()) {
    auto skip = [&](const std::string& why) {
      ++out.skipped;
      out.skip_reasons.push_back(name + ": " + why);
    };
    if (!entry.is_array() || entry.size() < 2 || !entry[0].is_array() || !entry[1].is_array() ||
        entry[0].size() != entry[1].size()) {
      skip("expected [statements, labels, caption]");
      continue;
    }
    auto table = load_tabfact_table(path, name);
    if (!table) {
      skip("table missing or malformed");
      continue;
    }
    if (entry.size() > 2 && entry[2].is_string()) *table = table->with_name(entry[2].get<std::string>());
    for (std::size_t i = 0; i < entry[0].size(); ++i) {
      const auto& statement = entry[0][i];
      const auto& label = entry[1][i];
      if (!statement.is_string() || !label.is_number_integer()) {
        skip("statement " + std::to_string(i) + " malformed");
        continue;
      }
      out.instances.push_back(EvalInstance{name + "#" + std::to_string(i), *table, statement.get<std::string>(),
                                           {label.get<int>() != 0 ? "True" : "False"},
                                           TaskKind::fact_verification});
    }
  }
}

}  // namespace

LoadedDataset load_dataset(const fs::path& path, DatasetFormat format) {
  LoadedDataset out;
  switch (format) {
    case DatasetFormat::jsonl: load_jsonl(path, out); break;
    case DatasetFormat::wikitq_tsv: load_wikitq(path, out); break;
    case DatasetFormat::tabfact_json: load_tabfact(path, out); break;
  }
  if (out.instances.empty()) {
    throw DatasetFormatError("no instances loaded from " + path.string() + " (" + std::to_string(out.skipped) +
                             " skipped)");
  }
  return out;
}

}  // namespace tablemaster
