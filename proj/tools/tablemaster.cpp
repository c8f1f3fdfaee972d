// Command-line front end: run, eval, normalize, cassette.

#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "tablemaster/config.hpp"
#include "tablemaster/evaluation.hpp"
#include "tablemaster/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tablemaster;

namespace {

std::string read_input(const std::string& path) {
  std::stringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    buf << in.rdbuf();
  }
  return buf.str();
}

Table load_table(const std::string& path, const std::string& format, bool strict) {
  TableFormat f;
  if (!format.empty()) {
    f = parse_table_format(format);
  } else if (auto guess = format_from_extension(path)) {
    f = *guess;
  } else {
    throw ConfigError("cannot tell the table format of '" + path + "'; pass --format");
  }
  return parse_table(read_input(path), f, strict);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

// Pipeline flags shared by run and eval. Each maps onto a config key so the
// precedence is: flag, then config file, then default.
struct PipelineFlags {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key=value config file");
    bind(app, "--peek-size", "peek_size", "rows shown to structure prompts (k)");
    bind(app, "--b-max", "b_max", "maximum columns picked by column lookup");
    bind(app, "--mode", "mode", "record | replay | passthrough");
    bind(app, "--cassette", "cassette", "cassette directory");
    bind(app, "--normalization", "normalization", "on | off");
    bind(app, "--full-table-fallback", "full_table_fallback", "on | off");
    bind(app, "--reasoning-table", "reasoning_table", "focus | full");
    bind(app, "--template-dir", "template_dir", "directory of prompt templates");
    bind(app, "--sql-timeout-ms", "sql_timeout_ms", "row lookup statement time limit");
    bind(app, "--max-tokens", "max_tokens", "completion token cap per call");
    bind(app, "--interpreter", "executor.interpreter", "program interpreter command");
    bind(app, "--extension", "executor.extension", "program file extension");
    bind(app, "--executor-timeout-ms", "executor.timeout_ms", "program wall-clock limit");
    bind(app, "--executor-memory-mb", "executor.memory_mb", "program address-space cap");
    bind(app, "--base-url", "http.base_url", "chat completions base URL");
    bind(app, "--model", "http.model", "model name");
    bind(app, "--api-key-env", "http.api_key_env", "environment variable holding the API key");
  }

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
  }

  PipelineConfig resolve(PipelineConfig base) const {
    if (!config_file.empty()) base = load_config_file(config_file, std::move(base));
    for (const auto& [key, value] : overrides) base.set(key, value);
    base.validate();
    return base;
  }
};

int run_command(const PipelineFlags& flags, const std::string& table_path, const std::string& format, bool strict,
                const std::string& question, const std::string& task, const std::string& id,
                const std::string& trace_path) {
  PipelineConfig config = flags.resolve(PipelineConfig{});
  Table table = load_table(table_path, format, strict);
  TemplateRegistry registry = load_templates(config);
  auto backend = make_backend(config);
  PipelineRun run = run_pipeline(InstanceInput{id, table, question, parse_task_kind(task)}, config, registry, *backend);
  if (!trace_path.empty()) write_text(trace_path, run.to_json(config).dump(2) + "\n");
  std::cout << run.answer.value << "\n";
  if (run.answer.abstained) std::cerr << "no answer";
  if (run.answer.abstained && !trace_path.empty()) std::cerr << "; see " << trace_path;
  if (run.answer.abstained) std::cerr << "\n";
  for (const auto& w : run.log.warnings()) std::cerr << "warning: " << w << "\n";
  return 0;
}

int eval_command(const PipelineFlags& flags, const std::string& dataset, const std::string& format,
                 const std::string& out_dir, std::size_t parallelism, std::size_t limit, bool buckets, bool cost) {
  PipelineConfig defaults;
  defaults.normalization = false;
  PipelineConfig config = flags.resolve(defaults);
  LoadedDataset data = load_dataset(dataset, parse_dataset_format(format));
  if (limit > 0 && data.instances.size() > limit) data.instances.erase(data.instances.begin() + static_cast<long>(limit), data.instances.end());
  TemplateRegistry registry = load_templates(config);
  auto backend = make_backend(config);
  EvalOptions options;
  options.trace_dir = fs::path(out_dir);
  options.parallelism = parallelism;
  EvalReport report = evaluate(data.instances, config, registry, *backend, options);
  report.skipped = data.skipped;
  write_text(fs::path(out_dir) / "report.json", report.to_json().dump(2) + "\n");
  std::string text = report.to_text(buckets, cost);
  write_text(fs::path(out_dir) / "report.txt", text);
  std::cout << text;
  for (const auto& reason : data.skip_reasons) std::cerr << "skipped " << reason << "\n";
  return 0;
}

int normalize_command(const std::string& table_path, const std::string& format, bool strict) {
  NormalizedTable nt = normalize(load_table(table_path, format, strict));
  std::cout << render_markdown(nt.table) << "\n";
  if (nt.transposed) std::cerr << "transposed: column-major input\n";
  for (std::size_t j = 0; j < nt.table.column_count(); ++j) {
    std::cerr << nt.table.headers()[j] << ": " << to_string(nt.column_kinds[j].kind);
    std::map<std::string, std::size_t> counts;
    for (const auto& p : nt.provenance[j]) counts[p.substr(0, p.find(':'))] += 1;
    for (const auto& [what, n] : counts) std::cerr << ", " << what << " x" << n;
    std::cerr << "\n";
  }
  return 0;
}

std::set<std::string> referenced_keys(const fs::path& traces) {
  std::set<std::string> keys;
  if (!fs::exists(traces)) throw ConfigError("trace path does not exist: " + traces.string());
  auto scan = [&](const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("steps")) return;
    for (const auto& s : j["steps"]) {
      if (s.contains("request_key") && s["request_key"].is_string()) keys.insert(s["request_key"].get<std::string>());
    }
  };
  if (fs::is_directory(traces)) {
    for (const auto& ent : fs::recursive_directory_iterator(traces)) {
      if (ent.is_regular_file() && ent.path().extension() == ".json") scan(ent.path());
    }
  } else {
    scan(traces);
  }
  return keys;
}

int cassette_inspect(const std::string& dir, bool verbose) {
  if (!fs::is_directory(dir)) throw ConfigError("no cassette at " + dir);
  Cassette cassette(dir);
  auto entries = cassette.entries();
  std::map<std::string, std::size_t> per_template;
  for (const auto& e : entries) per_template[e.template_id] += 1;
  std::cout << entries.size() << " entries\n";
  for (const auto& [t, n] : per_template) std::cout << "  " << t << ": " << n << "\n";
  if (verbose) {
    for (const auto& e : entries) std::cout << e.key << "  " << e.template_id << "\n";
  }
  return 0;
}

int cassette_prune(const std::string& dir, const std::string& traces, bool dry_run) {
  if (!fs::is_directory(dir)) throw ConfigError("no cassette at " + dir);
  Cassette cassette(dir);
  auto keep = referenced_keys(traces);
  std::size_t removed = 0;
  for (const auto& e : cassette.entries()) {
    if (keep.count(e.key)) continue;
    ++removed;
    if (dry_run) {
      std::cout << "would remove " << e.key << " (" << e.template_id << ")\n";
    } else {
      cassette.erase(e.key);
    }
  }
  std::cout << (dry_run ? "would remove " : "removed ") << removed << " of " << (cassette.size() + (dry_run ? 0 : removed))
            << " entries\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table question answering with language models"};
  app.require_subcommand(1);

  PipelineFlags run_flags, eval_flags;
  std::string table_path, table_format, question, task = "qa", id = "instance", trace_path = "trace.json";
  bool strict = false;
  auto* run = app.add_subcommand("run", "answer one question about one table");
  run->add_option("--table", table_path, "table file, or - for stdin")->required();
  run->add_option("--format", table_format, "markdown | csv | tsv | jsonl-table");
  run->add_option("--question", question, "question or statement")->required();
  run->add_option("--task", task, "qa | fact_verification");
  run->add_option("--id", id, "instance id recorded in the trace");
  run->add_option("--trace", trace_path, "trace output path (empty to skip)");
  run->add_flag("--strict", strict, "reject ragged tables");
  run_flags.attach(run);

  std::string dataset, dataset_format = "jsonl", out_dir = "eval-out";
  std::size_t parallelism = 1, limit = 0;
  bool buckets = false, cost = false;
  auto* eval = app.add_subcommand("eval", "score a dataset");
  eval->add_option("--dataset", dataset, "dataset file")->required();
  eval->add_option("--dataset-format", dataset_format, "jsonl | wikitq-tsv | tabfact-json");
  eval->add_option("--out", out_dir, "report and trace directory");
  eval->add_option("--parallelism", parallelism, "instances run concurrently");
  eval->add_option("--limit", limit, "evaluate only the first N instances");
  eval->add_flag("--buckets", buckets, "per-quartile accuracy by table size");
  eval->add_flag("--cost", cost, "predicted and tallied cost per instance");
  eval_flags.attach(eval);

  std::string norm_path, norm_format;
  bool norm_strict = false;
  auto* norm = app.add_subcommand("normalize", "print the normalized table");
  norm->add_option("table", norm_path, "table file, or - for stdin")->required();
  norm->add_option("--format", norm_format, "markdown | csv | tsv | jsonl-table");
  norm->add_flag("--strict", norm_strict, "reject ragged tables");

  std::string cassette_dir, traces;
  bool verbose = false, dry_run = false;
  auto* cassette = app.add_subcommand("cassette", "inspect or prune a recording");
  cassette->require_subcommand(1);
  auto* inspect = cassette->add_subcommand("inspect", "summarize entries");
  inspect->add_option("dir", cassette_dir, "cassette directory")->required();
  inspect->add_flag("-v,--verbose", verbose, "list every key");
  auto* prune = cassette->add_subcommand("prune", "drop entries no trace refers to");
  prune->add_option("dir", cassette_dir, "cassette directory")->required();
  prune->add_option("--traces", traces, "trace file or directory")->required();
  prune->add_flag("--dry-run", dry_run, "report without deleting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return run_command(run_flags, table_path, table_format, strict, question, task, id, trace_path);
    if (*eval) return eval_command(eval_flags, dataset, dataset_format, out_dir, parallelism, limit, buckets, cost);
    if (*norm) return normalize_command(norm_path, norm_format, norm_strict);
    if (*inspect) return cassette_inspect(cassette_dir, verbose);
    if (*prune) return cassette_prune(cassette_dir, traces, dry_run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
