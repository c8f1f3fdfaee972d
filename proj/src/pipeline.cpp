#include "tablemaster/pipeline.hpp"

#include <algorithm>

namespace tablemaster {

TemplateRegistry load_templates(const PipelineConfig& config) {
  return config.template_dir.empty() ? TemplateRegistry::load_default()
                                     : TemplateRegistry::load_directory(config.template_dir);
}

std::shared_ptr<LmBackend> make_backend(const PipelineConfig& config) {
  config.validate();
  if (config.mode == CassetteMode::replay) {
    return std::make_shared<CassetteBackend>(CassetteMode::replay, std::make_shared<Cassette>(config.cassette_path),
                                             nullptr);
  }
  auto http = std::make_shared<HttpBackend>(config.http);
  if (config.mode == CassetteMode::record) {
    return std::make_shared<CassetteBackend>(CassetteMode::record, std::make_shared<Cassette>(config.cassette_path),
                                             http);
  }
  return http;
}

namespace {

nlohmann::json rows_json(const RowSet& rows) {
  return {{"indices", rows.indices},
          {"sql", rows.sql},
          {"empty_reason", rows.empty_reason ? nlohmann::json(*rows.empty_reason) : nlohmann::json(nullptr)},
          {"aggregate_fallback", rows.aggregate_fallback},
          {"warnings", rows.warnings}};
}

RowSet lookup_rows(const NormalizedTable& table, const InstanceInput& input, std::size_t k,
                   const PipelineConfig& config, LmSession& lm) {
  try {
    SqlEngine engine(table, config.sql_timeout);
    return row_lookup(table, input.question, k, lm, engine);
  } catch (const SqlError& e) {
    lm.warn(std::string("SQL engine unavailable: ") + e.what());
    return RowSet::all_rows(table.table.row_count(), "SQL engine unavailable");
  }
}

}  // namespace

PipelineRun run_pipeline(const InstanceInput& input, const PipelineConfig& config,
                         const TemplateRegistry& registry, LmBackend& backend) {
  PipelineRun run(input.table);
  run.id = input.id;
  run.question = input.question;
  run.task_kind = input.task_kind;
  run.answer = Answer{"", input.task_kind, true};
  LmSession lm(registry, backend, run.log, config.max_tokens);

  try {
    run.normalized = config.normalization ? normalize(input.table) : classify_only(input.table);
    const NormalizedTable& nt = *run.normalized;
    const std::size_t k = config.peek_size;

    run.structure = extract_structure(nt, k, lm);
    run.ranked = rank_columns(nt, input.question, k, lm);
    std::optional<std::string> key;
    if (!run.structure->key_column.empty()) key = run.structure->key_column;
    run.initial_columns = column_lookup(*run.ranked, input.question, config.b_max, lm, key);
    run.rows = lookup_rows(nt, input, k, config, lm);

    run.focus = reconstruct_focus(nt, input.question, *run.rows, run.initial_columns, *run.ranked, lm);
    run.verbalized = verbalize(*run.focus, lm);

    ReasoningOptions options{config.executor, config.full_table_fallback, config.reasoning_table};
    auto result = answer_adaptive(nt, *run.focus, *run.verbalized, input.question, input.task_kind, lm, options);
    run.answer = result.answer;
    run.reasoning = std::move(result.trace);

    run.observed.k = static_cast<double>(std::min(k, nt.table.row_count()));
    run.observed.n = static_cast<double>(nt.table.column_count());
    run.observed.e = static_cast<double>(run.focus->reconstruction_count);
    run.observed.a = static_cast<double>(run.focus->table.row_count());
    run.observed.b = static_cast<double>(run.focus->table.column_count());
    double fallback_area = run.reasoning->full_table_retry ? static_cast<double>(nt.table.row_count()) *
                                                                 static_cast<double>(nt.table.column_count())
                                                           : 0.0;
    run.tally = tally_cost(run.observed, fallback_area);
    run.predicted = predicted_cost(run.observed.k, run.observed.n, run.observed.e, run.observed.a, run.observed.b);
  } catch (const Error& e) {
    run.fatal_error = e.what();
    run.log.warn(std::string("pipeline aborted: ") + e.what());
  }
  return run;
}

nlohmann::json PipelineRun::to_json(const PipelineConfig& config) const {
  nlohmann::json j;
  j["id"] = id;
  j["question"] = question;
  j["task"] = tablemaster::to_string(task_kind);
  j["config"] = config.snapshot();
  j["input_table"] = nlohmann::json::parse(render_jsonl_table(input));
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : log.steps()) steps.push_back(tablemaster::to_json(s));
  j["steps"] = std::move(steps);
  j["warnings"] = log.warnings();
  if (normalized) {
    j["normalization"] = {{"transposed", normalized->transposed},
                          {"rows", normalized->table.row_count()},
                          {"columns", normalized->table.column_count()}};
  }
  if (structure) {
    j["structure"] = {{"headers", structure->headers},
                      {"key_column", structure->key_column},
                      {"peek_used", structure->peek_used}};
  }
  if (ranked) j["ranked_columns"] = ranked->order;
  j["initial_columns"] = initial_columns;
  if (rows) j["rows"] = rows_json(*rows);
  if (focus) {
    j["focus"] = {{"columns", focus->selected_columns},
                  {"a", focus->table.row_count()},
                  {"b", focus->table.column_count()},
                  {"e", focus->reconstruction_count},
                  {"estimations", focus->estimations},
                  {"condensation_ratio", focus->condensation_ratio},
                  {"hash", focus_hash(*focus)}};
  }
  if (verbalized) j["verbalized"] = {{"text", verbalized->text}, {"mechanical", verbalized->mechanical}};
  if (reasoning) j["reasoning"] = tablemaster::to_json(*reasoning);
  j["answer"] = {{"value", answer.value}, {"abstained", answer.abstained}};
  if (focus) {
    j["cost"] = {{"observed", tablemaster::to_json(observed)},
                 {"tally", tablemaster::to_json(tally)},
                 {"predicted", predicted}};
  }
  j["fatal_error"] = fatal_error ? nlohmann::json(*fatal_error) : nlohmann::json(nullptr);
  return j;
}

}  // namespace tablemaster
