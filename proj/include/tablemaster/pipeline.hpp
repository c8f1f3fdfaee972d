#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tablemaster/config.hpp"
#include "tablemaster/content.hpp"
#include "tablemaster/cost.hpp"
#include "tablemaster/reasoning.hpp"

namespace tablemaster {

struct InstanceInput {
  std::string id;
  Table table;
  std::string question;
  TaskKind task_kind = TaskKind::qa;
};

struct PipelineRun {
  explicit PipelineRun(Table input_table) : input(std::move(input_table)) {}

  std::string id;
  std::string question;
  TaskKind task_kind = TaskKind::qa;
  Table input;
  Answer answer;
  std::optional<NormalizedTable> normalized;
  std::optional<StructureInfo> structure;
  std::optional<RankedColumns> ranked;
  std::vector<std::string> initial_columns;
  std::optional<RowSet> rows;
  std::optional<TableOfFocus> focus;
  std::optional<VerbalizedTable> verbalized;
  std::optional<ReasoningTrace> reasoning;
  TraceLog log;
  CostParameters observed;
  CostTally tally;
  double predicted = 0;
  std::optional<std::string> fatal_error;  // stage that could not degrade, e.g. a malformed template

  nlohmann::json to_json(const PipelineConfig& config) const;
};

// Structure understanding, content understanding, then reasoning. Model and
// executor failures degrade; only an unusable template registry is fatal, and
// even then the run ends with an abstained answer.
PipelineRun run_pipeline(const InstanceInput& input, const PipelineConfig& config,
                         const TemplateRegistry& registry, LmBackend& backend);

// Registry from config.template_dir or the bundled prompts.
TemplateRegistry load_templates(const PipelineConfig& config);

// HTTP backend wrapped by the cassette the mode asks for. Replay never
// constructs the HTTP client.
std::shared_ptr<LmBackend> make_backend(const PipelineConfig& config);

}  // namespace tablemaster
