#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tablemaster/config.hpp"
#include "tablemaster/cost.hpp"
#include "tablemaster/pipeline.hpp"

namespace tablemaster {

TABLEMASTER_DEFINE_ERROR(DatasetFormatError, Error)
TABLEMASTER_DEFINE_ERROR(TooFewValues, Error)

struct EvalInstance {
  std::string id;
  Table table;
  std::string question;
  std::vector<std::string> gold_answers;
  TaskKind task_kind = TaskKind::qa;
};

enum class DatasetFormat { jsonl, wikitq_tsv, tabfact_json };

DatasetFormat parse_dataset_format(std::string_view name);
std::string to_string(DatasetFormat format);

struct LoadedDataset {
  std::vector<EvalInstance> instances;
  std::size_t skipped = 0;
  std::vector<std::string> skip_reasons;
};

// jsonl: {"id", "table": {"header", "rows"}, "question", "answers", "task"?}
// wikitq-tsv: id / utterance / context / targetValue, context resolved next to
// the file or one directory up.
// tabfact-json: {"<csv name>": [[statements], [labels], caption]} with '#'
// delimited tables under all_csv/.
// Throws DatasetFormatError when nothing loads.
LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

std::string normalize_answer(std::string_view text);

// Parts split on '|' compare as multisets; numeric parts match within a
// relative tolerance of 1e-6.
bool exact_match(std::string_view prediction, const std::vector<std::string>& golds);
bool exact_match(const Answer& prediction, const std::vector<std::string>& golds);

enum class Bucket { small, medium, large, xl };
std::string to_string(Bucket b);

struct Buckets {
  std::array<double, 3> boundaries{};  // upper bounds of small, medium, large (inclusive)
  std::vector<Bucket> assignment;
};

// Empirical quartiles; a value equal to a boundary lands in the lower bucket.
Buckets bucketize(const std::vector<double>& values);

struct InstanceResult {
  std::string id;
  std::string prediction;
  bool abstained = false;
  std::vector<std::string> golds;
  bool correct = false;
  std::string strategy;  // empty when reasoning never ran
  SizeMetrics size;
  std::optional<double> condensation_ratio;
  std::optional<double> e;
  CostTally tally;
  double predicted_cost = 0;
  std::size_t cassette_misses = 0;
  std::size_t failed_calls = 0;
  std::optional<std::string> error;
};

struct BucketStats {
  std::size_t total = 0;
  std::size_t correct = 0;
  double upper = 0;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0;
  std::size_t skipped = 0;
  // dimension ("rows", "columns", "area", "tokens") -> small..xl; empty with fewer than 4 instances
  std::map<std::string, std::array<BucketStats, 4>> buckets;
  double mean_condensation = 0;
  double mean_e = 0;
  std::map<std::string, std::size_t> strategy_counts;
  double predicted_cost = 0;
  double tallied_cost = 0;
  double fallback_area = 0;
  std::size_t cassette_misses = 0;
  std::vector<InstanceResult> instances;  // input order

  nlohmann::json to_json() const;
  std::string to_text(bool with_buckets, bool with_cost) const;
};

struct EvalOptions {
  std::optional<std::filesystem::path> trace_dir;  // traces/<id>.json beneath it
  std::size_t parallelism = 1;
};

// Per-instance failures score as incorrect; the report does not depend on
// parallelism or completion order.
EvalReport evaluate(const std::vector<EvalInstance>& instances, const PipelineConfig& config,
                    const TemplateRegistry& registry, LmBackend& backend, const EvalOptions& options);

// File-name-safe form of an instance id.
std::string trace_file_name(std::string_view id);

}  // namespace tablemaster
