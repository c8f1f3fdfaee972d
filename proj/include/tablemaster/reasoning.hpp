#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tablemaster/content.hpp"
#include "tablemaster/executor.hpp"

namespace tablemaster {

enum class Strategy { textual, symbolic };
enum class TaskKind { qa, fact_verification };
enum class ReasoningTable { focus, full };

std::string to_string(Strategy s);
std::string to_string(TaskKind k);
std::string to_string(ReasoningTable r);
TaskKind parse_task_kind(std::string_view name);
ReasoningTable parse_reasoning_table(std::string_view name);

struct Guidance {
  std::string text;
};

struct Answer {
  std::string value;
  TaskKind task_kind = TaskKind::qa;
  bool abstained = false;
};

TABLEMASTER_DEFINE_ERROR(EmptyAnswer, Error)

struct ReasoningTrace {
  Strategy strategy = Strategy::textual;
  std::optional<Guidance> guidance;
  std::optional<std::string> program;
  std::optional<ExecutionResult> execution;
  std::optional<std::string> execution_error;
  std::vector<std::string> fallbacks;  // "textual", "full_table"
  bool full_table_retry = false;
  std::string answer_source;           // "symbolic", "textual" or "full_table"
};

// Omits duration and scratch paths so replayed traces stay byte-identical.
nlohmann::json to_json(const ReasoningTrace& trace);

struct ReasoningOptions {
  ExecutorProfile profile;
  bool full_table_fallback = true;
  ReasoningTable reasoning_table = ReasoningTable::focus;
};

std::string task_instruction(TaskKind kind);

// Unparseable or failed replies choose textual.
Strategy assess_strategy(const TableOfFocus& focus, const VerbalizedTable& verbal, const std::string& question,
                         LmSession& lm);

// Raw step-by-step reply. LmError propagates.
std::string textual_reasoning(const Table& table, const VerbalizedTable& verbal, const std::string& question,
                              TaskKind kind, LmSession& lm);

Guidance generate_guidance(const Table& table, const VerbalizedTable& verbal, const std::string& question,
                           LmSession& lm);

// Program text from the reply's first fence. LmError propagates.
std::string symbolic_reasoning(const Table& table, const VerbalizedTable& verbal, const std::string& question,
                               const Guidance& guidance, LmSession& lm);

// Phrases such as "cannot answer" or "not in the table".
bool declares_no_answer(std::string_view text);

// Throws EmptyAnswer when the condensed answer is blank.
Answer format_answer(const Table& table, const std::string& question, const std::string& raw, TaskKind kind,
                     LmSession& lm);

struct AdaptiveResult {
  Answer answer;
  ReasoningTrace trace;
};

// Never throws on model or executor misbehaviour.
AdaptiveResult answer_adaptive(const NormalizedTable& table, const TableOfFocus& focus,
                               const VerbalizedTable& verbal, const std::string& question, TaskKind kind,
                               LmSession& lm, const ReasoningOptions& options);

}  // namespace tablemaster
