#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tablemaster/table.hpp"

namespace tablemaster {

// How generated programs are run. The focus table is written as table.csv in
// the program's working directory; TM_TABLE_PATH holds its absolute path and
// TM_QUESTION the question.
struct ExecutorProfile {
  std::vector<std::string> interpreter = {"python3"};
  std::string extension = ".py";
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds grace{500};
  std::size_t memory_mb = 2048;
  std::size_t max_output_bytes = 1 << 20;
  std::filesystem::path scratch_root;  // empty: system temp directory
  std::size_t max_parallel = 4;         // concurrent child processes, process-wide
};

struct ExecutionResult {
  std::string stdout_text;
  std::string stderr_text;
  int exit_status = -1;
  std::chrono::milliseconds duration{0};
  bool timed_out = false;
  bool network_isolated = false;

  // Last non-empty stdout line.
  std::optional<std::string> candidate_answer() const;
};

class ExecError : public Error {
 public:
  ExecError(const std::string& what, ExecutionResult result) : Error(what), result_(std::move(result)) {}
  const ExecutionResult& result() const { return result_; }

 private:
  ExecutionResult result_;
};

#define TABLEMASTER_DEFINE_EXEC_ERROR(Name) \
  class Name : public ExecError {          \
   public:                                 \
    using ExecError::ExecError;            \
  };
TABLEMASTER_DEFINE_EXEC_ERROR(ExecTimeout)
TABLEMASTER_DEFINE_EXEC_ERROR(ExecNonZeroExit)
TABLEMASTER_DEFINE_EXEC_ERROR(ExecEmptyOutput)
#undef TABLEMASTER_DEFINE_EXEC_ERROR

// Runs the program in a fresh scratch directory that is removed afterwards.
// Never throws on program misbehaviour; inspect the result.
ExecutionResult run_sandboxed(const std::string& program, const Table& table, const std::string& question,
                              const ExecutorProfile& profile);

// run_sandboxed, then ExecTimeout / ExecNonZeroExit / ExecEmptyOutput when
// the result carries no usable answer.
ExecutionResult execute_program(const std::string& program, const Table& table, const std::string& question,
                                const ExecutorProfile& profile);

}  // namespace tablemaster
