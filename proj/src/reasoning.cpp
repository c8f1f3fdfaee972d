#include "tablemaster/reasoning.hpp"

#include <array>

#include "text_util.hpp"

namespace tablemaster {

std::string to_string(Strategy s) { return s == Strategy::symbolic ? "symbolic" : "textual"; }
std::string to_string(TaskKind k) { return k == TaskKind::fact_verification ? "fact_verification" : "qa"; }
std::string to_string(ReasoningTable r) { return r == ReasoningTable::full ? "full" : "focus"; }

TaskKind parse_task_kind(std::string_view name) {
  std::string n = detail::lower(detail::trim(name));
  if (n == "qa") return TaskKind::qa;
  if (n == "fact_verification" || n == "fact-verification" || n == "fv") return TaskKind::fact_verification;
  throw ConfigError("unknown task kind '" + std::string(name) + "'");
}

ReasoningTable parse_reasoning_table(std::string_view name) {
  std::string n = detail::lower(detail::trim(name));
  if (n == "focus") return ReasoningTable::focus;
  if (n == "full") return ReasoningTable::full;
  throw ConfigError("unknown reasoning table '" + std::string(name) + "'");
}

nlohmann::json to_json(const ReasoningTrace& trace) {
  nlohmann::json j;
  j["strategy"] = to_string(trace.strategy);
  j["guidance"] = trace.guidance ? nlohmann::json(trace.guidance->text) : nlohmann::json(nullptr);
  j["program"] = trace.program ? nlohmann::json(*trace.program) : nlohmann::json(nullptr);
  if (trace.execution) {
    const auto& r = *trace.execution;
    j["execution"] = {{"stdout", r.stdout_text},
                      {"stderr", r.stderr_text},
                      {"exit_status", r.exit_status},
                      {"timed_out", r.timed_out}};
  } else {
    j["execution"] = nullptr;
  }
  j["execution_error"] = trace.execution_error ? nlohmann::json(*trace.execution_error) : nlohmann::json(nullptr);
  j["fallbacks"] = trace.fallbacks;
  j["full_table_retry"] = trace.full_table_retry;
  j["answer_source"] = trace.answer_source;
  return j;
}

std::string task_instruction(TaskKind kind) {
  if (kind == TaskKind::fact_verification) {
    return "Decide whether the statement is supported by the table. Conclude with True or False.";
  }
  return "Answer the question with a short answer taken from or computed over the table.";
}

Strategy assess_strategy(const TableOfFocus& focus, const VerbalizedTable& verbal, const std::string& question,
                         LmSession& lm) {
  auto reply = lm.try_complete(TemplateId::strategy_assessment, {{"table", render_markdown(focus.table)},
                                                                 {"verbalized", verbal.text},
                                                                 {"question", question}});
  if (!reply) return Strategy::textual;
  static const std::map<std::string, std::string> synonyms = {
      {"program", "symbolic"},     {"code", "symbolic"},      {"python", "symbolic"},
      {"sql", "symbolic"},         {"calculation", "symbolic"}, {"computation", "symbolic"},
      {"retrieval", "textual"},    {"chain-of-thought", "textual"}, {"lookup", "textual"},
  };
  try {
    return parse_choice(reply->text, {"textual", "symbolic"}, synonyms) == "symbolic" ? Strategy::symbolic
                                                                                       : Strategy::textual;
  } catch (const UnparseableReply&) {
    lm.warn("UnparseableReply: strategy unclear; using textual");
    return Strategy::textual;
  }
}

std::string textual_reasoning(const Table& table, const VerbalizedTable& verbal, const std::string& question,
                              TaskKind kind, LmSession& lm) {
  return lm
      .complete(TemplateId::textual_reasoning, {{"table", render_markdown(table)},
                                                {"verbalized", verbal.text},
                                                {"question", question},
                                                {"task_instruction", task_instruction(kind)}})
      .text;
}

Guidance generate_guidance(const Table& table, const VerbalizedTable& verbal, const std::string& question,
                           LmSession& lm) {
  auto reply = lm.try_complete(TemplateId::textual_guidance,
                               {{"table", render_markdown(table)}, {"verbalized", verbal.text}, {"question", question}});
  if (reply && !detail::trim(reply->text).empty()) return {reply->text};
  lm.warn("empty guidance; using default outline");
  return {"Answer step by step."};
}

std::string symbolic_reasoning(const Table& table, const VerbalizedTable& verbal, const std::string& question,
                               const Guidance& guidance, LmSession& lm) {
  auto reply = lm.complete(TemplateId::symbolic_reasoning, {{"table", render_markdown(table)},
                                                            {"verbalized", verbal.text},
                                                            {"question", question},
                                                            {"guidance", guidance.text}});
  return extract_code_block(reply.text);
}

bool declares_no_answer(std::string_view text) {
  static constexpr std::array<std::string_view, 10> phrases = {
      "cannot answer",       "can't answer",     "cannot be answered", "cannot be determined",
      "not in the table",    "does not contain", "unable to",          "not enough information",
      "insufficient information", "no answer"};
  std::string low = detail::lower(text);
  for (auto p : phrases) {
    if (detail::find_word(low, p, 0) != std::string::npos) return true;
  }
  return false;
}

namespace {

std::string last_nonempty_line(std::string_view text) {
  auto lines = detail::split_lines(text);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto t = detail::trim(*it);
    if (!t.empty()) return std::string(t);
  }
  return {};
}

Answer abstain(TaskKind kind) { return Answer{"", kind, true}; }

}  // namespace

Answer format_answer(const Table& table, const std::string& question, const std::string& raw, TaskKind kind,
                     LmSession& lm) {
  auto reply = lm.try_complete(TemplateId::answer_formatting, {{"table", render_markdown(table)},
                                                               {"question", question},
                                                               {"reasoning", raw},
                                                               {"task_instruction", task_instruction(kind)}});
  std::string formatted;
  if (reply) {
    formatted = last_nonempty_line(reply->text);
  } else {
    lm.warn("answer formatting failed; using last line of the reasoning");
    formatted = last_nonempty_line(raw);
  }
  if (formatted.empty()) throw EmptyAnswer("formatted answer is blank");
  if (declares_no_answer(formatted)) return abstain(kind);

  if (kind == TaskKind::fact_verification) {
    static const std::map<std::string, std::string> synonyms = {
        {"yes", "True"},        {"supported", "True"},      {"entailed", "True"},  {"holds", "True"},
        {"correct", "True"},    {"no", "False"},            {"refuted", "False"},  {"not supported", "False"},
        {"incorrect", "False"}, {"does not hold", "False"}, {"wrong", "False"}};
    static constexpr std::string_view negations[] = {"not true", "not correct", "not supported", "does not hold",
                                                     "not entailed"};
    const std::string low = detail::lower(formatted);
    for (auto n : negations) {
      if (detail::find_word(low, n, 0) != std::string::npos) return Answer{"False", kind, false};
    }
    try {
      return Answer{parse_choice(formatted, {"True", "False"}, synonyms), kind, false};
    } catch (const UnparseableReply&) {
      lm.warn("UnparseableReply: verdict is neither True nor False");
      return abstain(kind);
    }
  }
  std::string value(detail::trim(formatted));
  static constexpr std::string_view prefixes[] = {"final answer:", "answer:"};
  for (auto p : prefixes) {
    if (detail::lower(value).rfind(p, 0) == 0) {
      value = std::string(detail::trim(std::string_view(value).substr(p.size())));
      break;
    }
  }
  if (value.empty()) throw EmptyAnswer("formatted answer is blank");
  return Answer{value, kind, false};
}

AdaptiveResult answer_adaptive(const NormalizedTable& table, const TableOfFocus& focus,
                               const VerbalizedTable& verbal, const std::string& question, TaskKind kind,
                               LmSession& lm, const ReasoningOptions& options) {
  AdaptiveResult out;
  if (verbal.source_focus_hash != focus_hash(focus)) {
    lm.warn("verbalized table does not describe the current focus table");
  }
  const bool use_full = options.reasoning_table == ReasoningTable::full;
  const Table& reasoning_table = use_full ? table.table : focus.table;

  auto format_or_abstain = [&](const Table& t, const std::string& raw) {
    try {
      return format_answer(t, question, raw, kind, lm);
    } catch (const EmptyAnswer&) {
      lm.warn("EmptyAnswer");
      return abstain(kind);
    }
  };
  auto run_textual = [&](const Table& t) -> std::optional<Answer> {
    try {
      return format_or_abstain(t, textual_reasoning(t, verbal, question, kind, lm));
    } catch (const LmError&) {
      return std::nullopt;
    }
  };

  std::optional<Answer> answer;
  out.trace.strategy = assess_strategy(focus, verbal, question, lm);
  if (out.trace.strategy == Strategy::symbolic) {
    out.trace.guidance = generate_guidance(reasoning_table, verbal, question, lm);
    try {
      out.trace.program = symbolic_reasoning(reasoning_table, verbal, question, *out.trace.guidance, lm);
      ExecutionResult result = execute_program(*out.trace.program, reasoning_table, question, options.profile);
      out.trace.execution = result;
      answer = format_or_abstain(reasoning_table, *result.candidate_answer());
      out.trace.answer_source = "symbolic";
    } catch (const ExecError& e) {
      out.trace.execution = e.result();
      out.trace.execution_error = e.what();
      lm.warn(std::string("executor failure: ") + e.what());
    } catch (const LmError&) {
      out.trace.execution_error = "program generation failed";
    } catch (const Error& e) {
      out.trace.execution_error = e.what();
      lm.warn(std::string("executor unavailable: ") + e.what());
    }
    if (!answer) {
      out.trace.fallbacks.push_back("textual");
      answer = run_textual(reasoning_table);
      if (answer) out.trace.answer_source = "textual";
    }
  } else {
    answer = run_textual(reasoning_table);
    if (answer) out.trace.answer_source = "textual";
  }

  const bool needs_retry = !answer || answer->abstained || focus.table.row_count() == 0;
  if (needs_retry && options.full_table_fallback && !use_full) {
    out.trace.fallbacks.push_back("full_table");
    out.trace.full_table_retry = true;
    auto retry = run_textual(table.table);
    if (retry && (!retry->abstained || !answer || answer->abstained)) {
      answer = retry;
      out.trace.answer_source = "full_table";
    }
  }
  out.answer = answer ? *answer : abstain(kind);
  if (out.answer.abstained) out.trace.answer_source = "none";
  return out;
}

}  // namespace tablemaster
