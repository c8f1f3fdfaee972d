#include "tablemaster/evaluation.hpp"

#include "tablemaster/hash.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <thread>

#include "text_util.hpp"

namespace tablemaster {

namespace fs = std::filesystem;

namespace {

std::string collapse_space(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : detail::trim(s)) {
    if (detail::is_space(c)) {
      pending = true;
      continue;
    }
    if (pending && !out.empty()) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

std::string canonical_number(const std::string& s) {
  static const std::regex number(R"(^[+-]?(\d{1,3}(,\d{3})+|\d+)(\.\d+)?$)");
  if (!std::regex_match(s, number)) return s;
  std::string out;
  for (char c : s) {
    if (c != ',') out += c;
  }
  if (out.front() == '+') out.erase(0, 1);
  if (auto dot = out.find('.'); dot != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  if (out == "-0") out = "0";
  return out;
}

std::string normalize_once(std::string_view text) {
  std::string s = collapse_space(detail::lower(text));
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  if (!s.empty() && s.back() == '.') s.pop_back();
  s = collapse_space(s);
  return canonical_number(s);
}

std::optional<double> as_number(const std::string& normalized) {
  static const std::regex number(R"(^-?\d+(\.\d+)?$)");
  if (!std::regex_match(normalized, number)) return std::nullopt;
  return std::stod(normalized);
}

bool part_equal(const std::string& a, const std::string& b) {
  if (a == b) return true;
  auto x = as_number(a);
  auto y = as_number(b);
  if (!x || !y) return false;
  return std::abs(*x - *y) <= 1e-6 * std::max(std::abs(*x), std::abs(*y));
}

std::vector<std::string> answer_parts(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto bar = text.find('|', start);
    parts.push_back(normalize_answer(text.substr(start, bar == std::string_view::npos ? bar : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return parts;
}

bool multiset_match(std::vector<std::string> pred, std::vector<std::string> gold) {
  if (pred.size() != gold.size()) return false;
  std::vector<bool> used(gold.size(), false);
  for (const auto& p : pred) {
    bool found = false;
    for (std::size_t i = 0; i < gold.size() && !found; ++i) {
      if (!used[i] && part_equal(p, gold[i])) used[i] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string current(text);
  while (true) {
    std::string next = normalize_once(current);
    if (next == current) return next;
    current = std::move(next);
  }
}

bool exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
  auto pred = answer_parts(prediction);
  for (const auto& g : golds) {
    if (multiset_match(pred, answer_parts(g))) return true;
  }
  return false;
}

bool exact_match(const Answer& prediction, const std::vector<std::string>& golds) {
  if (prediction.abstained) return false;
  return exact_match(prediction.value, golds);
}

std::string to_string(Bucket b) {
  switch (b) {
    case Bucket::small: return "small";
    case Bucket::medium: return "medium";
    case Bucket::large: return "large";
    case Bucket::xl: return "xl";
  }
  return "small";
}

Buckets bucketize(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 4) throw TooFewValues("bucketize needs at least 4 values, got " + std::to_string(n));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  Buckets out;
  for (std::size_t i = 1; i <= 3; ++i) {
    std::size_t rank = (n * i + 3) / 4;  // ceil(n·i/4)
    out.boundaries[i - 1] = sorted[rank - 1];
  }
  out.assignment.reserve(n);
  for (double v : values) {
    std::size_t b = 0;
    while (b < 3 && v > out.boundaries[b]) ++b;
    out.assignment.push_back(static_cast<Bucket>(b));
  }
  return out;
}

std::string trace_file_name(std::string_view id) {
  std::string out;
  bool rewritten = false;
  for (char c : id) {
    bool keep = detail::is_alnum(c) || c == '-' || c == '_' || c == '.';
    out += keep ? c : '_';
    rewritten = rewritten || !keep;
  }
  if (out.empty() || out.front() == '.') {
    out.insert(0, "_");
    rewritten = true;
  }
  // Rewritten ids could collide with ids that were already safe.
  if (rewritten) out += "~" + sha256_hex(id).substr(0, 10);
  return out + ".json";
}

namespace {

InstanceResult score(const EvalInstance& inst, const PipelineRun& run) {
  InstanceResult r;
  r.id = inst.id;
  r.prediction = run.answer.value;
  r.abstained = run.answer.abstained;
  r.golds = inst.gold_answers;
  r.correct = exact_match(run.answer, inst.gold_answers);
  if (run.reasoning) r.strategy = to_string(run.reasoning->strategy);
  r.size = measure(inst.table);
  if (run.focus) {
    r.condensation_ratio = run.focus->condensation_ratio;
    r.e = static_cast<double>(run.focus->reconstruction_count);
    r.tally = run.tally;
    r.predicted_cost = run.predicted;
  }
  r.cassette_misses = run.log.cassette_misses();
  r.failed_calls = run.log.failed_calls();
  r.error = run.fatal_error;
  return r;
}

void write_trace(const fs::path& dir, const std::string& id, const nlohmann::json& trace) {
  fs::create_directories(dir);
  fs::path target = dir / trace_file_name(id);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write trace " + tmp.string());
    out << trace.dump(2) << '\n';
  }
  fs::rename(tmp, target);
}

std::string fixed(double v, int digits) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

}  // namespace

EvalReport evaluate(const std::vector<EvalInstance>& instances, const PipelineConfig& config,
                    const TemplateRegistry& registry, LmBackend& backend, const EvalOptions& options) {
  config.validate();
  std::vector<InstanceResult> results(instances.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= instances.size()) return;
      const auto& inst = instances[i];
      try {
        std::optional<PipelineRun> run;
        try {
          run.emplace(run_pipeline(InstanceInput{inst.id, inst.table, inst.question, inst.task_kind}, config,
                                   registry, backend));
        } catch (const ConfigError&) {
          throw;
        } catch (const std::exception& e) {
          run.emplace(inst.table);
          run->id = inst.id;
          run->question = inst.question;
          run->task_kind = inst.task_kind;
          run->answer = Answer{"", inst.task_kind, true};
          run->fatal_error = e.what();
        }
        results[i] = score(inst, *run);
        if (options.trace_dir) {
          auto trace = run->to_json(config);
          trace["gold_answers"] = inst.gold_answers;
          trace["correct"] = results[i].correct;
          write_trace(*options.trace_dir / "traces", inst.id, trace);
        }
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!failure) failure = std::current_exception();
        next = instances.size();
        return;
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(instances.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  EvalReport report;
  report.total = results.size();
  double condensation_sum = 0, e_sum = 0;
  std::size_t focus_runs = 0;
  for (const auto& r : results) {
    report.correct += r.correct ? 1 : 0;
    report.strategy_counts[r.strategy.empty() ? "none" : r.strategy] += 1;
    if (r.condensation_ratio) {
      condensation_sum += *r.condensation_ratio;
      e_sum += *r.e;
      ++focus_runs;
    }
    report.predicted_cost += r.predicted_cost;
    report.tallied_cost += r.tally.total();
    report.fallback_area += r.tally.fallback_area;
    report.cassette_misses += r.cassette_misses;
  }
  report.accuracy = report.total ? static_cast<double>(report.correct) / static_cast<double>(report.total) : 0.0;
  report.mean_condensation = focus_runs ? condensation_sum / static_cast<double>(focus_runs) : 0.0;
  report.mean_e = focus_runs ? e_sum / static_cast<double>(focus_runs) : 0.0;

  if (results.size() >= 4) {
    auto add_dimension = [&](const std::string& name, auto field) {
      std::vector<double> values;
      for (const auto& r : results) values.push_back(static_cast<double>(r.size.*field));
      Buckets b = bucketize(values);
      std::array<BucketStats, 4> stats{};
      for (std::size_t i = 0; i < results.size(); ++i) {
        auto& s = stats[static_cast<std::size_t>(b.assignment[i])];
        ++s.total;
        s.correct += results[i].correct ? 1 : 0;
      }
      for (std::size_t q = 0; q < 3; ++q) stats[q].upper = b.boundaries[q];
      stats[3].upper = *std::max_element(values.begin(), values.end());
      report.buckets[name] = stats;
    };
    add_dimension("rows", &SizeMetrics::row_count);
    add_dimension("columns", &SizeMetrics::column_count);
    add_dimension("area", &SizeMetrics::area);
    add_dimension("tokens", &SizeMetrics::token_estimate);
  }
  report.instances = std::move(results);
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["total"] = total;
  j["correct"] = correct;
  j["accuracy"] = accuracy;
  j["skipped"] = skipped;
  nlohmann::json b = nlohmann::json::object();
  for (const auto& [dim, stats] : buckets) {
    nlohmann::json d = nlohmann::json::object();
    for (std::size_t q = 0; q < 4; ++q) {
      const auto& s = stats[q];
      d[to_string(static_cast<Bucket>(q))] = {
          {"total", s.total},
          {"correct", s.correct},
          {"accuracy", s.total ? static_cast<double>(s.correct) / static_cast<double>(s.total) : 0.0},
          {"upper", s.upper}};
    }
    b[dim] = std::move(d);
  }
  j["buckets"] = std::move(b);
  j["mean_condensation_ratio"] = mean_condensation;
  j["mean_e"] = mean_e;
  j["strategy_counts"] = strategy_counts;
  j["cost"] = {{"predicted", predicted_cost}, {"tallied", tallied_cost}, {"fallback_area", fallback_area}};
  j["cassette_misses"] = cassette_misses;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : instances) {
    list.push_back({{"id", r.id},
                    {"prediction", r.prediction},
                    {"abstained", r.abstained},
                    {"golds", r.golds},
                    {"correct", r.correct},
                    {"strategy", r.strategy},
                    {"rows", r.size.row_count},
                    {"columns", r.size.column_count},
                    {"condensation_ratio", r.condensation_ratio ? nlohmann::json(*r.condensation_ratio) : nlohmann::json(nullptr)},
                    {"e", r.e ? nlohmann::json(*r.e) : nlohmann::json(nullptr)},
                    {"predicted_cost", r.predicted_cost},
                    {"tallied_cost", r.tally.total()},
                    {"cassette_misses", r.cassette_misses},
                    {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)}});
  }
  j["instances"] = std::move(list);
  return j;
}

std::string EvalReport::to_text(bool with_buckets, bool with_cost) const {
  std::ostringstream o;
  o << "instances: " << total << " (skipped " << skipped << ")\n";
  o << "accuracy:  " << fixed(accuracy, 4) << " (" << correct << "/" << total << ")\n";
  o << "mean condensation ratio: " << fixed(mean_condensation, 4) << "\n";
  o << "mean e: " << fixed(mean_e, 3) << "\n";
  o << "strategies:";
  for (const auto& [name, count] : strategy_counts) o << ' ' << name << '=' << count;
  o << "\ncassette misses: " << cassette_misses << "\n";
  if (with_buckets) {
    if (buckets.empty()) {
      o << "buckets: need at least 4 instances\n";
    } else {
      o << "\n" << std::left << std::setw(10) << "dimension";
      for (std::size_t q = 0; q < 4; ++q) o << std::setw(22) << to_string(static_cast<Bucket>(q));
      o << "\n";
      for (const auto& [dim, stats] : buckets) {
        o << std::setw(10) << dim;
        for (const auto& s : stats) {
          std::string cell = "<=" + fixed(s.upper, 0) + " " + std::to_string(s.correct) + "/" + std::to_string(s.total);
          o << std::setw(22) << cell;
        }
        o << "\n";
      }
    }
  }
  if (with_cost) {
    o << "\n" << std::left << std::setw(40) << "id" << std::right << std::setw(12) << "predicted" << std::setw(12)
      << "tallied" << "\n";
    for (const auto& r : instances) {
      o << std::left << std::setw(40) << r.id << std::right << std::setw(12) << fixed(r.predicted_cost, 1)
        << std::setw(12) << fixed(r.tally.total(), 1) << "\n";
    }
    o << std::left << std::setw(40) << "total" << std::right << std::setw(12) << fixed(predicted_cost, 1)
      << std::setw(12) << fixed(tallied_cost, 1) << "\n";
    o << "full-table fallback area: " << fixed(fallback_area, 1) << "\n";
  }
  return o.str();
}

}  // namespace tablemaster
