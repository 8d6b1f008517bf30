#include <cstdio>
#include <set>
#include <sstream>

#include "masr/bench.hpp"
#include "masr/errors.hpp"

namespace masr {

EvalReport evaluate(std::span<const RunTrace> traces, std::span<const QaTask> tasks) {
  std::map<std::string, const QaTask*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.task_id, &t);
  std::set<std::string> seen;
  std::vector<std::string> unknown, missing, duplicated;
  for (const auto& tr : traces) {
    if (!by_id.contains(tr.task_id)) unknown.push_back(tr.task_id);
    if (!seen.insert(tr.task_id).second) duplicated.push_back(tr.task_id);
  }
  for (const auto& [id, _] : by_id) {
    if (!seen.contains(id)) missing.push_back(id);
  }
  if (!unknown.empty() || !missing.empty() || !duplicated.empty()) {
    const auto list = [](const std::vector<std::string>& ids) {
      std::string s;
      for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? ", " : "") + ids[i];
      if (ids.size() > 10) s += ", ...";
      return s;
    };
    std::string msg = "traces and tasks disagree:";
    if (!unknown.empty()) msg += " unknown tasks [" + list(unknown) + "]";
    if (!missing.empty()) msg += " missing traces [" + list(missing) + "]";
    if (!duplicated.empty()) msg += " duplicate traces [" + list(duplicated) + "]";
    throw Error(ErrorKind::IdMismatch, msg);
  }

  EvalReport r;
  r.n_tasks = traces.size();
  std::size_t total_rounds = 0;
  for (const auto& tr : traces) {
    const QaTask& task = *by_id.at(tr.task_id);
    int final_round = -1;
    for (const auto& round : tr.rounds) {
      if (round.verdict) final_round = round.round;
    }
    ++r.final_round_counts[final_round];
    ++r.termination_counts[std::string(to_string(tr.termination))];
    total_rounds += tr.rounds.size();
    if (!task.gold_index) continue;
    ++r.n_scored;
    if (tr.final_answer && *tr.final_answer == *task.gold_index) ++r.n_correct;
  }
  r.accuracy = r.n_scored ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_scored) : 0.0;
  r.mean_rounds = r.n_tasks ? static_cast<double>(total_rounds) / static_cast<double>(r.n_tasks) : 0.0;
  return r;
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json rounds = nlohmann::json::object();
  for (const auto& [round, n] : r.final_round_counts) rounds[round < 0 ? "none" : std::to_string(round)] = n;
  return {{"n_tasks", r.n_tasks},
          {"n_scored", r.n_scored},
          {"n_correct", r.n_correct},
          {"accuracy", r.accuracy},
          {"final_round_counts", rounds},
          {"mean_rounds", r.mean_rounds},
          {"termination_counts", r.termination_counts}};
}

std::string format_report_table(const EvalReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-22s %zu\n", "tasks", r.n_tasks);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %zu\n", "scored", r.n_scored);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %zu\n", "correct", r.n_correct);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %.4f\n", "accuracy", r.accuracy);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %.3f\n", "mean rounds", r.mean_rounds);
  out << line;
  for (const auto& [round, n] : r.final_round_counts) {
    const std::string label = round < 0 ? "answered: never" : "answered at round " + std::to_string(round);
    std::snprintf(line, sizeof line, "%-22s %zu\n", label.c_str(), n);
    out << line;
  }
  for (const auto& [term, n] : r.termination_counts) {
    const std::string label = "terminated: " + term;
    std::snprintf(line, sizeof line, "%-22s %zu\n", label.c_str(), n);
    out << line;
  }
  return out.str();
}

}  // namespace masr
