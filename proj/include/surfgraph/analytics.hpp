#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "protocol.hpp"
#include "responses.hpp"

namespace surfgraph {

struct Tally {
  std::uint64_t total = 0;
  std::uint64_t correct = 0;
  std::vector<double> elapsed_ms;

  void add(const Tally& o) {
    total += o.total;
    correct += o.correct;
    elapsed_ms.insert(elapsed_ms.end(), o.elapsed_ms.begin(), o.elapsed_ms.end());
  }

  double accuracy_pct() const { return total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0; }

  // Summed in sorted order so the result does not depend on record order.
  double mean_time_s() const {
    if (elapsed_ms.empty()) return 0.0;
    auto sorted = elapsed_ms;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    return sum / static_cast<double>(sorted.size()) / 1000.0;
  }
};

using CellKey = std::tuple<Technique, std::uint32_t>;
using TaskKey = std::tuple<Technique, std::uint32_t, Task>;

// Per-condition tallies. Accuracy and time pool both tasks per (technique, N);
// the per-task cells stay available for the gap and for per-task reporting.
class AnalyticsSummary {
 public:
  bool empty() const { return cells_.empty(); }

  void add(const TaskKey& key, bool correct, double elapsed_ms) {
    Tally& t = cells_[key];
    ++t.total;
    t.correct += correct ? 1 : 0;
    t.elapsed_ms.push_back(elapsed_ms);
  }

  void merge(const AnalyticsSummary& other) {
    for (const auto& [key, tally] : other.cells_) cells_[key].add(tally);
  }

  const std::map<TaskKey, Tally>& task_cells() const { return cells_; }

  std::map<CellKey, Tally> pooled() const {
    std::map<CellKey, Tally> out;
    for (const auto& [key, tally] : cells_) out[{std::get<0>(key), std::get<1>(key)}].add(tally);
    return out;
  }

  std::optional<double> accuracy_pct(Technique v, std::uint32_t n) const {
    auto cells = pooled();
    auto it = cells.find({v, n});
    if (it == cells.end()) return std::nullopt;
    return it->second.accuracy_pct();
  }

  std::optional<double> accuracy_pct(Technique v, std::uint32_t n, Task t) const {
    auto it = cells_.find({v, n, t});
    if (it == cells_.end()) return std::nullopt;
    return it->second.accuracy_pct();
  }

  std::optional<double> mean_time_s(Technique v, std::uint32_t n) const {
    auto cells = pooled();
    auto it = cells.find({v, n});
    if (it == cells.end()) return std::nullopt;
    return it->second.mean_time_s();
  }

  // Maximum minus discrimination accuracy in percentage points; undefined when
  // either task has no responses.
  std::map<CellKey, double> gap_pct() const {
    std::map<CellKey, double> out;
    for (const auto& [key, tally] : cells_) {
      const auto [v, n, task] = key;
      if (task != Task::maximum) continue;
      auto other = cells_.find({v, n, Task::discrimination});
      if (other == cells_.end()) continue;
      out[{v, n}] = tally.accuracy_pct() - other->second.accuracy_pct();
    }
    return out;
  }

  std::uint64_t count(Technique v, std::uint32_t n, Task t) const {
    auto it = cells_.find({v, n, t});
    return it == cells_.end() ? 0 : it->second.total;
  }

  friend bool operator==(const AnalyticsSummary& a, const AnalyticsSummary& b) { return a.to_json() == b.to_json(); }

  nlohmann::json to_json() const {
    if (empty()) return {{"empty", true}, {"conditions", nlohmann::json::array()}};
    const auto gaps = gap_pct();
    nlohmann::json conditions = nlohmann::json::array();
    for (const auto& [key, tally] : pooled()) {
      const auto [v, n] = key;
      nlohmann::json by_task = nlohmann::json::object();
      for (Task t : {Task::maximum, Task::discrimination}) {
        auto it = cells_.find({v, n, t});
        if (it == cells_.end()) continue;
        by_task[std::string(to_string(t))] = {{"correct", it->second.correct},
                                              {"total", it->second.total},
                                              {"accuracy_pct", it->second.accuracy_pct()},
                                              {"mean_time_s", it->second.mean_time_s()}};
      }
      nlohmann::json c = {{"technique", to_string(v)}, {"N", n},
                          {"correct", tally.correct}, {"total", tally.total},
                          {"accuracy_pct", tally.accuracy_pct()}, {"mean_time_s", tally.mean_time_s()},
                          {"by_task", by_task}};
      auto g = gaps.find(key);
      c["gap_pct"] = g == gaps.end() ? nlohmann::json(nullptr) : nlohmann::json(g->second);
      conditions.push_back(std::move(c));
    }
    return {{"empty", false}, {"conditions", conditions}};
  }

  std::string accuracy_csv() const {
    std::ostringstream out;
    out << "technique,N,correct,total,accuracy_pct\n";
    for (const auto& [key, t] : pooled()) {
      out << to_string(std::get<0>(key)) << ',' << std::get<1>(key) << ',' << t.correct << ',' << t.total << ','
          << t.accuracy_pct() << '\n';
    }
    return out.str();
  }

  std::string time_csv() const {
    std::ostringstream out;
    out << "technique,N,responses,mean_time_s\n";
    for (const auto& [key, t] : pooled()) {
      out << to_string(std::get<0>(key)) << ',' << std::get<1>(key) << ',' << t.total << ',' << t.mean_time_s()
          << '\n';
    }
    return out.str();
  }

  std::string gap_csv() const {
    std::ostringstream out;
    out << "technique,N,maximum_pct,discrimination_pct,gap_pct\n";
    for (const auto& [key, gap] : gap_pct()) {
      const auto [v, n] = key;
      out << to_string(v) << ',' << n << ',' << *accuracy_pct(v, n, Task::maximum) << ','
          << *accuracy_pct(v, n, Task::discrimination) << ',' << gap << '\n';
    }
    return out.str();
  }

  std::string by_task_csv() const {
    std::ostringstream out;
    out << "technique,N,task,correct,total,accuracy_pct,mean_time_s\n";
    for (const auto& [key, t] : cells_) {
      const auto [v, n, task] = key;
      out << to_string(v) << ',' << n << ',' << to_string(task) << ',' << t.correct << ',' << t.total << ','
          << t.accuracy_pct() << ',' << t.mean_time_s() << '\n';
    }
    return out.str();
  }

 private:
  std::map<TaskKey, Tally> cells_;
};

// Scores each response against its trial's correct_year.
inline AnalyticsSummary summarize(const std::vector<TrialResponse>& log, const PlanStore& plans) {
  AnalyticsSummary summary;
  for (const auto& r : log) {
    const auto* entry = plans.find_trial(r.trial_id);
    if (!entry) throw ValidationError("log references unknown trial '" + r.trial_id + "'");
    if (entry->trial.correct_year.empty()) throw ValidationError("trial '" + r.trial_id + "' has no answer key");
    const Trial& t = entry->trial;
    summary.add({t.technique, t.n_years, t.task}, r.chosen_year == t.correct_year, r.elapsed_ms);
  }
  return summary;
}

inline std::map<CellKey, double> accuracy_gap(const std::vector<TrialResponse>& log, const PlanStore& plans) {
  return summarize(log, plans).gap_pct();
}

}  // namespace surfgraph
