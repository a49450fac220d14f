#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "layout.hpp"
#include "random.hpp"
#include "raster.hpp"

namespace surfgraph {

enum class Task { maximum, discrimination };

inline constexpr std::string_view to_string(Task t) {
  return t == Task::maximum ? "maximum" : "discrimination";
}

inline Task task_from_string(std::string_view s) {
  if (s == "maximum") return Task::maximum;
  if (s == "discrimination") return Task::discrimination;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

struct Probe {
  std::string year_label;
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Probe&, const Probe&) = default;
};

struct Trial {
  std::string trial_id;
  Technique technique = Technique::shared_surface;
  std::uint32_t n_years = 2;
  Task task = Task::maximum;
  std::vector<std::string> years;
  std::vector<Probe> probes;  // one per year, same order as years
  std::string correct_year;
  std::vector<std::string> options;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct StudyPlan {
  std::string participant_id;
  std::uint64_t seed = 0;
  std::vector<Trial> trials;

  friend bool operator==(const StudyPlan&, const StudyPlan&) = default;
};

// Each of the 18 (technique, N, task) conditions runs this many times.
inline constexpr int kRepetitions = 2;
inline constexpr std::array<std::uint32_t, 3> kYearCounts{2, 3, 4};
inline constexpr std::size_t kTrialsPerPlan = kTechniques.size() * kYearCounts.size() * 2 * kRepetitions;

// Winning probe must beat every other probe by this fraction of the dataset max.
inline constexpr double kWinnerMarginFraction = 0.02;
inline constexpr int kMaxProbeAttempts = 1000;

inline double probe_value(const Dataset& dataset, const Probe& probe) {
  const auto year = dataset.find(probe.year_label);
  if (!year) throw ValidationError("probe references unknown year '" + probe.year_label + "'");
  const HeightField& f = dataset[*year];
  if (probe.row >= f.n_rows() || probe.col >= f.n_cols()) throw ValidationError("probe outside the grid");
  if (f.is_nodata(probe.row, probe.col)) throw ValidationError("probe lies on a nodata cell");
  return f.value(probe.row, probe.col);
}

// Year whose probe value is strictly greatest.
inline std::string ground_truth(const Trial& trial, const Dataset& dataset) {
  if (trial.probes.empty()) throw ValidationError("trial has no probes");
  std::size_t best = 0;
  double best_value = probe_value(dataset, trial.probes[0]);
  bool tied = false;
  for (std::size_t i = 1; i < trial.probes.size(); ++i) {
    const double v = probe_value(dataset, trial.probes[i]);
    if (v > best_value) {
      best = i;
      best_value = v;
      tied = false;
    } else if (v == best_value) {
      tied = true;
    }
  }
  if (tied) throw TieError("trial " + trial.trial_id + ": tie for the highest probe value");
  return trial.probes[best].year_label;
}

inline std::string condition_name(Technique technique, std::uint32_t n_years, Task task) {
  return std::string(to_string(technique)) + "/N=" + std::to_string(n_years) + "/" + std::string(to_string(task));
}

// Draws probes from valid cells (maximum: one cell shared by all years;
// discrimination: a distinct cell per year) and redraws until the winner
// margin holds. Years are the chronologically first n_years of the dataset.
inline Trial generate_trial(const Dataset& dataset, Technique technique, std::uint32_t n_years, Task task,
                            std::uint64_t rng_seed) {
  const std::string condition = condition_name(technique, n_years, task);
  if (n_years < 2) throw ConfigError("a trial compares at least 2 years");
  if (dataset.size() < n_years) {
    throw ValidationError(condition + ": dataset has only " + std::to_string(dataset.size()) + " years");
  }

  Trial trial;
  trial.trial_id = std::string(to_string(technique)) + "-n" + std::to_string(n_years) + "-" +
                   std::string(to_string(task)) + "-" + std::to_string(rng_seed);
  trial.technique = technique;
  trial.n_years = n_years;
  trial.task = task;
  trial.rng_seed = rng_seed;
  for (std::uint32_t i = 0; i < n_years; ++i) trial.years.push_back(dataset[i].year_label());
  trial.options = trial.years;

  const GridSpec& g = dataset.grid();
  // Candidate cells per year; for maximum, only cells valid in every year.
  std::vector<std::vector<std::size_t>> candidates(n_years);
  for (std::size_t cell = 0; cell < g.size(); ++cell) {
    bool all_valid = true;
    for (std::uint32_t y = 0; y < n_years; ++y) {
      const bool valid = !dataset[y].nodata_mask()[cell];
      all_valid = all_valid && valid;
      if (task == Task::discrimination && valid) candidates[y].push_back(cell);
    }
    if (task == Task::maximum && all_valid) candidates[0].push_back(cell);
  }
  const std::size_t needed = task == Task::maximum ? 1 : n_years;
  for (std::size_t y = 0; y < needed; ++y) {
    if (candidates[y].empty()) throw GenerationError(condition + ": not enough valid cells to place probes");
  }

  const double margin = kWinnerMarginFraction * dataset.global_max();
  Rng rng(mix_seed(rng_seed));
  for (int attempt = 0; attempt < kMaxProbeAttempts; ++attempt) {
    std::vector<std::size_t> cells(n_years);
    if (task == Task::maximum) {
      std::fill(cells.begin(), cells.end(), candidates[0][rng.index(candidates[0].size())]);
    } else {
      for (std::uint32_t y = 0; y < n_years; ++y) cells[y] = candidates[y][rng.index(candidates[y].size())];
      auto sorted = cells;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    }

    std::vector<double> values(n_years);
    for (std::uint32_t y = 0; y < n_years; ++y) values[y] = dataset[y].values()[cells[y]];
    auto top = std::max_element(values.begin(), values.end());
    bool decisive = true;
    for (auto it = values.begin(); it != values.end(); ++it) {
      if (it != top && !(*top > *it && *top - *it >= margin)) decisive = false;
    }
    if (!decisive) continue;

    trial.probes.clear();
    for (std::uint32_t y = 0; y < n_years; ++y) {
      trial.probes.push_back({trial.years[y], cells[y] / g.n_cols, cells[y] % g.n_cols});
    }
    trial.correct_year = ground_truth(trial, dataset);
    return trial;
  }
  throw GenerationError(condition + ": no probe set with a decisive winner after " +
                        std::to_string(kMaxProbeAttempts) + " attempts (data too flat or tied)");
}

inline std::string plan_trial_id(std::string_view participant_id, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", index + 1);
  return std::string(participant_id) + "-t" + buf;
}

// Technique blocks in random order; within a block all maximum trials come
// first, and each task group holds N in {2,3,4} twice in random order.
inline StudyPlan build_study_plan(const Dataset& dataset, const std::string& participant_id, std::uint64_t seed) {
  if (dataset.size() < kYearCounts.back()) {
    throw ValidationError("study plans need a dataset with at least " + std::to_string(kYearCounts.back()) + " years");
  }
  StudyPlan plan;
  plan.participant_id = participant_id;
  plan.seed = seed;
  Rng rng(mix_seed(hash_text(participant_id) ^ mix_seed(seed)));

  std::vector<Technique> blocks(kTechniques.begin(), kTechniques.end());
  rng.shuffle(blocks);
  for (Technique technique : blocks) {
    for (Task task : {Task::maximum, Task::discrimination}) {
      std::vector<std::uint32_t> counts;
      for (int rep = 0; rep < kRepetitions; ++rep) counts.insert(counts.end(), kYearCounts.begin(), kYearCounts.end());
      rng.shuffle(counts);
      for (std::uint32_t n : counts) {
        // 53-bit seeds survive a round trip through JavaScript numbers.
        Trial trial = generate_trial(dataset, technique, n, task, rng.next() >> 11);
        trial.trial_id = plan_trial_id(participant_id, plan.trials.size());
        plan.trials.push_back(std::move(trial));
      }
    }
  }
  return plan;
}

// JSON; correct_year is only written when with_answers is set.
inline nlohmann::json trial_to_json(const Trial& t, bool with_answers = true) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : t.probes) probes.push_back({{"year_label", p.year_label}, {"row", p.row}, {"col", p.col}});
  nlohmann::json j = {{"trial_id", t.trial_id}, {"technique", to_string(t.technique)}, {"n_years", t.n_years},
                      {"task", to_string(t.task)}, {"years", t.years}, {"probes", probes},
                      {"options", t.options}, {"rng_seed", t.rng_seed}};
  if (with_answers) j["correct_year"] = t.correct_year;
  return j;
}

inline Trial trial_from_json(const nlohmann::json& j) {
  Trial t;
  t.trial_id = j.at("trial_id").get<std::string>();
  t.technique = technique_from_string(j.at("technique").get<std::string>());
  t.n_years = j.at("n_years").get<std::uint32_t>();
  t.task = task_from_string(j.at("task").get<std::string>());
  t.years = j.at("years").get<std::vector<std::string>>();
  for (const auto& p : j.at("probes")) {
    t.probes.push_back({p.at("year_label").get<std::string>(), p.at("row").get<std::size_t>(),
                        p.at("col").get<std::size_t>()});
  }
  t.options = j.at("options").get<std::vector<std::string>>();
  t.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  t.correct_year = j.value("correct_year", "");
  return t;
}

inline nlohmann::json plan_to_json(const StudyPlan& plan, bool with_answers = true) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : plan.trials) trials.push_back(trial_to_json(t, with_answers));
  return {{"participant_id", plan.participant_id}, {"seed", plan.seed}, {"trials", trials}};
}

inline StudyPlan plan_from_json(const nlohmann::json& j) {
  StudyPlan plan;
  plan.participant_id = j.at("participant_id").get<std::string>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("trials")) plan.trials.push_back(trial_from_json(t));
  return plan;
}

}  // namespace surfgraph
