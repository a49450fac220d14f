#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "analytics_fixtures.hpp"
#include "surfgraph/analytics.hpp"
#include "test_support.hpp"

using namespace surfgraph;

namespace {

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

struct LogFixture {
  fixtures::TempDir dir;
  PlanStore plans;
  Trial trial;

  LogFixture() {
    const auto ds = synthesize_dataset(1, 4, 16, 16);
    const auto plan = build_study_plan(ds, "p01", 5);
    plans.add(plan);
    trial = plan.trials.front();
  }

  TrialResponse response() const {
    return {trial.trial_id, "p01", trial.options.back(), 1234.5, true, "2026-01-01T00:00:00Z", ""};
  }
};

}  // namespace

TEST(RecordResponse, AppendsOneLine) {
  LogFixture fx;
  ResponseLog log(fx.dir / "responses.jsonl");
  const auto stored = log.record(fx.response(), fx.plans);
  EXPECT_FALSE(stored.server_received_at.empty());
  EXPECT_EQ(line_count(log.path()), 1u);
  const auto back = read_response_log(log.path());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], stored);
}

TEST(RecordResponse, DuplicateIsRejectedAndLogUnchanged) {
  LogFixture fx;
  ResponseLog log(fx.dir / "responses.jsonl");
  log.record(fx.response(), fx.plans);
  try {
    log.record(fx.response(), fx.plans);
    FAIL();
  } catch (const ResponseError& e) {
    EXPECT_EQ(e.code(), ResponseError::Code::duplicate);
  }
  EXPECT_EQ(line_count(log.path()), 1u);
  // A reopened log still remembers answered trials.
  ResponseLog reopened(fx.dir / "responses.jsonl");
  EXPECT_THROW(reopened.record(fx.response(), fx.plans), ResponseError);
}

TEST(RecordResponse, ValidationErrors) {
  LogFixture fx;
  ResponseLog log(fx.dir / "responses.jsonl");
  auto expect_code = [&](TrialResponse r, ResponseError::Code code) {
    try {
      log.record(r, fx.plans);
      ADD_FAILURE() << "accepted invalid response";
    } catch (const ResponseError& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  auto r = fx.response();
  r.chosen_year = "1999";
  expect_code(r, ResponseError::Code::invalid_choice);
  r = fx.response();
  r.confirmed = false;
  expect_code(r, ResponseError::Code::unconfirmed);
  r = fx.response();
  r.elapsed_ms = 0.0;
  expect_code(r, ResponseError::Code::invalid_elapsed);
  r = fx.response();
  r.trial_id = "nope";
  expect_code(r, ResponseError::Code::unknown_trial);
  r = fx.response();
  r.participant_id = "p02";
  expect_code(r, ResponseError::Code::participant_mismatch);
  EXPECT_EQ(line_count(log.path()), 0u);
}

TEST(Summarize, AccuracyFixtures) {
  fixtures::LogBuilder b;
  b.add(Technique::shared_surface, 2, Task::maximum, 9, 10).add(Technique::shared_surface, 2, Task::discrimination, 9, 10);
  b.add(Technique::horizon, 4, Task::maximum, 11, 25).add(Technique::horizon, 4, Task::discrimination, 10, 25);
  const auto s = summarize(b.log(), b.plans());
  EXPECT_EQ(*s.accuracy_pct(Technique::shared_surface, 2), 90.0);
  EXPECT_EQ(*s.accuracy_pct(Technique::horizon, 4), 42.0);
  EXPECT_FALSE(s.accuracy_pct(Technique::small_multiple, 3).has_value());
  EXPECT_EQ(s.count(Technique::horizon, 4, Task::maximum), 25u);
}

TEST(Summarize, AllCorrectSaturates) {
  fixtures::LogBuilder b;
  for (Technique v : kTechniques) {
    for (std::uint32_t n : {2u, 3u, 4u}) b.add(v, n, Task::maximum, 3, 3).add(v, n, Task::discrimination, 2, 2);
  }
  const auto s = summarize(b.log(), b.plans());
  for (const auto& [key, tally] : s.pooled()) EXPECT_EQ(tally.accuracy_pct(), 100.0);
}

TEST(Summarize, MeanTimeInSeconds) {
  fixtures::LogBuilder b;
  b.add(Technique::small_multiple, 3, Task::maximum, 1, 4, 2000.0);  // 2000, 2001, 2002, 2003 ms
  const auto s = summarize(b.log(), b.plans());
  EXPECT_DOUBLE_EQ(*s.mean_time_s(Technique::small_multiple, 3), 2.0015);
}

TEST(Summarize, EmptyLogGivesEmptyMarker) {
  PlanStore plans;
  const auto s = summarize({}, plans);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.to_json().at("empty"), true);
}

TEST(Summarize, UnknownTrialIsAnError) {
  fixtures::LogBuilder b;
  b.add(Technique::horizon, 2, Task::maximum, 1, 1);
  auto log = b.log();
  log[0].trial_id = "missing";
  EXPECT_THROW(summarize(log, b.plans()), ValidationError);
}

TEST(AccuracyGap, Fixtures) {
  fixtures::LogBuilder b;
  b.add(Technique::small_multiple, 2, Task::maximum, 9, 10).add(Technique::small_multiple, 2, Task::discrimination, 8, 10);
  b.add(Technique::small_multiple, 4, Task::maximum, 20, 20).add(Technique::small_multiple, 4, Task::discrimination, 13, 20);
  b.add(Technique::horizon, 3, Task::maximum, 3, 4).add(Technique::horizon, 3, Task::discrimination, 6, 8);
  b.add(Technique::shared_surface, 3, Task::maximum, 5, 5);  // no discrimination data
  const auto gaps = accuracy_gap(b.log(), b.plans());
  EXPECT_EQ(gaps.at({Technique::small_multiple, 2}), 10.0);
  EXPECT_EQ(gaps.at({Technique::small_multiple, 4}), 35.0);
  EXPECT_EQ(gaps.at({Technique::horizon, 3}), 0.0);
  EXPECT_EQ(gaps.count({Technique::shared_surface, 3}), 0u);
}

TEST(Summarize, PermutationInvariantAndAdditive) {
  fixtures::LogBuilder b;
  std::mt19937_64 gen(8);
  for (Technique v : kTechniques) {
    for (std::uint32_t n : {2u, 3u, 4u}) {
      for (Task t : {Task::maximum, Task::discrimination}) {
        const int total = 1 + static_cast<int>(gen() % 12);
        b.add(v, n, t, static_cast<int>(gen() % (total + 1)), total, 500.0 + static_cast<double>(gen() % 9000) / 7.0);
      }
    }
  }
  const auto whole = summarize(b.log(), b.plans());
  auto shuffled = b.log();
  for (int round = 0; round < 20; ++round) {
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_EQ(summarize(shuffled, b.plans()).to_json().dump(), whole.to_json().dump());
    const auto cut = shuffled.begin() + static_cast<long>(gen() % shuffled.size());
    auto merged = summarize({shuffled.begin(), cut}, b.plans());
    merged.merge(summarize({cut, shuffled.end()}, b.plans()));
    EXPECT_EQ(merged.to_json().dump(), whole.to_json().dump());
  }
}

TEST(Summarize, MatchesBruteForceRecount) {
  fixtures::LogBuilder b;
  b.add(Technique::horizon, 2, Task::maximum, 3, 7).add(Technique::horizon, 2, Task::discrimination, 5, 6);
  b.add(Technique::shared_surface, 4, Task::discrimination, 0, 3);
  const auto s = summarize(b.log(), b.plans());
  for (Technique v : kTechniques) {
    for (std::uint32_t n : {2u, 3u, 4u}) {
      int correct = 0, total = 0;
      for (const auto& r : b.log()) {
        const auto& t = b.plans().find_trial(r.trial_id)->trial;
        if (t.technique != v || t.n_years != n) continue;
        ++total;
        correct += r.chosen_year == t.correct_year;
      }
      if (total == 0) {
        EXPECT_FALSE(s.accuracy_pct(v, n));
      } else {
        EXPECT_EQ(*s.accuracy_pct(v, n), 100.0 * correct / total);
      }
    }
  }
}

TEST(Summarize, CsvTables) {
  fixtures::LogBuilder b;
  b.add(Technique::horizon, 2, Task::maximum, 9, 10).add(Technique::horizon, 2, Task::discrimination, 8, 10);
  const auto s = summarize(b.log(), b.plans());
  EXPECT_EQ(s.accuracy_csv(), "technique,N,correct,total,accuracy_pct\nhorizon,2,17,20,85\n");
  EXPECT_EQ(s.gap_csv(), "technique,N,maximum_pct,discrimination_pct,gap_pct\nhorizon,2,90,80,10\n");
}
