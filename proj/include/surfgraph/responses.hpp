#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "protocol.hpp"

namespace surfgraph {

struct TrialResponse {
  std::string trial_id;
  std::string participant_id;
  std::string chosen_year;
  double elapsed_ms = 0.0;  // scene ready to confirmed submit, client monotonic clock
  bool confirmed = false;
  std::string client_timestamp;
  std::string server_received_at;  // set when persisted

  friend bool operator==(const TrialResponse&, const TrialResponse&) = default;
};

inline nlohmann::json response_to_json(const TrialResponse& r) {
  nlohmann::json j = {{"trial_id", r.trial_id},         {"participant_id", r.participant_id},
                      {"chosen_year", r.chosen_year},   {"elapsed_ms", r.elapsed_ms},
                      {"confirmed", r.confirmed},       {"client_timestamp", r.client_timestamp}};
  if (!r.server_received_at.empty()) j["server_received_at"] = r.server_received_at;
  return j;
}

inline TrialResponse response_from_json(const nlohmann::json& j) {
  try {
    TrialResponse r;
    r.trial_id = j.value("trial_id", "");
    r.participant_id = j.at("participant_id").get<std::string>();
    r.chosen_year = j.at("chosen_year").get<std::string>();
    r.elapsed_ms = j.at("elapsed_ms").get<double>();
    r.confirmed = j.value("confirmed", false);
    r.client_timestamp = j.value("client_timestamp", "");
    r.server_received_at = j.value("server_received_at", "");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed response: ") + e.what());
  }
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now()) {
  const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(t);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t - secs).count();
  const std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(ms));
  return buf;
}

// Trials of every loaded plan, keyed by trial id.
class PlanStore {
 public:
  struct Entry {
    std::string participant_id;
    Trial trial;
  };

  void add(const StudyPlan& plan) {
    for (const auto& t : plan.trials) {
      if (trials_.count(t.trial_id) && trials_.at(t.trial_id).participant_id != plan.participant_id) {
        throw ValidationError("trial id '" + t.trial_id + "' appears in two plans");
      }
      trials_[t.trial_id] = {plan.participant_id, t};
    }
    plans_[plan.participant_id] = plan;
  }

  const Entry* find_trial(const std::string& trial_id) const {
    auto it = trials_.find(trial_id);
    return it == trials_.end() ? nullptr : &it->second;
  }

  const StudyPlan* find_plan(const std::string& participant_id) const {
    auto it = plans_.find(participant_id);
    return it == plans_.end() ? nullptr : &it->second;
  }

  std::size_t trial_count() const { return trials_.size(); }

 private:
  std::map<std::string, Entry> trials_;
  std::map<std::string, StudyPlan> plans_;
};

inline PlanStore load_plans(const std::filesystem::path& dir) {
  PlanStore store;
  if (!std::filesystem::exists(dir)) return store;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    store.add(plan_from_json(nlohmann::json::parse(in)));
  }
  return store;
}

class ResponseError : public Error {
 public:
  enum class Code { unknown_trial, participant_mismatch, duplicate, unconfirmed, invalid_choice, invalid_elapsed };

  ResponseError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

inline std::vector<TrialResponse> read_response_log(const std::filesystem::path& path) {
  std::vector<TrialResponse> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(response_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad response log record: ") + e.what(), line_no, 0);
    }
  }
  return out;
}

// Append-only JSONL log of confirmed responses. All writers go through one
// mutex; each record is flushed before record() returns.
class ResponseLog {
 public:
  explicit ResponseLog(std::filesystem::path path) : path_(std::move(path)) {
    records_ = read_response_log(path_);
    for (const auto& r : records_) answered_.insert(r.trial_id);
  }

  const std::filesystem::path& path() const { return path_; }

  TrialResponse record(TrialResponse resp, const PlanStore& plans) {
    const auto* entry = plans.find_trial(resp.trial_id);
    if (!entry) throw ResponseError(ResponseError::Code::unknown_trial, "unknown trial '" + resp.trial_id + "'");
    if (entry->participant_id != resp.participant_id) {
      throw ResponseError(ResponseError::Code::participant_mismatch,
                          "trial '" + resp.trial_id + "' belongs to another participant");
    }
    if (!resp.confirmed) throw ResponseError(ResponseError::Code::unconfirmed, "response was not confirmed");
    if (!(resp.elapsed_ms > 0.0) || !std::isfinite(resp.elapsed_ms)) {
      throw ResponseError(ResponseError::Code::invalid_elapsed, "elapsed_ms must be positive");
    }
    const auto& options = entry->trial.options;
    if (std::find(options.begin(), options.end(), resp.chosen_year) == options.end()) {
      throw ResponseError(ResponseError::Code::invalid_choice, "chosen_year '" + resp.chosen_year + "' is not an option");
    }

    std::lock_guard lock(mutex_);
    if (answered_.count(resp.trial_id)) {
      throw ResponseError(ResponseError::Code::duplicate, "trial '" + resp.trial_id + "' was already answered");
    }
    resp.server_received_at = utc_timestamp();
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << response_to_json(resp).dump() << '\n';
    out.flush();
    if (!out) throw IoError("cannot append to " + path_.string());
    answered_.insert(resp.trial_id);
    records_.push_back(resp);
    return resp;
  }

  std::vector<TrialResponse> snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
  }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::set<std::string> answered_;
  std::vector<TrialResponse> records_;
};

}  // namespace surfgraph
