#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "analytics.hpp"
#include "layout.hpp"
#include "protocol.hpp"
#include "raster.hpp"
#include "responses.hpp"
#include "scene_io.hpp"

namespace surfgraph {

// Directory layout served by StudyService:
//   dataset/manifest.json   study years (.asc + manifest)
//   plans/<participant>.json  plans with answer keys (never sent out as-is)
//   scenes/<technique>-n<N>/  exported scenes, built on first request
//   responses.jsonl         response log
//   www/                    runner static files (optional)
struct ServiceConfig {
  std::filesystem::path data_dir;
  double S = 100.0;
  std::uint32_t B = 4;
};

struct ApiResult {
  int status = 200;
  nlohmann::json body;
};

class StudyService {
 public:
  explicit StudyService(ServiceConfig config)
      : config_(std::move(config)),
        dataset_(load_dataset_manifest(config_.data_dir / "dataset" / "manifest.json")),
        plans_(load_plans(config_.data_dir / "plans")),
        log_(config_.data_dir / "responses.jsonl") {}

  const Dataset& dataset() const { return dataset_; }
  const ResponseLog& log() const { return log_; }

  void add_plan(const StudyPlan& plan) {
    std::lock_guard lock(plans_mutex_);
    plans_.add(plan);
  }

  ApiResult get_plan(const std::string& participant_id) const {
    std::lock_guard lock(plans_mutex_);
    const auto* plan = plans_.find_plan(participant_id);
    if (!plan) return error(404, "no plan for participant '" + participant_id + "'");
    return {200, plan_to_json(*plan, /*with_answers=*/false)};
  }

  ApiResult get_trial_scene(const std::string& trial_id) {
    Trial trial;
    {
      std::lock_guard lock(plans_mutex_);
      const auto* entry = plans_.find_trial(trial_id);
      if (!entry) return error(404, "unknown trial '" + trial_id + "'");
      trial = entry->trial;
    }
    const std::string key = std::string(to_string(trial.technique)) + "-n" + std::to_string(trial.n_years);
    nlohmann::json manifest;
    {
      std::lock_guard lock(scene_mutex_);
      const auto dir = config_.data_dir / "scenes" / key;
      if (!std::filesystem::exists(dir / "scene.json")) {
        auto params = LayoutParams::with_defaults(trial.technique, config_.S, trial.n_years, config_.B);
        export_scene(assemble_scene(dataset_.prefix(trial.n_years), params), dir);
      }
      std::ifstream in(dir / "scene.json");
      manifest = nlohmann::json::parse(in);
    }

    nlohmann::json mesh_urls = nlohmann::json::array();
    for (const auto& slot : manifest.at("slots")) {
      mesh_urls.push_back("/scenes/" + key + "/" + slot.at("mesh").get<std::string>());
    }
    const GridSpec& g = dataset_.grid();
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& p : trial.probes) {
      const auto slot = std::find(trial.years.begin(), trial.years.end(), p.year_label) - trial.years.begin();
      probes.push_back({{"year_label", p.year_label}, {"slot", slot}, {"row", p.row}, {"col", p.col},
                        {"x", g.x(p.col)}, {"y", g.y(p.row)}});
    }
    return {200,
            {{"trial_id", trial.trial_id},
             {"technique", to_string(trial.technique)},
             {"task", to_string(trial.task)},
             {"question", question_text(trial.task)},
             {"options", trial.options},
             {"probes", probes},
             {"scene", manifest},
             {"mesh_urls", mesh_urls}}};
  }

  ApiResult post_response(const std::string& trial_id, const std::string& body) {
    TrialResponse resp;
    try {
      resp = response_from_json(nlohmann::json::parse(body));
    } catch (const std::exception& e) {
      return error(400, e.what());
    }
    if (!resp.trial_id.empty() && resp.trial_id != trial_id) return error(400, "trial_id in body does not match URL");
    resp.trial_id = trial_id;
    try {
      std::lock_guard lock(plans_mutex_);
      auto stored = log_.record(resp, plans_);
      return {200, {{"status", "recorded"}, {"response", response_to_json(stored)}}};
    } catch (const ResponseError& e) {
      switch (e.code()) {
        case ResponseError::Code::unknown_trial: return error(404, e.what());
        case ResponseError::Code::duplicate: return error(409, e.what(), "duplicate");
        default: return error(400, e.what());
      }
    }
  }

  ApiResult get_summary() const {
    std::lock_guard lock(plans_mutex_);
    return {200, summarize(log_.snapshot(), plans_).to_json()};
  }

  static std::string question_text(Task task) {
    return task == Task::maximum
               ? "Which year has the highest saturated thickness at the marked location?"
               : "Each year is marked at its own location. Which year's marked location has the highest saturated "
                 "thickness?";
  }

  void mount(httplib::Server& server) {
    auto reply = [](httplib::Response& res, const ApiResult& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/api/plan/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, get_plan(req.matches[1]));
    });
    server.Get(R"(/api/trial/([^/]+)/scene)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, get_trial_scene(req.matches[1]));
    });
    server.Post(R"(/api/trial/([^/]+)/response)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, post_response(req.matches[1], req.body));
    });
    server.Get("/api/summary", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, get_summary());
    });
    server.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        reply(res, error(500, e.what()));
      }
    });

    const auto scenes = config_.data_dir / "scenes";
    std::filesystem::create_directories(scenes);
    server.set_mount_point("/scenes", scenes.string());
    server.set_file_extension_and_mimetype_mapping("glb", "model/gltf-binary");
    const auto www = config_.data_dir / "www";
    if (std::filesystem::exists(www)) server.set_mount_point("/", www.string());
  }

 private:
  static ApiResult error(int status, const std::string& message, const std::string& code = "error") {
    return {status, {{"error", code}, {"message", message}}};
  }

  ServiceConfig config_;
  Dataset dataset_;
  PlanStore plans_;
  ResponseLog log_;
  mutable std::mutex plans_mutex_;
  std::mutex scene_mutex_;
};

}  // namespace surfgraph
