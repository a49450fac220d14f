#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "surfgraph/service.hpp"
#include "surfgraph/surfgraph.hpp"

namespace fs = std::filesystem;
using namespace surfgraph;

namespace {

fs::path default_data_dir() {
  if (const char* env = std::getenv("STUDY_DATA_DIR"); env && *env) return env;
  return "study-data";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

nlohmann::json dataset_summary(const Dataset& ds) {
  const GridSpec& g = ds.grid();
  return {{"years", ds.year_labels()},
          {"n_rows", g.n_rows},
          {"n_cols", g.n_cols},
          {"origin_lon", g.origin_lon},
          {"origin_lat", g.origin_lat},
          {"cell_size", g.cell_size},
          {"global_min", ds.global_min()},
          {"global_max", ds.global_max()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surfgraph: 3D surface-graph scenes and study harness for spatial-temporal height fields"};
  app.require_subcommand(1);
  fs::path data_dir = default_data_dir();
  app.add_option("--data-dir", data_dir, "Study data directory (env STUDY_DATA_DIR)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset manifest and optionally copy it into the data dir");
  fs::path ingest_manifest;
  bool ingest_copy = false;
  ingest->add_option("--manifest", ingest_manifest, "Dataset manifest JSON")->required();
  ingest->add_flag("--copy", ingest_copy, "Write the validated dataset to <data-dir>/dataset");

  // demo-data
  auto* demo = app.add_subcommand("demo-data", "Synthesize an N-year dataset");
  std::size_t demo_years = 4, demo_rows = 64, demo_cols = 64, demo_bumps = 6;
  std::uint64_t demo_seed = 1;
  double demo_max = 100.0;
  std::optional<fs::path> demo_out;
  demo->add_option("--years", demo_years, "Number of study years")->check(CLI::Range(2, 64));
  demo->add_option("--seed", demo_seed, "Seed of the first year (year i uses seed + i)");
  demo->add_option("--rows", demo_rows)->check(CLI::Range(8, 4096));
  demo->add_option("--cols", demo_cols)->check(CLI::Range(8, 4096));
  demo->add_option("--bumps", demo_bumps);
  demo->add_option("--max-height", demo_max, "Peak thickness in meters");
  demo->add_option("--out", demo_out, "Output directory (default <data-dir>/dataset)");

  // build-scene
  auto* build = app.add_subcommand("build-scene", "Assemble and export one scene");
  build->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  std::optional<fs::path> build_manifest;
  std::string technique = "shared_surface";
  std::uint32_t years = 2, bands = 4;
  double space = 100.0;
  std::optional<double> headroom, gap;
  fs::path build_out = "scene";
  build->add_option("--manifest", build_manifest, "Dataset manifest (default <data-dir>/dataset/manifest.json)");
  build->add_option("--technique", technique, "shared_surface | small_multiple | horizon");
  build->add_option("--years", years, "Number of study years (first N of the dataset)");
  build->add_option("--S", space, "Total vertical space in scene units");
  build->add_option("--h", headroom, "Viewing headroom (default 5% of S)");
  build->add_option("--B", bands, "Band count for horizon scenes");
  build->add_option("--gap", gap, "Space between stacked slots (default 2% of S)");
  build->add_option("--out", build_out, "Output directory");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Build a participant's 36-trial plan");
  std::optional<fs::path> plan_manifest, plan_out;
  std::string participant;
  std::uint64_t plan_seed = 0;
  plan_cmd->add_option("--manifest", plan_manifest, "Dataset manifest (default <data-dir>/dataset/manifest.json)");
  plan_cmd->add_option("--participant", participant)->required();
  plan_cmd->add_option("--seed", plan_seed)->required();
  plan_cmd->add_option("--out", plan_out, "Plan file (default <data-dir>/plans/<participant>.json)");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve plans, scenes and response recording over HTTP");
  int port = 8080;
  std::string host = "0.0.0.0";
  double serve_space = 100.0;
  std::uint32_t serve_bands = 4;
  serve->add_option("--port", port);
  serve->add_option("--host", host);
  serve->add_option("--S", serve_space, "Vertical space for generated scenes");
  serve->add_option("--B", serve_bands, "Band count for horizon scenes");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Summarize a response log into accuracy/time tables");
  std::optional<fs::path> log_path, plans_dir;
  fs::path analyze_out = "analysis";
  analyze->add_option("--log", log_path, "Response log (default <data-dir>/responses.jsonl)");
  analyze->add_option("--plans", plans_dir, "Plan directory (default <data-dir>/plans)");
  analyze->add_option("--out", analyze_out, "Output directory for summary.json and CSV tables");

  CLI11_PARSE(app, argc, argv);

  const fs::path dataset_manifest = data_dir / "dataset" / "manifest.json";
  try {
    if (*ingest) {
      const Dataset ds = load_dataset_manifest(ingest_manifest);
      if (ingest_copy) write_dataset(ds, data_dir / "dataset");
      std::cout << dataset_summary(ds).dump(2) << '\n';
    } else if (*demo) {
      const Dataset ds = synthesize_dataset(demo_seed, demo_years, demo_rows, demo_cols, demo_bumps, demo_max);
      const auto manifest = write_dataset(ds, demo_out.value_or(data_dir / "dataset"));
      std::cout << "wrote " << manifest.string() << '\n';
    } else if (*build) {
      const Dataset ds = load_dataset_manifest(build_manifest.value_or(dataset_manifest));
      auto params = LayoutParams::with_defaults(technique_from_string(technique), space, years, bands);
      if (headroom) params.h = *headroom;
      if (gap) params.gap = *gap;
      const auto manifest = export_scene(assemble_scene(ds.prefix(years), params), build_out);
      std::cout << "wrote " << manifest.string() << '\n';
    } else if (*plan_cmd) {
      const Dataset ds = load_dataset_manifest(plan_manifest.value_or(dataset_manifest));
      const StudyPlan plan = build_study_plan(ds, participant, plan_seed);
      const auto out = plan_out.value_or(data_dir / "plans" / (participant + ".json"));
      write_text(out, plan_to_json(plan).dump(2) + "\n");
      std::cout << "wrote " << out.string() << " (" << plan.trials.size() << " trials)\n";
    } else if (*serve) {
      StudyService service({data_dir, serve_space, serve_bands});
      httplib::Server server;
      service.mount(server);
      std::cout << "serving " << data_dir.string() << " on " << host << ':' << port << std::endl;
      if (!server.listen(host, port)) throw IoError("cannot listen on port " + std::to_string(port));
    } else if (*analyze) {
      const PlanStore plans = load_plans(plans_dir.value_or(data_dir / "plans"));
      const auto log = read_response_log(log_path.value_or(data_dir / "responses.jsonl"));
      const AnalyticsSummary summary = summarize(log, plans);
      write_text(analyze_out / "summary.json", summary.to_json().dump(2) + "\n");
      write_text(analyze_out / "accuracy.csv", summary.accuracy_csv());
      write_text(analyze_out / "completion_time.csv", summary.time_csv());
      write_text(analyze_out / "accuracy_gap.csv", summary.gap_csv());
      write_text(analyze_out / "accuracy_by_task.csv", summary.by_task_csv());
      std::cout << summary.to_json().dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
