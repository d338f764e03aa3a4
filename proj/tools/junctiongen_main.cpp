#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "junctiongen/errors.hpp"
#include "junctiongen/pipeline.hpp"
#include "junctiongen/version.hpp"

namespace jg = junctiongen;

namespace {

struct Overrides {
  std::string config_path;
  std::string map, junction, out_dir, ego_start;
  int actors = 0, reps = 0, ref_reps = 0, jobs = 0;
  long long max_scenarios = 0;
  std::uint64_t seed = 0;
  double area_threshold = 0.0, jitter = 0.0, timestep = 0.0, max_duration = 0.0;
  bool no_symmetry_reduce = false;
  std::vector<std::string> policies;
  std::vector<std::string> schemes;
};

void add_common_options(CLI::App* sub, Overrides& ov) {
  sub->add_option("-c,--config", ov.config_path, "JSON config file");
  sub->add_option("--map", ov.map, "road map JSON file");
  sub->add_option("--junction", ov.junction, "junction id (default main)");
  sub->add_option("-o,--out-dir", ov.out_dir, "output directory (default out)");
  sub->add_option("-n,--actors", ov.actors, "actors per scenario, ego included")
      ->check(CLI::Range(2, 16));
  sub->add_flag("--no-symmetry-reduce", ov.no_symmetry_reduce,
                "keep symmetric external orderings");
  sub->add_option("--area-threshold", ov.area_threshold, "overlap area cutoff in m^2")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--ego-start", ov.ego_start,
                  "ego start: close, default, medium, or meters before entry");
  sub->add_option("--policy", ov.policies, "policy to run (repeatable)")
      ->check(CLI::IsMember({"oblivious", "reactive_brake"}));
  sub->add_option("--scheme", ov.schemes, "grouping scheme (repeatable)")
      ->check(CLI::IsMember({"actors", "maneuver_type", "maneuver_instance"}));
  sub->add_option("--reps", ov.reps, "simulation repetitions per scenario and policy")
      ->check(CLI::PositiveNumber);
  sub->add_option("--ref-reps", ov.ref_reps, "reference runs per scenario and policy")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", ov.seed, "base random seed");
  sub->add_option("-j,--jobs", ov.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--jitter-std", ov.jitter, "speed jitter sigma for the reactive policy")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--timestep", ov.timestep, "simulation timestep in seconds")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-duration", ov.max_duration, "simulation cap in seconds")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-scenarios", ov.max_scenarios,
                  "concretize at most this many scenarios (0 for all)")
      ->check(CLI::NonNegativeNumber);
}

jg::PipelineConfig build_config(const CLI::App* sub, const Overrides& ov) {
  jg::PipelineConfig cfg;
  if (!ov.config_path.empty())
    cfg = jg::config_from_json_text(jg::read_text_file(ov.config_path));

  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--map")) cfg.map_path = ov.map;
  if (given("--junction")) cfg.junction_id = ov.junction;
  if (given("--out-dir")) cfg.out_dir = ov.out_dir;
  if (given("--actors")) cfg.n_actors = ov.actors;
  if (given("--no-symmetry-reduce")) cfg.symmetry_reduce = false;
  if (given("--area-threshold")) {
    cfg.area_threshold = ov.area_threshold;
    cfg.concretize.area_threshold = ov.area_threshold;
  }
  if (given("--ego-start")) {
    cfg.ego_start = ov.ego_start;
    cfg.concretize.ego_start_distance = jg::ego_start_distance_option(ov.ego_start);
  }
  if (given("--policy")) {
    cfg.policies.clear();
    for (const std::string& p : ov.policies) cfg.policies.push_back(jg::policy_from_string(p));
  }
  if (given("--scheme")) {
    cfg.schemes.clear();
    for (const std::string& s : ov.schemes)
      cfg.schemes.push_back(jg::group_scheme_from_string(s));
  }
  if (given("--reps")) cfg.reps = ov.reps;
  if (given("--ref-reps")) cfg.ref_reps = ov.ref_reps;
  if (given("--seed")) cfg.seed = ov.seed;
  if (given("--jobs")) cfg.jobs = ov.jobs;
  if (given("--jitter-std")) cfg.reactive.jitter_std = ov.jitter;
  if (given("--timestep")) cfg.sim.timestep = ov.timestep;
  if (given("--max-duration")) cfg.sim.max_duration = ov.max_duration;
  if (given("--max-scenarios")) cfg.max_scenarios = ov.max_scenarios;
  return cfg;
}

int dispatch(const std::string& cmd, const jg::PipelineConfig& cfg) {
  if (cmd == "generate") {
    jg::GenerateResult r = jg::run_generate(cfg);
    std::printf("%d maneuver instances at %s\n", r.maneuvers, cfg.junction_id.c_str());
    std::printf("%lld scenarios enumerated, %lld kept -> %s\n", r.enumerated, r.kept,
                r.out_path.c_str());
  } else if (cmd == "concretize") {
    jg::ConcretizeResult r = jg::run_concretize(cfg);
    std::printf("%d scenarios concretized: %d feasible, %d rejected\n", r.scenarios, r.feasible,
                r.infeasible);
  } else if (cmd == "simulate") {
    jg::SimulateResult r = jg::run_simulate(cfg);
    std::printf("%d traces written, %d reference runs, %d already present\n", r.traces,
                r.reference_traces, r.skipped);
  } else if (cmd == "analyze") {
    jg::AnalyzeResult r = jg::run_analyze(cfg);
    std::printf("%d runs analyzed, %d excluded -> %s\n", r.runs, r.excluded,
                r.report_path.c_str());
  } else if (cmd == "report") {
    std::printf("%s\n", jg::run_report(cfg).c_str());
  } else if (cmd == "pipeline") {
    jg::AnalyzeResult r = jg::run_pipeline(cfg);
    std::printf("pipeline done: %d runs analyzed, %d excluded -> %s\n", r.runs, r.excluded,
                r.report_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"derives, refines, replays, and scores junction conflict scenarios"};
  app.set_version_flag("--version", jg::kToolVersion);
  app.require_subcommand(1);

  Overrides ov;
  for (const char* name : {"generate", "concretize", "simulate", "analyze", "report", "pipeline"})
    add_common_options(app.add_subcommand(name), ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    return dispatch(sub->get_name(), build_config(sub, ov));
  } catch (const jg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const jg::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
