#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "junctiongen/analysis.hpp"
#include "junctiongen/concrete_gen.hpp"
#include "junctiongen/hashutil.hpp"
#include "junctiongen/sim_harness.hpp"

namespace junctiongen {

/// Everything one end-to-end run needs. Parsed from a JSON config file;
/// individual fields can be overridden from the command line.
struct PipelineConfig {
  std::string map_path;
  std::string junction_id = "main";
  std::string out_dir = "out";
  int n_actors = 2;
  bool symmetry_reduce = true;
  double area_threshold = 0.1;
  std::string ego_start = "default";
  SpeedProfile profile;
  ConcretizeConfig concretize;
  std::vector<PolicyKind> policies{PolicyKind::Oblivious, PolicyKind::ReactiveBrake};
  int reps = 1;
  int ref_reps = 10;
  std::uint64_t seed = 1;
  int jobs = 1;
  SimConfig sim;
  ReactiveParams reactive;
  std::vector<GroupScheme> schemes{GroupScheme::ByActors, GroupScheme::ByManeuverType,
                                   GroupScheme::ByManeuverInstance};
  long long max_scenarios = 0;  // cap on concretized scenarios, 0 for all
};

PipelineConfig config_from_json_text(const std::string& text);
std::string canonical_config_json(const PipelineConfig& cfg);

/// FNV-1a hash of the canonical config dump; identifies a run setup.
std::string config_hash(const PipelineConfig& cfg);

struct Provenance {
  std::string tool_version;
  std::string config_hash;
  std::string created_at;
};

Provenance make_provenance(const PipelineConfig& cfg);

struct GenerateResult {
  int maneuvers = 0;
  long long enumerated = 0;
  long long kept = 0;
  std::string out_path;
};

struct ConcretizeResult {
  int scenarios = 0;
  int feasible = 0;
  int infeasible = 0;
};

struct SimulateResult {
  int traces = 0;
  int skipped = 0;  // already on disk, resume
  int reference_traces = 0;
};

struct AnalyzeResult {
  int runs = 0;
  int excluded = 0;
  std::string report_path;
};

GenerateResult run_generate(const PipelineConfig& cfg);
ConcretizeResult run_concretize(const PipelineConfig& cfg);
SimulateResult run_simulate(const PipelineConfig& cfg);
AnalyzeResult run_analyze(const PipelineConfig& cfg);
std::string run_report(const PipelineConfig& cfg);

/// generate, concretize, simulate, analyze, report, in order.
AnalyzeResult run_pipeline(const PipelineConfig& cfg);

std::string read_text_file(const std::string& path);

/// Writes via a temp file in the same directory plus rename, so a crash
/// never leaves a half-written artifact.
void atomic_write_text(const std::string& path, const std::string& content);

std::string iso8601_now();

}  // namespace junctiongen
