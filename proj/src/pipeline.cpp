#include "junctiongen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "junctiongen/errors.hpp"
#include "junctiongen/logical_gen.hpp"
#include "junctiongen/road_model.hpp"
#include "junctiongen/version.hpp"

namespace fs = std::filesystem;

namespace junctiongen {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "map",        "junction",    "out_dir",        "actors",        "symmetry_reduce",
    "area_threshold", "ego_start", "speeds",       "sample_step",   "forward_extension",
    "max_extension",  "spawn_gap_time", "footprint", "policies",    "reps",
    "ref_reps",   "seed",        "jobs",           "sim",           "reactive",
    "schemes",    "max_scenarios"};

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    for (const auto& [key, value] : doc.items())
      if (!kKnownKeys.count(key)) throw ConfigError("unknown config key: " + key);

    PipelineConfig cfg;
    cfg.map_path = doc.value("map", "");
    cfg.junction_id = doc.value("junction", "main");
    cfg.out_dir = doc.value("out_dir", "out");
    cfg.n_actors = doc.value("actors", 2);
    cfg.symmetry_reduce = doc.value("symmetry_reduce", true);
    cfg.area_threshold = doc.value("area_threshold", 0.1);
    cfg.ego_start = doc.value("ego_start", "default");

    if (doc.contains("speeds")) {
      const json& sp = doc.at("speeds");
      cfg.profile.in_junction_speed = number_or(sp, "in_junction", 3.0);
      cfg.profile.out_speed = number_or(sp, "out", 4.0);
      if (sp.contains("accel") && !sp.at("accel").is_null())
        cfg.profile.accel = sp.at("accel").get<double>();
    }

    cfg.concretize.ego_start_distance = ego_start_distance_option(cfg.ego_start);
    cfg.concretize.sample_step = doc.value("sample_step", 0.5);
    cfg.concretize.forward_extension = doc.value("forward_extension", 20.0);
    cfg.concretize.max_extension = doc.value("max_extension", 60.0);
    cfg.concretize.spawn_gap_time = doc.value("spawn_gap_time", 1.0);
    cfg.concretize.area_threshold = cfg.area_threshold;
    if (doc.contains("footprint")) {
      cfg.concretize.footprint.length = number_or(doc.at("footprint"), "length", 4.7);
      cfg.concretize.footprint.width = number_or(doc.at("footprint"), "width", 2.0);
    }

    if (doc.contains("policies")) {
      cfg.policies.clear();
      for (const auto& p : doc.at("policies"))
        cfg.policies.push_back(policy_from_string(p.get<std::string>()));
    }
    cfg.reps = doc.value("reps", 1);
    cfg.ref_reps = doc.value("ref_reps", 10);
    cfg.seed = doc.value("seed", std::uint64_t{1});
    cfg.jobs = doc.value("jobs", 1);

    if (doc.contains("sim")) {
      const json& s = doc.at("sim");
      cfg.sim.timestep = number_or(s, "timestep", 0.05);
      cfg.sim.max_duration = number_or(s, "max_duration", 30.0);
      cfg.sim.near_miss_gap = number_or(s, "near_miss_gap", 1.0);
      cfg.sim.camera_fov_deg = number_or(s, "camera_fov_deg", 132.0);
      cfg.sim.camera_range = number_or(s, "camera_range", 60.0);
      cfg.sim.lidar_forward = number_or(s, "lidar_forward", 32.0);
      cfg.sim.lidar_half_width = number_or(s, "lidar_half_width", 16.0);
    }
    if (doc.contains("reactive")) {
      const json& r = doc.at("reactive");
      cfg.reactive.decel = number_or(r, "decel", 4.0);
      cfg.reactive.horizon = number_or(r, "horizon", 2.5);
      cfg.reactive.resume_gap = number_or(r, "resume_gap", 6.0);
      cfg.reactive.jitter_std = number_or(r, "jitter_std", 0.0);
    }
    if (doc.contains("schemes")) {
      cfg.schemes.clear();
      for (const auto& s : doc.at("schemes"))
        cfg.schemes.push_back(group_scheme_from_string(s.get<std::string>()));
    }
    cfg.max_scenarios = doc.value("max_scenarios", 0LL);

    if (cfg.n_actors < 2) throw ConfigError("actors must be at least 2");
    if (cfg.reps < 1 || cfg.ref_reps < 1) throw ConfigError("reps and ref_reps must be positive");
    if (cfg.jobs < 1) throw ConfigError("jobs must be positive");
    if (cfg.policies.empty()) throw ConfigError("at least one policy is required");
    if (cfg.schemes.empty()) throw ConfigError("at least one grouping scheme is required");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
}

std::string canonical_config_json(const PipelineConfig& cfg) {
  json doc;
  doc["map"] = cfg.map_path;
  doc["junction"] = cfg.junction_id;
  doc["actors"] = cfg.n_actors;
  doc["symmetry_reduce"] = cfg.symmetry_reduce;
  doc["area_threshold"] = cfg.area_threshold;
  doc["ego_start"] = cfg.ego_start;
  doc["speeds"] = {{"in_junction", cfg.profile.in_junction_speed},
                   {"out", cfg.profile.out_speed},
                   {"accel", std::isinf(cfg.profile.accel) ? json() : json(cfg.profile.accel)}};
  doc["sample_step"] = cfg.concretize.sample_step;
  doc["forward_extension"] = cfg.concretize.forward_extension;
  doc["max_extension"] = cfg.concretize.max_extension;
  doc["spawn_gap_time"] = cfg.concretize.spawn_gap_time;
  doc["footprint"] = {{"length", cfg.concretize.footprint.length},
                      {"width", cfg.concretize.footprint.width}};
  json pol = json::array();
  for (PolicyKind p : cfg.policies) pol.push_back(to_string(p));
  doc["policies"] = pol;
  doc["reps"] = cfg.reps;
  doc["ref_reps"] = cfg.ref_reps;
  doc["seed"] = cfg.seed;
  doc["sim"] = {{"timestep", cfg.sim.timestep},
                {"max_duration", cfg.sim.max_duration},
                {"near_miss_gap", cfg.sim.near_miss_gap},
                {"camera_fov_deg", cfg.sim.camera_fov_deg},
                {"camera_range", cfg.sim.camera_range},
                {"lidar_forward", cfg.sim.lidar_forward},
                {"lidar_half_width", cfg.sim.lidar_half_width}};
  doc["reactive"] = {{"decel", cfg.reactive.decel},
                     {"horizon", cfg.reactive.horizon},
                     {"resume_gap", cfg.reactive.resume_gap},
                     {"jitter_std", cfg.reactive.jitter_std}};
  json sch = json::array();
  for (GroupScheme s : cfg.schemes) sch.push_back(to_string(s));
  doc["schemes"] = sch;
  doc["max_scenarios"] = cfg.max_scenarios;
  // out_dir and jobs stay out: they do not change what gets computed
  return doc.dump();
}

std::string config_hash(const PipelineConfig& cfg) {
  return fnv1a64_hex(canonical_config_json(cfg));
}

Provenance make_provenance(const PipelineConfig& cfg) {
  return {kToolVersion, config_hash(cfg), iso8601_now()};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write_text(const std::string& path, const std::string& content) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw DataError("short write: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string iso8601_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json provenance_json(const Provenance& p) {
  return {{"tool_version", p.tool_version},
          {"config_hash", p.config_hash},
          {"created_at", p.created_at}};
}

template <typename Fn>
void parallel_for(int jobs, std::size_t count, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        {
          std::lock_guard<std::mutex> lk(err_mu);
          if (err) return;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string logical_path(const PipelineConfig& cfg) { return cfg.out_dir + "/logical/scenarios.json"; }
std::string concrete_dir(const PipelineConfig& cfg) { return cfg.out_dir + "/concrete"; }
std::string traces_dir(const PipelineConfig& cfg) { return cfg.out_dir + "/traces"; }
std::string analysis_dir(const PipelineConfig& cfg) { return cfg.out_dir + "/analysis"; }

void require_map(const PipelineConfig& cfg) {
  if (cfg.map_path.empty()) throw ConfigError("no map given; set map in the config or pass --map");
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "collision") return Outcome::Collision;
  if (s == "near_miss") return Outcome::NearMiss;
  if (s == "no_incident") return Outcome::NoIncident;
  throw DataError("unknown outcome: " + s);
}

Avoidability avoidability_from_string(const std::string& s) {
  if (s == "avoidable") return Avoidability::Avoidable;
  if (s == "unavoidable") return Avoidability::Unavoidable;
  if (s == "not_applicable") return Avoidability::NotApplicable;
  throw DataError("unknown avoidability: " + s);
}

ManeuverType maneuver_from_string(const std::string& s) {
  if (s == "go_straight") return ManeuverType::GoStraight;
  if (s == "turn_left") return ManeuverType::TurnLeft;
  if (s == "turn_right") return ManeuverType::TurnRight;
  throw DataError("unknown maneuver: " + s);
}

}  // namespace

GenerateResult run_generate(const PipelineConfig& cfg) {
  require_map(cfg);
  RoadMap map = RoadMap::load_file(cfg.map_path);
  ManeuverCatalog catalog = enumerate_maneuvers(map, cfg.junction_id);
  OverlapTable table(catalog, cfg.area_threshold);
  LogicalScenarioSet set = find_logical_scenarios(catalog, table, cfg.n_actors);
  long long enumerated = static_cast<long long>(set.scenarios.size());
  if (cfg.symmetry_reduce) set = reduce_symmetries(set);

  json doc = json::parse(to_json_text(set));
  doc["provenance"] = provenance_json(make_provenance(cfg));

  GenerateResult res;
  res.maneuvers = static_cast<int>(catalog.instances.size());
  res.enumerated = enumerated;
  res.kept = static_cast<long long>(set.scenarios.size());
  res.out_path = logical_path(cfg);
  atomic_write_text(res.out_path, doc.dump(1));
  return res;
}

ConcretizeResult run_concretize(const PipelineConfig& cfg) {
  require_map(cfg);
  if (!fs::exists(logical_path(cfg)))
    throw DataError("no logical scenarios at " + logical_path(cfg) + "; run generate first");

  RoadMap map = RoadMap::load_file(cfg.map_path);
  ManeuverCatalog catalog = enumerate_maneuvers(map, cfg.junction_id);
  OverlapTable table(catalog, cfg.area_threshold);
  LogicalScenarioSet set = logical_set_from_json_text(read_text_file(logical_path(cfg)));
  if (set.catalog_hash != catalog_hash(catalog))
    throw DataError("map or junction changed since generate; rerun generate");

  std::size_t count = set.scenarios.size();
  if (cfg.max_scenarios > 0)
    count = std::min(count, static_cast<std::size_t>(cfg.max_scenarios));

  std::vector<SpeedProfile> profiles{cfg.profile};
  Provenance prov = make_provenance(cfg);
  std::vector<json> index_rows(count);
  std::atomic<int> feasible{0};

  parallel_for(cfg.jobs, count, [&](std::size_t i) {
    char tag[16];
    std::snprintf(tag, sizeof tag, "s%04zu", i);
    std::string id = tag;
    for (const std::string& mi : set.scenarios[i].assignment) id += "__" + mi;

    ConcreteScenario sc = derive_concrete_scenario(map, catalog, table, set.scenarios[i],
                                                   profiles, cfg.concretize, id);
    sc.static_report = static_check(sc, cfg.sim.timestep);

    json doc = json::parse(to_json_text(sc));
    doc["provenance"] = provenance_json(prov);
    std::string file = id + ".json";
    atomic_write_text(concrete_dir(cfg) + "/" + file, doc.dump(1));

    if (sc.static_report.feasible()) feasible.fetch_add(1);
    index_rows[i] = {{"id", id}, {"feasible", sc.static_report.feasible()}, {"file", file}};
  });

  json index;
  index["scenarios"] = index_rows;
  index["provenance"] = provenance_json(prov);
  atomic_write_text(concrete_dir(cfg) + "/index.json", index.dump(1));

  ConcretizeResult res;
  res.scenarios = static_cast<int>(count);
  res.feasible = feasible.load();
  res.infeasible = res.scenarios - res.feasible;
  return res;
}

SimulateResult run_simulate(const PipelineConfig& cfg) {
  std::string index_path = concrete_dir(cfg) + "/index.json";
  if (!fs::exists(index_path))
    throw DataError("no concrete scenarios at " + index_path + "; run concretize first");

  json index = json::parse(read_text_file(index_path));
  std::vector<ConcreteScenario> scenarios;
  for (const auto& row : index.at("scenarios")) {
    if (!row.at("feasible").get<bool>()) continue;
    scenarios.push_back(concrete_from_json_text(
        read_text_file(concrete_dir(cfg) + "/" + row.at("file").get<std::string>())));
  }

  struct Task {
    const ConcreteScenario* scenario;
    PolicyKind policy;
    std::uint64_t seed;
    std::string out_base;  // without extension
    bool reference;
  };
  std::vector<Task> tasks;
  for (const ConcreteScenario& sc : scenarios) {
    for (PolicyKind policy : cfg.policies) {
      for (int k = 0; k < cfg.reps; ++k)
        tasks.push_back({&sc, policy, cfg.seed + static_cast<std::uint64_t>(k),
                         traces_dir(cfg) + "/" + sc.id + "__" + to_string(policy) + "__rep" +
                             std::to_string(k),
                         false});
      for (int k = 0; k < cfg.ref_reps; ++k)
        tasks.push_back({&sc, policy, cfg.seed + static_cast<std::uint64_t>(k),
                         traces_dir(cfg) + "/refs/" + sc.id + "__" + to_string(policy) +
                             "__ref" + std::to_string(k),
                         true});
    }
  }

  Provenance prov = make_provenance(cfg);
  std::atomic<int> written{0}, skipped{0}, refs{0};
  parallel_for(cfg.jobs, tasks.size(), [&](std::size_t i) {
    const Task& task = tasks[i];
    std::string jsonl_path = task.out_base + ".jsonl";
    if (fs::exists(jsonl_path)) {
      skipped.fetch_add(1);
      return;
    }
    SimTrace trace = run_simulation(*task.scenario, task.policy, cfg.reactive, cfg.sim,
                                    task.seed, !task.reference);
    trace.header.config_hash = prov.config_hash;
    trace.header.created_at = prov.created_at;
    atomic_write_text(jsonl_path, trace_to_jsonl(trace));
    if (task.reference) {
      refs.fetch_add(1);
    } else {
      atomic_write_text(task.out_base + ".csv", trace_to_csv(trace));
      written.fetch_add(1);
    }
  });

  return {written.load(), skipped.load(), refs.load()};
}

namespace {

json record_json(const RunRecord& r) {
  return {{"scenario_id", r.scenario_id},
          {"policy", r.policy},
          {"seed", r.seed},
          {"n_actors", r.n_actors},
          {"ego_mi", r.ego_mi},
          {"ego_maneuver", to_string(r.ego_maneuver)},
          {"outcome", to_string(r.outcome)},
          {"avoidability", to_string(r.avoidability)},
          {"preventive_maneuver", r.preventive_maneuver}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.scenario_id = j.at("scenario_id").get<std::string>();
  r.policy = j.at("policy").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_actors = j.at("n_actors").get<int>();
  r.ego_mi = j.at("ego_mi").get<std::string>();
  r.ego_maneuver = maneuver_from_string(j.at("ego_maneuver").get<std::string>());
  r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  r.avoidability = avoidability_from_string(j.at("avoidability").get<std::string>());
  r.preventive_maneuver = j.at("preventive_maneuver").get<bool>();
  return r;
}

std::string render_report(const PipelineConfig& cfg, const std::vector<RunRecord>& records) {
  long long excluded = 0;
  for (const RunRecord& r : records)
    if (r.outcome == Outcome::Collision && r.avoidability == Avoidability::Unavoidable)
      ++excluded;

  std::ostringstream md;
  md << "# Scenario sweep report\n\n";
  md << "- map: " << cfg.map_path << ", junction: " << cfg.junction_id << "\n";
  md << "- config hash: " << config_hash(cfg) << "\n";
  md << "- runs: " << records.size() << " (" << excluded
     << " unavoidable collisions excluded from the tables)\n";

  for (GroupScheme scheme : cfg.schemes) {
    std::vector<AggregateRow> rows = aggregate(records, scheme);
    md << "\n## Outcomes by " << to_string(scheme) << "\n\n";
    md << "| group | runs | collisions | near misses | clean | preventive | excluded |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const AggregateRow& row : rows) {
      md << "| " << row.key << " | " << row.total << " | " << row.collisions << " | "
         << row.near_misses << " | " << row.no_incident << " | " << row.preventive << " | "
         << row.excluded << " |\n";
    }
    std::vector<GroupComparison> comps = compare_groups(rows);
    if (!comps.empty()) {
      md << "\n| comparison | metric | a | b | p | odds ratio |\n";
      md << "|---|---|---|---|---|---|\n";
      char buf[64];
      for (const GroupComparison& c : comps) {
        md << "| " << c.group_a << " vs " << c.group_b << " | " << c.metric << " | "
           << c.a_pos << "/" << c.a_pos + c.a_neg << " | " << c.b_pos << "/"
           << c.b_pos + c.b_neg << " | ";
        std::snprintf(buf, sizeof buf, "%.4g | %.4g |", c.p_value, c.odds);
        md << buf << "\n";
      }
    }
  }
  return md.str();
}

void write_analysis_outputs(const PipelineConfig& cfg, const std::vector<RunRecord>& records) {
  Provenance prov = make_provenance(cfg);

  json outcomes;
  outcomes["map"] = cfg.map_path;
  outcomes["junction"] = cfg.junction_id;
  outcomes["runs"] = json::array();
  for (const RunRecord& r : records) outcomes["runs"].push_back(record_json(r));
  outcomes["provenance"] = provenance_json(prov);
  atomic_write_text(analysis_dir(cfg) + "/outcomes.json", outcomes.dump(1));

  std::ostringstream csv;
  csv << "scenario_id,policy,seed,n_actors,ego_mi,ego_maneuver,outcome,avoidability,"
         "preventive_maneuver\n";
  for (const RunRecord& r : records) {
    csv << r.scenario_id << ',' << r.policy << ',' << r.seed << ',' << r.n_actors << ','
        << r.ego_mi << ',' << to_string(r.ego_maneuver) << ',' << to_string(r.outcome) << ','
        << to_string(r.avoidability) << ',' << (r.preventive_maneuver ? 1 : 0) << '\n';
  }
  atomic_write_text(analysis_dir(cfg) + "/outcomes.csv", csv.str());

  for (GroupScheme scheme : cfg.schemes) {
    std::vector<AggregateRow> rows = aggregate(records, scheme);
    std::vector<GroupComparison> comps = compare_groups(rows);

    json agg;
    agg["scheme"] = to_string(scheme);
    agg["rows"] = json::array();
    for (const AggregateRow& row : rows)
      agg["rows"].push_back({{"group", row.key},
                             {"runs", row.total},
                             {"collisions", row.collisions},
                             {"near_misses", row.near_misses},
                             {"no_incident", row.no_incident},
                             {"preventive", row.preventive},
                             {"excluded", row.excluded}});
    agg["comparisons"] = json::array();
    for (const GroupComparison& c : comps)
      agg["comparisons"].push_back({{"group_a", c.group_a},
                                    {"group_b", c.group_b},
                                    {"metric", c.metric},
                                    {"a_pos", c.a_pos},
                                    {"a_neg", c.a_neg},
                                    {"b_pos", c.b_pos},
                                    {"b_neg", c.b_neg},
                                    {"p_value", c.p_value},
                                    {"odds_ratio", c.odds}});
    agg["provenance"] = provenance_json(prov);
    std::string base = analysis_dir(cfg) + "/aggregate_" + to_string(scheme);
    atomic_write_text(base + ".json", agg.dump(1));

    std::ostringstream acsv;
    acsv << "group,runs,collisions,near_misses,no_incident,preventive,excluded\n";
    for (const AggregateRow& row : rows)
      acsv << row.key << ',' << row.total << ',' << row.collisions << ',' << row.near_misses
           << ',' << row.no_incident << ',' << row.preventive << ',' << row.excluded << '\n';
    atomic_write_text(base + ".csv", acsv.str());
  }

  atomic_write_text(analysis_dir(cfg) + "/report.md", render_report(cfg, records));
}

}  // namespace

AnalyzeResult run_analyze(const PipelineConfig& cfg) {
  require_map(cfg);
  std::string tdir = traces_dir(cfg);
  if (!fs::exists(tdir)) throw DataError("no traces at " + tdir + "; run simulate first");

  RoadMap map = RoadMap::load_file(cfg.map_path);
  ManeuverCatalog catalog = enumerate_maneuvers(map, cfg.junction_id);

  std::vector<std::string> trace_files;
  for (const auto& entry : fs::directory_iterator(tdir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      trace_files.push_back(entry.path().string());
  std::sort(trace_files.begin(), trace_files.end());
  if (trace_files.empty()) throw DataError("no traces at " + tdir + "; run simulate first");

  // medoid of the reference runs, per scenario and policy
  std::map<std::pair<std::string, std::string>, std::vector<SimTrace>> ref_groups;
  if (fs::exists(tdir + "/refs")) {
    std::vector<std::string> ref_files;
    for (const auto& entry : fs::directory_iterator(tdir + "/refs"))
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
        ref_files.push_back(entry.path().string());
    std::sort(ref_files.begin(), ref_files.end());
    for (const std::string& f : ref_files) {
      SimTrace t = trace_from_jsonl(read_text_file(f));
      ref_groups[{t.header.scenario_id, t.header.policy}].push_back(std::move(t));
    }
  }
  std::map<std::pair<std::string, std::string>, Polyline> references;
  for (const auto& [key, traces] : ref_groups) {
    std::vector<Polyline> tracks;
    for (const SimTrace& t : traces) tracks.push_back(ego_track(t));
    references.emplace(key, tracks[medoid_index(tracks)]);
  }

  std::vector<RunRecord> records(trace_files.size());
  parallel_for(cfg.jobs, trace_files.size(), [&](std::size_t i) {
    SimTrace trace = trace_from_jsonl(read_text_file(trace_files[i]));
    RunRecord r;
    r.scenario_id = trace.header.scenario_id;
    r.policy = trace.header.policy;
    r.seed = trace.header.seed;
    r.n_actors = trace.header.n_actors;
    // scenario ids look like s0007__<ego mi>__<externals...>
    std::size_t from = r.scenario_id.find("__");
    if (from == std::string::npos) throw DataError("unrecognized scenario id: " + r.scenario_id);
    std::size_t to = r.scenario_id.find("__", from + 2);
    r.ego_mi = r.scenario_id.substr(from + 2, to == std::string::npos ? to : to - from - 2);
    r.ego_maneuver = catalog.by_id(r.ego_mi).maneuver;
    r.outcome = classify_outcome(trace);
    r.avoidability = assess_avoidability(trace);
    auto ref = references.find({trace.header.scenario_id, trace.header.policy});
    if (ref == references.end())
      throw DataError("no reference runs for " + trace.header.scenario_id + "/" +
                      trace.header.policy + "; rerun simulate");
    r.preventive_maneuver = detect_preventive_maneuver(trace, ref->second).detected;
    records[i] = r;
  });

  write_analysis_outputs(cfg, records);

  AnalyzeResult res;
  res.runs = static_cast<int>(records.size());
  for (const RunRecord& r : records)
    if (r.outcome == Outcome::Collision && r.avoidability == Avoidability::Unavoidable)
      ++res.excluded;
  res.report_path = analysis_dir(cfg) + "/report.md";
  return res;
}

std::string run_report(const PipelineConfig& cfg) {
  std::string outcomes_path = analysis_dir(cfg) + "/outcomes.json";
  if (!fs::exists(outcomes_path))
    throw DataError("no analysis at " + outcomes_path + "; run analyze first");
  json doc = json::parse(read_text_file(outcomes_path));
  std::vector<RunRecord> records;
  for (const auto& j : doc.at("runs")) records.push_back(record_from_json(j));
  std::string path = analysis_dir(cfg) + "/report.md";
  atomic_write_text(path, render_report(cfg, records));
  return path;
}

AnalyzeResult run_pipeline(const PipelineConfig& cfg) {
  run_generate(cfg);
  run_concretize(cfg);
  run_simulate(cfg);
  AnalyzeResult res = run_analyze(cfg);
  run_report(cfg);
  return res;
}

}  // namespace junctiongen
