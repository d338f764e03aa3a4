#include "junctiongen/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"
#include "junctiongen/errors.hpp"
#include "junctiongen/version.hpp"

namespace junctiongen {

using nlohmann::json;

const char* to_string(PolicyKind p) {
  return p == PolicyKind::Oblivious ? "oblivious" : "reactive_brake";
}

PolicyKind policy_from_string(const std::string& s) {
  if (s == "oblivious") return PolicyKind::Oblivious;
  if (s == "reactive_brake") return PolicyKind::ReactiveBrake;
  throw ConfigError("unknown policy: " + s);
}

const char* to_string(EventKind k) {
  return k == EventKind::Collision ? "collision" : "near_miss";
}

namespace {

Vec2 rect_boundary_nearest(const OrientedRect& r, Vec2 p) {
  auto corners = rect_corners(r);
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point = corners[0];
  for (int i = 0; i < 4; ++i) {
    Vec2 a = corners[i];
    Vec2 b = corners[(i + 1) % 4];
    Vec2 d = b - a;
    double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
    Vec2 q = a + d * t;
    double dist = distance(p, q);
    if (dist < best) {
      best = dist;
      best_point = q;
    }
  }
  return best_point;
}

}  // namespace

Detection sense(const OrientedRect& ego, const OrientedRect& target, const SimConfig& cfg) {
  Detection d;
  auto corners = rect_corners(target);
  double half_fov = cfg.camera_fov_deg * M_PI / 360.0;

  auto in_wedge = [&](Vec2 p) {
    Vec2 rel = p - ego.center;
    double r = norm(rel);
    if (r > cfg.camera_range + 1e-12) return false;
    if (r < 1e-9) return true;
    double off = std::abs(normalize_angle(std::atan2(rel.y, rel.x) - ego.heading));
    return off <= half_fov + 1e-12;
  };
  for (const Vec2& c : corners)
    if (in_wedge(c)) {
      d.camera = true;
      break;
    }
  if (!d.camera && in_wedge(rect_boundary_nearest(target, ego.center))) d.camera = true;

  Vec2 fwd{std::cos(ego.heading), std::sin(ego.heading)};
  Vec2 nrm = perp(fwd);
  Vec2 anchor = ego.center + fwd * (ego.length / 2.0);
  for (const Vec2& c : corners) {
    Vec2 rel = c - anchor;
    double lx = dot(rel, fwd);
    double ly = dot(rel, nrm);
    if (lx >= -1e-12 && lx <= cfg.lidar_forward + 1e-12 &&
        std::abs(ly) <= cfg.lidar_half_width + 1e-12) {
      d.lidar = true;
      break;
    }
  }
  return d;
}

SimTrace run_simulation(const ConcreteScenario& scenario, PolicyKind policy,
                        const ReactiveParams& params, const SimConfig& cfg, std::uint64_t seed,
                        bool externals_enabled) {
  if (cfg.timestep <= 0.0 || cfg.max_duration <= 0.0)
    throw ConfigError("timestep and max_duration must be positive");
  if (scenario.paths.empty()) throw DataError("scenario has no paths");

  const std::size_t n_ext = externals_enabled ? scenario.paths.size() - 1 : 0;

  SimTrace trace;
  trace.header.scenario_id = scenario.id;
  trace.header.policy = to_string(policy);
  trace.header.seed = seed;
  trace.header.timestep = cfg.timestep;
  trace.header.n_actors = static_cast<int>(n_ext) + 1;
  trace.header.tool_version = kToolVersion;

  PathFollower ego(&scenario.paths[0]);
  std::vector<PathFollower> ext;
  for (std::size_t i = 0; i < n_ext; ++i) ext.emplace_back(&scenario.paths[i + 1]);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double v_cmd = ego.speed();
  bool braking = false;

  std::vector<double> min_gap(n_ext, std::numeric_limits<double>::infinity());
  std::vector<double> min_gap_t(n_ext, 0.0);
  int collided_with = -1;

  const int last_frame = static_cast<int>(std::llround(cfg.max_duration / cfg.timestep));
  auto rect_of = [&](Vec2 pos, double heading) {
    return OrientedRect{pos, heading, scenario.footprint.length, scenario.footprint.width};
  };

  for (int k = 0;; ++k) {
    double t = k * cfg.timestep;
    OrientedRect ego_rect = rect_of(ego.position(), ego.heading());

    Frame frame;
    frame.t = t;
    frame.actors.push_back({ego.position().x, ego.position().y, ego.heading(), ego.speed()});
    std::vector<OrientedRect> ext_rects;
    for (PathFollower& f : ext) {
      ext_rects.push_back(rect_of(f.position(), f.heading()));
      frame.actors.push_back({f.position().x, f.position().y, f.heading(), f.speed()});
      frame.detections.push_back(sense(ego_rect, ext_rects.back(), cfg));
    }
    trace.frames.push_back(frame);

    for (std::size_t i = 0; i < n_ext; ++i) {
      if (rect_overlap(ego_rect, ext_rects[i])) {
        trace.events.push_back({EventKind::Collision, t, static_cast<int>(i + 1), 0.0});
        collided_with = static_cast<int>(i + 1);
        break;
      }
      double gap = rect_gap(ego_rect, ext_rects[i]);
      if (gap < min_gap[i]) {
        min_gap[i] = gap;
        min_gap_t[i] = t;
      }
    }
    if (collided_with >= 0 || k >= last_frame) break;

    if (policy == PolicyKind::Oblivious) {
      ego.step(cfg.timestep);
    } else {
      double predicted = std::numeric_limits<double>::infinity();
      Vec2 ego_dir{std::cos(ego.heading()), std::sin(ego.heading())};
      for (std::size_t i = 0; i < n_ext; ++i) {
        if (!frame.detections[i].camera && !frame.detections[i].lidar) continue;
        Vec2 ext_dir{std::cos(ext[i].heading()), std::sin(ext[i].heading())};
        for (double tau = 0.0; tau <= params.horizon + 1e-9; tau += cfg.timestep) {
          OrientedRect e = rect_of(ego.position() + ego_dir * (v_cmd * tau), ego.heading());
          OrientedRect x =
              rect_of(ext[i].position() + ext_dir * (ext[i].speed() * tau), ext[i].heading());
          predicted = std::min(predicted, rect_gap(e, x));
        }
      }
      if (braking) {
        if (predicted >= params.resume_gap) braking = false;
      } else if (predicted < cfg.near_miss_gap) {
        braking = true;
      }
      double target = 0.0;
      if (!braking) {
        target = ego.target_speed();
        if (params.jitter_std > 0.0) target = std::max(0.0, target + gauss(rng) * params.jitter_std);
      }
      v_cmd += std::clamp(target - v_cmd, -params.decel * cfg.timestep,
                          params.decel * cfg.timestep);
      ego.step_at(cfg.timestep, v_cmd);
    }
    for (PathFollower& f : ext) f.step(cfg.timestep);
  }

  for (std::size_t i = 0; i < n_ext; ++i) {
    if (static_cast<int>(i + 1) == collided_with) continue;
    if (min_gap[i] > 0.0 && min_gap[i] <= cfg.near_miss_gap)
      trace.events.push_back({EventKind::NearMiss, min_gap_t[i], static_cast<int>(i + 1), min_gap[i]});
  }
  std::sort(trace.events.begin(), trace.events.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.actor < b.actor;
  });
  return trace;
}

std::string trace_to_jsonl(const SimTrace& trace) {
  std::ostringstream out;
  json h;
  h["type"] = "header";
  h["scenario_id"] = trace.header.scenario_id;
  h["policy"] = trace.header.policy;
  h["seed"] = trace.header.seed;
  h["timestep"] = trace.header.timestep;
  h["n_actors"] = trace.header.n_actors;
  h["config_hash"] = trace.header.config_hash;
  h["tool_version"] = trace.header.tool_version;
  h["created_at"] = trace.header.created_at;
  out << h.dump() << '\n';
  for (const Frame& f : trace.frames) {
    json jf;
    jf["type"] = "frame";
    jf["t"] = f.t;
    jf["actors"] = json::array();
    for (const ActorState& a : f.actors) jf["actors"].push_back({a.x, a.y, a.heading, a.speed});
    jf["detections"] = json::array();
    for (const Detection& d : f.detections) jf["detections"].push_back({d.camera, d.lidar});
    out << jf.dump() << '\n';
  }
  json je;
  je["type"] = "events";
  je["events"] = json::array();
  for (const Event& e : trace.events)
    je["events"].push_back(
        {{"kind", to_string(e.kind)}, {"t", e.t}, {"actor", e.actor}, {"gap", e.gap}});
  out << je.dump() << '\n';
  return out.str();
}

SimTrace trace_from_jsonl(const std::string& text) {
  SimTrace trace;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        trace.header.scenario_id = j.at("scenario_id").get<std::string>();
        trace.header.policy = j.at("policy").get<std::string>();
        trace.header.seed = j.at("seed").get<std::uint64_t>();
        trace.header.timestep = j.at("timestep").get<double>();
        trace.header.n_actors = j.at("n_actors").get<int>();
        trace.header.config_hash = j.value("config_hash", "");
        trace.header.tool_version = j.value("tool_version", "");
        trace.header.created_at = j.value("created_at", "");
        saw_header = true;
      } else if (type == "frame") {
        Frame f;
        f.t = j.at("t").get<double>();
        for (const auto& a : j.at("actors"))
          f.actors.push_back({a[0].get<double>(), a[1].get<double>(), a[2].get<double>(),
                              a[3].get<double>()});
        for (const auto& d : j.at("detections"))
          f.detections.push_back({d[0].get<bool>(), d[1].get<bool>()});
        trace.frames.push_back(std::move(f));
      } else if (type == "events") {
        for (const auto& e : j.at("events")) {
          Event ev;
          std::string kind = e.at("kind").get<std::string>();
          if (kind == "collision") ev.kind = EventKind::Collision;
          else if (kind == "near_miss") ev.kind = EventKind::NearMiss;
          else throw DataError("unknown event kind: " + kind);
          ev.t = e.at("t").get<double>();
          ev.actor = e.at("actor").get<int>();
          ev.gap = e.at("gap").get<double>();
          trace.events.push_back(ev);
        }
      } else {
        throw DataError("unknown trace record type: " + type);
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad trace: ") + e.what());
  }
  if (!saw_header) throw DataError("trace has no header record");
  return trace;
}

std::string trace_to_csv(const SimTrace& trace) {
  std::ostringstream out;
  out << "t,actor,x,y,heading,speed,camera,lidar\n";
  char buf[200];
  for (const Frame& f : trace.frames) {
    for (std::size_t i = 0; i < f.actors.size(); ++i) {
      const ActorState& a = f.actors[i];
      std::snprintf(buf, sizeof buf, "%.6f,%zu,%.6f,%.6f,%.6f,%.6f", f.t, i, a.x, a.y,
                    a.heading, a.speed);
      out << buf;
      if (i == 0) {
        out << ",,\n";
      } else {
        const Detection& d = f.detections[i - 1];
        out << ',' << (d.camera ? 1 : 0) << ',' << (d.lidar ? 1 : 0) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace junctiongen
