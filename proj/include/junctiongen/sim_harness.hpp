#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "junctiongen/concrete_gen.hpp"
#include "junctiongen/geometry.hpp"

namespace junctiongen {

enum class PolicyKind { Oblivious, ReactiveBrake };

const char* to_string(PolicyKind p);
PolicyKind policy_from_string(const std::string& s);

struct ReactiveParams {
  double decel = 4.0;       // m/s^2, also the resume ramp rate
  double horizon = 2.5;     // seconds of constant-velocity lookahead
  double resume_gap = 6.0;  // meters; braking holds until gaps clear this
  double jitter_std = 0.0;  // gaussian sigma on the target speed, per frame
};

struct SimConfig {
  double timestep = 0.05;
  double max_duration = 30.0;
  double near_miss_gap = 1.0;
  double camera_fov_deg = 132.0;
  double camera_range = 60.0;
  double lidar_forward = 32.0;    // box ahead of the ego front bumper
  double lidar_half_width = 16.0;
};

struct Detection {
  bool camera = false;
  bool lidar = false;
};

struct ActorState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
};

struct Frame {
  double t = 0.0;
  std::vector<ActorState> actors;
  std::vector<Detection> detections;  // one per external, ego's view
};

enum class EventKind { Collision, NearMiss };

const char* to_string(EventKind k);

struct Event {
  EventKind kind = EventKind::Collision;
  double t = 0.0;
  int actor = 0;   // external actor index
  double gap = 0.0;
};

struct TraceHeader {
  std::string scenario_id;
  std::string policy;
  std::uint64_t seed = 0;
  double timestep = 0.05;
  int n_actors = 0;
  std::string config_hash;
  std::string tool_version;
  std::string created_at;
};

struct SimTrace {
  TraceHeader header;
  std::vector<Frame> frames;
  std::vector<Event> events;
};

/// Camera: field-of-view wedge around the ego heading, range-limited.
/// Lidar: axis-aligned box in the ego frame, anchored at the front bumper.
/// A target registers when any corner (or, for the camera, the nearest
/// boundary point) qualifies.
Detection sense(const OrientedRect& ego, const OrientedRect& target, const SimConfig& cfg);

/// Fixed-step replay of a concrete scenario. Externals always follow their
/// paths obliviously; the policy only drives the ego. The trace ends at the
/// first ego collision or at max_duration.
SimTrace run_simulation(const ConcreteScenario& scenario, PolicyKind policy,
                        const ReactiveParams& params, const SimConfig& cfg, std::uint64_t seed,
                        bool externals_enabled = true);

std::string trace_to_jsonl(const SimTrace& trace);
SimTrace trace_from_jsonl(const std::string& text);
std::string trace_to_csv(const SimTrace& trace);

}  // namespace junctiongen
