#pragma once
// Simulated world: cameras, transmitters, moving targets, occluders, road
// regions and privacy policies. A Scene is immutable once built.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rflabel/geometry.hpp"

namespace rflabel {

enum class Activity { stationary, walking, running, biking };

std::string_view to_string(Activity a);
Activity activity_from_string(std::string_view s);

/// Pinhole camera. Orientation angles are applied as R = Rz(yaw) * Ry(pitch) * Rx(roll),
/// where R maps camera-frame vectors (x right, y down, z forward) to world vectors.
/// All-zero angles therefore make the camera frame coincide with the world frame.
/// Use CameraModel::level_orientation for a horizontal camera over the z-up ground.
struct CameraModel {
  std::string id;
  Vec3 position;
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  double focal_length = 1000.0;
  Vec2 principal_point{640.0, 360.0};
  int image_width = 1280;
  int image_height = 720;
  double frame_rate = 10.0;

  Mat3 rotation() const;  // camera -> world
  double frame_period() const { return 1.0 / frame_rate; }

  struct Angles {
    double yaw, pitch, roll;
  };
  /// Angles for a camera whose optical axis is horizontal, pointing along
  /// (-sin(heading), cos(heading)) in the world xy plane, tilted down by `tilt_down`.
  static Angles level_orientation(double heading, double tilt_down = 0.0);
};

struct TxNode {
  std::string id;
  Vec3 position;
  double tx_power_dbm = 20.0;
};

struct Waypoint {
  double t = 0.0;
  Vec2 pos;
  bool operator==(const Waypoint&) const = default;
};
using Trajectory = std::vector<Waypoint>;

struct Target {
  std::string id;
  std::optional<std::string> device_id;  // absent => RF-invisible
  double true_height = 1.76;
  Trajectory trajectory;
  Activity activity_truth = Activity::walking;

  bool rf_visible() const { return device_id.has_value(); }
  double start_time() const { return trajectory.front().t; }
  double end_time() const { return trajectory.back().t; }
  bool active_at(double t) const {
    return !trajectory.empty() && t >= start_time() && t <= end_time();
  }
};

struct Occluder {
  std::string id;
  Polygon footprint;
  double height = 2.0;
};

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
};

struct OptOutPolicy {
  std::string device_id;
  bool full_opt_out = false;
  std::vector<TimeWindow> time_windows;
  std::vector<Polygon> regions;

  /// True when a record for this device at time t (and ground position, when
  /// known) must be suppressed. Region policies suppress unlocatable records.
  bool suppresses(double t, const std::optional<Vec2>& ground) const;
};

struct RoadRegion {
  std::string name;
  Polygon polygon;
};

/// Instantaneous speed bands per activity (m/s).
struct SpeedBand {
  double lo = 0.0;
  double hi = 0.0;
};
struct SpeedBands {
  SpeedBand stationary{0.0, 0.2};
  SpeedBand walking{1.0, 1.8};
  SpeedBand running{2.2, 3.5};
  SpeedBand biking{3.5, 7.0};

  const SpeedBand& band(Activity a) const;
};

struct Scene {
  std::vector<CameraModel> cameras;
  std::vector<TxNode> transmitters;
  std::vector<Target> targets;
  std::vector<Occluder> occluders;
  std::vector<OptOutPolicy> opt_out_policies;
  std::vector<RoadRegion> road_regions;
  Rect bounds;
  double duration = 0.0;
  double burst_rate = 5.0;  // localization instances per second per target

  const CameraModel& camera(std::string_view id) const;
  const TxNode& transmitter(std::string_view id) const;
  const Target* target_by_device(std::string_view device_id) const;
  const RoadRegion* road_region(std::string_view name) const;
  /// Transmitters used for an error configuration with `num_tx` nodes: the first `num_tx`.
  std::vector<TxNode> active_transmitters(int num_tx) const;
};

/// Validates every invariant of the scene types and returns the scene unchanged.
/// Throws ConfigError naming the offending entity id.
/// `require_rf` additionally demands >= 1 camera and >= 2 transmitters.
Scene build_scene(Scene scene, bool require_rf = true);

/// Piecewise-linear interpolation; exact at waypoints. Throws ConfigError outside the span.
Vec2 position_at(const Target& target, double t);

/// 1 Hz random walk with per-step speed drawn uniformly from the activity's band,
/// every waypoint inside `region`. Throws InfeasibleError if the region cannot
/// hold a step of the required length.
Trajectory generate_trajectory(Activity kind, double duration, const Polygon& region,
                               std::uint64_t seed, const SpeedBands& bands = {});

}  // namespace rflabel
