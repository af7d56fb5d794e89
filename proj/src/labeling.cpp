#include "rflabel/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rflabel/error.hpp"

namespace rflabel {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::GroundTruth: return "GroundTruth";
    case Provenance::RF: return "RF";
    case Provenance::EmulatedHuman: return "EmulatedHuman";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "GroundTruth") return Provenance::GroundTruth;
  if (s == "RF") return Provenance::RF;
  if (s == "EmulatedHuman") return Provenance::EmulatedHuman;
  throw ConfigError("unknown provenance '" + std::string(s) + "'");
}

std::string frame_id_for(const CameraModel& camera, std::size_t tick) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06zu", tick);
  return camera.id + buf;
}

std::size_t frame_count(const CameraModel& camera, double duration) {
  return static_cast<std::size_t>(std::floor(duration * camera.frame_rate + 1e-9)) + 1;
}

std::optional<std::size_t> match_frame(const CameraModel& camera, double duration, double t) {
  const double x = t * camera.frame_rate;
  const double k = std::ceil(x - 0.5);
  if (k < 0.0 || k >= static_cast<double>(frame_count(camera, duration))) return std::nullopt;
  return static_cast<std::size_t>(k);
}

namespace {

bool segment_blocked(const Occluder& o, Vec3 from, Vec3 to) {
  for (const auto& [t0, t1] : segment_inside_intervals(from.xy(), to.xy(), o.footprint)) {
    const double z0 = from.z + t0 * (to.z - from.z);
    const double z1 = from.z + t1 * (to.z - from.z);
    if (std::min(z0, z1) < o.height) return true;
  }
  return false;
}

double foot_depth(const CameraModel& camera, Vec2 ground) {
  return world_to_camera(camera, {ground.x, ground.y, 0.0}).z;
}

}  // namespace

double body_occlusion_fraction(const Scene& scene, const CameraModel& camera, Vec2 ground,
                               double height, double aspect, const OcclusionParams& params) {
  if (scene.occluders.empty()) return 0.0;
  Vec2 ray = ground - camera.position.xy();
  const double len = norm(ray);
  ray = len > 1e-12 ? ray * (1.0 / len) : Vec2{0.0, 1.0};
  const Vec2 side{-ray.y, ray.x};
  const double width = aspect * height;

  int blocked = 0;
  for (int i = 0; i < params.grid_columns; ++i) {
    const double offset = -0.5 * width + (i + 0.5) * width / params.grid_columns;
    const Vec2 column = ground + side * offset;
    for (int j = 0; j < params.grid_rows; ++j) {
      const Vec3 point{column.x, column.y, (j + 0.5) * height / params.grid_rows};
      for (const Occluder& o : scene.occluders) {
        if (segment_blocked(o, camera.position, point)) {
          ++blocked;
          break;
        }
      }
    }
  }
  return static_cast<double>(blocked) / (params.grid_columns * params.grid_rows);
}

bool in_occluder_shadow(const Scene& scene, const CameraModel& camera, Vec2 ground,
                        double target_height) {
  for (const Occluder& o : scene.occluders) {
    if (o.height <= std::min(camera.position.z, target_height)) continue;
    if (segment_intersects_polygon(camera.position.xy(), ground, o.footprint) &&
        !point_in_polygon(camera.position.xy(), o.footprint)) {
      return true;
    }
  }
  return false;
}

Label ground_truth_label(const Scene& scene, const CameraModel& camera, const Target& target,
                         double t, double aspect, const OcclusionParams& params) {
  const Vec2 g = position_at(target, t);
  Label label;
  label.bbox = synthesize_bbox(camera, g, target.true_height, aspect);
  label.depth = foot_depth(camera, g);
  label.identity = target.device_id;
  label.confidence = 1.0;
  label.provenance = Provenance::GroundTruth;
  label.occluded =
      body_occlusion_fraction(scene, camera, g, target.true_height, aspect, params) > params.threshold;
  return label;
}

std::vector<Frame> generate_ground_truth(const Scene& scene, const CameraModel& camera,
                                         const BodyBoxParams& body,
                                         const OcclusionParams& params) {
  const std::size_t n = frame_count(camera, scene.duration);
  std::vector<Frame> frames(n);
  for (std::size_t k = 0; k < n; ++k) {
    Frame& f = frames[k];
    f.frame_id = frame_id_for(camera, k);
    f.camera_id = camera.id;
    f.timestamp = static_cast<double>(k) / camera.frame_rate;
    for (const Target& target : scene.targets) {
      if (!target.active_at(f.timestamp)) continue;
      try {
        f.labels.push_back(
            ground_truth_label(scene, camera, target, f.timestamp, body.aspect_ratio, params));
      } catch (const InfeasibleError&) {
        // outside the frustum
      }
    }
  }
  return frames;
}

std::vector<Frame> generate_rf_labels(const Scene& scene, const CameraModel& camera,
                                      std::span<const LocalizationFix> fixes,
                                      const BodyBoxParams& body) {
  const std::size_t n = frame_count(camera, scene.duration);
  std::vector<Frame> frames(n);
  for (std::size_t k = 0; k < n; ++k) {
    frames[k].frame_id = frame_id_for(camera, k);
    frames[k].camera_id = camera.id;
    frames[k].timestamp = static_cast<double>(k) / camera.frame_rate;
  }

  // One label per (frame, identity): the fix closest in time wins, earlier fix on ties.
  struct Pick {
    const LocalizationFix* fix;
    double gap;
  };
  std::vector<std::map<std::string, Pick>> picks(n);
  for (const LocalizationFix& fix : fixes) {
    const auto k = match_frame(camera, scene.duration, fix.timestamp);
    if (!k) continue;
    const double gap = std::abs(fix.timestamp - frames[*k].timestamp);
    auto [it, inserted] = picks[*k].try_emplace(fix.target_id, Pick{&fix, gap});
    if (!inserted && (gap < it->second.gap ||
                      (gap == it->second.gap && fix.timestamp < it->second.fix->timestamp))) {
      it->second = Pick{&fix, gap};
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& [identity, pick] : picks[k]) {
      Label label;
      try {
        label.bbox = synthesize_bbox(camera, pick.fix->position, body.mean_height, body.aspect_ratio);
      } catch (const InfeasibleError&) {
        continue;
      }
      label.depth = foot_depth(camera, pick.fix->position);
      label.identity = identity;
      label.confidence = pick.fix->confidence;
      label.provenance = Provenance::RF;
      frames[k].labels.push_back(std::move(label));
    }
  }
  return frames;
}

std::vector<Frame> apply_optout(std::vector<Frame> frames, std::span<const OptOutPolicy> policies,
                                std::span<const CameraModel> cameras, const BodyBoxParams& body) {
  if (policies.empty()) return frames;
  auto policy_for = [&](const std::string& id) -> const OptOutPolicy* {
    for (const auto& p : policies) {
      if (p.device_id == id) return &p;
    }
    return nullptr;
  };
  auto camera_for = [&](const std::string& id) -> const CameraModel* {
    for (const auto& c : cameras) {
      if (c.id == id) return &c;
    }
    return nullptr;
  };

  for (Frame& f : frames) {
    const CameraModel* camera = camera_for(f.camera_id);
    std::erase_if(f.labels, [&](const Label& label) {
      if (!label.identity) return false;
      const OptOutPolicy* policy = policy_for(*label.identity);
      if (!policy) return false;
      std::optional<Vec2> ground;
      if (!policy->regions.empty() && camera && !label.bbox.clipped) {
        try {
          ground = back_project(*camera, label.bbox, body.mean_height).ground;
        } catch (const Error&) {
        }
      }
      return policy->suppresses(f.timestamp, ground);
    });
  }
  return frames;
}

Activity classify_activity(std::span<const LocalizationFix> fixes,
                           std::span<const RoadRegion> road_regions, const ActivityParams& params) {
  if (fixes.size() < 2) throw ConfigError("activity classification needs at least two fixes");
  const double span = fixes.back().timestamp - fixes.front().timestamp;
  if (span < params.window) {
    throw ConfigError("activity classification needs fixes spanning the " +
                      std::to_string(params.window) + " s smoothing window");
  }

  std::vector<double> speeds;
  std::size_t j = 0;
  for (std::size_t i = 0; i < fixes.size(); ++i) {
    j = std::max(j, i + 1);
    while (j < fixes.size() && fixes[j].timestamp - fixes[i].timestamp < params.window) ++j;
    if (j >= fixes.size()) break;
    const double dt = fixes[j].timestamp - fixes[i].timestamp;
    speeds.push_back(distance(fixes[j].position, fixes[i].position) / dt);
  }
  std::nth_element(speeds.begin(), speeds.begin() + static_cast<long>(speeds.size() / 2), speeds.end());
  double speed = speeds[speeds.size() / 2];
  if (speeds.size() % 2 == 0) {
    const double lower = *std::max_element(speeds.begin(), speeds.begin() + static_cast<long>(speeds.size() / 2));
    speed = 0.5 * (speed + lower);
  }

  const SpeedBands& b = params.bands;
  if (speed >= b.running.lo) {
    std::size_t in_lane = 0;
    for (const RoadRegion& r : road_regions) {
      if (r.name != params.bike_lane_region) continue;
      for (const auto& f : fixes) in_lane += point_in_polygon(f.position, r.polygon) ? 1 : 0;
    }
    if (2 * in_lane > fixes.size()) return Activity::biking;
    return (speed > b.running.hi && speed >= b.biking.lo) ? Activity::biking : Activity::running;
  }
  // Below running: nearest band, gaps split at their midpoints.
  if (speed < 0.5 * (b.stationary.hi + b.walking.lo)) return Activity::stationary;
  if (speed < 0.5 * (b.walking.hi + b.running.lo)) return Activity::walking;
  return Activity::running;
}

std::map<std::string, std::vector<CorrelatedLabel>> correlate_identities(
    std::span<const Frame> frames) {
  std::map<std::string, std::vector<CorrelatedLabel>> groups;
  for (const Frame& f : frames) {
    for (const Label& label : f.labels) {
      if (!label.identity) continue;
      groups[*label.identity].push_back({f.camera_id, f.frame_id, f.timestamp, label});
    }
  }
  for (auto& [id, entries] : groups) {
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.camera_id < b.camera_id;
    });
  }
  return groups;
}

}  // namespace rflabel
