#include "rflabel/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "rflabel/error.hpp"
#include "rflabel/rng.hpp"

namespace rflabel {

std::string_view to_string(Activity a) {
  switch (a) {
    case Activity::stationary: return "stationary";
    case Activity::walking: return "walking";
    case Activity::running: return "running";
    case Activity::biking: return "biking";
  }
  return "unknown";
}

Activity activity_from_string(std::string_view s) {
  if (s == "stationary") return Activity::stationary;
  if (s == "walking") return Activity::walking;
  if (s == "running") return Activity::running;
  if (s == "biking") return Activity::biking;
  throw ConfigError("unknown activity '" + std::string(s) + "'");
}

Mat3 CameraModel::rotation() const {
  return rotation_z(yaw) * rotation_y(pitch) * rotation_x(roll);
}

CameraModel::Angles CameraModel::level_orientation(double heading, double tilt_down) {
  return {heading, 0.0, -(std::numbers::pi / 2.0 + tilt_down)};
}

bool OptOutPolicy::suppresses(double t, const std::optional<Vec2>& ground) const {
  if (full_opt_out) return true;
  for (const TimeWindow& w : time_windows) {
    if (t >= w.start && t <= w.end) return true;
  }
  if (!regions.empty()) {
    if (!ground) return true;
    for (const Polygon& r : regions) {
      if (point_in_polygon(*ground, r)) return true;
    }
  }
  return false;
}

const SpeedBand& SpeedBands::band(Activity a) const {
  switch (a) {
    case Activity::stationary: return stationary;
    case Activity::walking: return walking;
    case Activity::running: return running;
    case Activity::biking: return biking;
  }
  return walking;
}

const CameraModel& Scene::camera(std::string_view id) const {
  for (const auto& c : cameras) {
    if (c.id == id) return c;
  }
  throw ConfigError("unknown camera '" + std::string(id) + "'");
}

const TxNode& Scene::transmitter(std::string_view id) const {
  for (const auto& t : transmitters) {
    if (t.id == id) return t;
  }
  throw ConfigError("unknown transmitter '" + std::string(id) + "'");
}

const Target* Scene::target_by_device(std::string_view device_id) const {
  for (const auto& t : targets) {
    if (t.device_id && *t.device_id == device_id) return &t;
  }
  return nullptr;
}

const RoadRegion* Scene::road_region(std::string_view name) const {
  for (const auto& r : road_regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::vector<TxNode> Scene::active_transmitters(int num_tx) const {
  if (num_tx < 2) throw ConfigError("at least 2 transmitters are required");
  if (static_cast<std::size_t>(num_tx) > transmitters.size()) {
    throw ConfigError("error configuration needs " + std::to_string(num_tx) +
                      " transmitters but the scene defines " +
                      std::to_string(transmitters.size()));
  }
  return {transmitters.begin(), transmitters.begin() + num_tx};
}

namespace {

void require(bool ok, const std::string& entity, const std::string& message) {
  if (!ok) throw ConfigError(entity + ": " + message);
}

void require_unique(std::set<std::string>& seen, const std::string& kind, const std::string& id) {
  require(!id.empty(), kind, "empty id");
  require(seen.insert(id).second, kind + " '" + id + "'", "duplicate id");
}

}  // namespace

Scene build_scene(Scene scene, bool require_rf) {
  const Rect& b = scene.bounds;
  require(b.max.x > b.min.x && b.max.y > b.min.y, "scene", "bounds must have positive extent");
  require(scene.duration > 0.0, "scene", "duration must be positive");
  require(scene.burst_rate > 0.0, "scene", "burst_rate must be positive");
  if (require_rf) {
    require(!scene.cameras.empty(), "scene", "at least one camera is required");
    require(scene.transmitters.size() >= 2, "scene", "at least two transmitters are required");
  }

  std::set<std::string> ids;
  for (const auto& c : scene.cameras) {
    const std::string who = "camera '" + c.id + "'";
    require_unique(ids, "camera", c.id);
    require(c.focal_length > 0.0, who, "focal_length must be positive");
    require(c.frame_rate > 0.0, who, "frame_rate must be positive");
    require(c.image_width > 0 && c.image_height > 0, who, "image_size must be positive");
    require(c.principal_point.x >= 0.0 && c.principal_point.x <= c.image_width &&
                c.principal_point.y >= 0.0 && c.principal_point.y <= c.image_height,
            who, "principal_point outside image");
    require(b.contains(c.position.xy()), who, "position out of bounds");
  }

  ids.clear();
  for (const auto& t : scene.transmitters) {
    require_unique(ids, "transmitter", t.id);
    require(b.contains(t.position.xy()), "transmitter '" + t.id + "'", "position out of bounds");
  }

  ids.clear();
  std::set<std::string> devices;
  for (const auto& t : scene.targets) {
    const std::string who = "target '" + t.id + "'";
    require_unique(ids, "target", t.id);
    if (t.device_id) {
      require(!t.device_id->empty(), who, "empty device_id");
      require(devices.insert(*t.device_id).second, who,
              "duplicate device_id '" + *t.device_id + "'");
    }
    require(t.true_height > 0.5 && t.true_height < 2.5, who, "true_height must be in (0.5, 2.5) m");
    require(!t.trajectory.empty(), who, "empty trajectory");
    for (std::size_t i = 0; i < t.trajectory.size(); ++i) {
      if (i > 0) {
        require(t.trajectory[i].t > t.trajectory[i - 1].t, who,
                "trajectory timestamps must be strictly increasing");
      }
      require(b.contains(t.trajectory[i].pos), who, "trajectory position out of bounds");
    }
  }

  ids.clear();
  for (const auto& o : scene.occluders) {
    const std::string who = "occluder '" + o.id + "'";
    require_unique(ids, "occluder", o.id);
    require(is_simple_polygon(o.footprint), who, "footprint is not a simple polygon");
    require(o.height > 0.0, who, "height must be positive");
  }

  ids.clear();
  for (const auto& r : scene.road_regions) {
    require_unique(ids, "road_region", r.name);
    require(is_simple_polygon(r.polygon), "road_region '" + r.name + "'",
            "polygon is not simple");
  }

  ids.clear();
  for (const auto& p : scene.opt_out_policies) {
    const std::string who = "opt_out '" + p.device_id + "'";
    require_unique(ids, "opt_out", p.device_id);
    std::vector<TimeWindow> w = p.time_windows;
    std::sort(w.begin(), w.end(), [](const auto& a, const auto& c) { return a.start < c.start; });
    for (std::size_t i = 0; i < w.size(); ++i) {
      require(w[i].start < w[i].end, who, "time window start must precede end");
      if (i > 0) require(w[i].start > w[i - 1].end, who, "time windows overlap");
    }
    for (const auto& r : p.regions) require(is_simple_polygon(r), who, "region is not simple");
  }
  return scene;
}

Vec2 position_at(const Target& target, double t) {
  const Trajectory& tr = target.trajectory;
  if (tr.empty() || t < tr.front().t || t > tr.back().t) {
    throw ConfigError("target '" + target.id + "': time " + std::to_string(t) +
                      " outside trajectory span");
  }
  auto it = std::lower_bound(tr.begin(), tr.end(), t,
                             [](const Waypoint& w, double v) { return w.t < v; });
  if (it->t == t) return it->pos;
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return a.pos + (b.pos - a.pos) * s;
}

Trajectory generate_trajectory(Activity kind, double duration, const Polygon& region,
                               std::uint64_t seed, const SpeedBands& bands) {
  if (duration <= 0.0) throw ConfigError("trajectory duration must be positive");
  if (!is_simple_polygon(region)) throw ConfigError("trajectory region is not a simple polygon");

  Rng rng(derive_seed(seed, {std::string_view("trajectory"), std::string_view(to_string(kind))}));
  Vec2 lo = region.front(), hi = region.front();
  for (Vec2 p : region) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }

  Vec2 pos;
  bool placed = false;
  for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
    pos = {rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    placed = point_in_polygon(pos, region);
  }
  if (!placed) throw InfeasibleError("trajectory region has no usable interior");

  const SpeedBand band = bands.band(kind);
  const bool moving = kind != Activity::stationary;
  double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);

  Trajectory out;
  out.push_back({0.0, pos});
  double t = 0.0;
  while (t < duration) {
    const double dt = std::min(1.0, duration - t);
    t = (duration - t <= 1.0) ? duration : t + 1.0;
    if (!moving) {
      out.push_back({t, pos});
      continue;
    }
    const double step = rng.uniform(band.lo, band.hi) * dt;
    bool stepped = false;
    constexpr int kAttempts = 256;
    for (int attempt = 0; attempt < kAttempts && !stepped; ++attempt) {
      // Mostly keep going straight; widen the search after the first few misses.
      const double candidate = attempt < 8 ? heading + rng.uniform(-0.4, 0.4)
                                           : rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec2 next = pos + Vec2{std::cos(candidate), std::sin(candidate)} * step;
      if (point_in_polygon(next, region)) {
        pos = next;
        heading = candidate;
        stepped = true;
      }
    }
    if (!stepped) {
      throw InfeasibleError("trajectory region too small for a " + std::string(to_string(kind)) +
                            " step of " + std::to_string(step) + " m");
    }
    out.push_back({t, pos});
  }
  return out;
}

}  // namespace rflabel
