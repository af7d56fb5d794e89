#include "rflabel/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rflabel/error.hpp"
#include "rflabel/rng.hpp"

namespace rflabel::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": malformed JSON (" + e.what() + ")");
  }
}

json load_json(const fs::path& path) { return parse_json(read_file(path), path.string()); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string digest(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(j.dump())));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

// Runs a JSON accessor chain and turns library type/key errors into ConfigError.
template <typename F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

const json& require(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(what + ": missing key '" + key + "'");
  }
  return j.at(key);
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-element array, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element array, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(Vec2 v) { return json::array({v.x, v.y}); }
json to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Polygon polygon_from(const json& j) {
  if (!j.is_array()) throw ConfigError("expected a polygon (array of points)");
  Polygon p;
  for (const auto& pt : j) p.push_back(vec2_from(pt));
  return p;
}

json to_json(const Polygon& p) {
  json out = json::array();
  for (const Vec2& v : p) out.push_back(to_json(v));
  return out;
}

std::optional<double> optional_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

double pingpong(double lo, double hi, double start, bool upward, double speed, double t) {
  const double span = hi - lo;
  double s = upward ? start - lo : span + (hi - start);
  s = std::fmod(s + speed * t, 2.0 * span);
  return s <= span ? lo + s : hi - (s - span);
}

}  // namespace

CameraModel camera_from_json(const json& j) {
  const std::string what = "camera";
  return guarded(what, [&] {
    CameraModel c;
    c.id = require(j, "id", what).get<std::string>();
    const std::string ctx = "camera '" + c.id + "'";
    c.position = vec3_from(require(j, "position", ctx));
    if (j.contains("heading")) {
      const auto a = CameraModel::level_orientation(j.at("heading").get<double>(),
                                                    value_or(j, "tilt_down", 0.0));
      c.yaw = a.yaw;
      c.pitch = a.pitch;
      c.roll = a.roll;
    } else {
      c.yaw = value_or(j, "yaw", 0.0);
      c.pitch = value_or(j, "pitch", 0.0);
      c.roll = value_or(j, "roll", 0.0);
    }
    c.focal_length = require(j, "focal_length", ctx).get<double>();
    c.principal_point = vec2_from(require(j, "principal_point", ctx));
    const json& size = require(j, "image_size", ctx);
    if (!size.is_array() || size.size() != 2) throw ConfigError(ctx + ": image_size must be [w, h]");
    c.image_width = size[0].get<int>();
    c.image_height = size[1].get<int>();
    c.frame_rate = require(j, "frame_rate", ctx).get<double>();
    if (!(c.focal_length > 0.0) || !(c.frame_rate > 0.0) || c.image_width <= 0 ||
        c.image_height <= 0) {
      throw ConfigError(ctx + ": focal_length, frame_rate and image_size must be positive");
    }
    return c;
  });
}

json camera_to_json(const CameraModel& c) {
  return {{"id", c.id},
          {"position", to_json(c.position)},
          {"yaw", c.yaw},
          {"pitch", c.pitch},
          {"roll", c.roll},
          {"focal_length", c.focal_length},
          {"principal_point", to_json(c.principal_point)},
          {"image_size", json::array({c.image_width, c.image_height})},
          {"frame_rate", c.frame_rate}};
}

SceneConfig scene_from_json(const json& j, std::uint64_t seed) {
  const std::string what = "scene";
  SceneConfig cfg;
  Scene& s = cfg.scene;
  guarded(what, [&] {
    if (!j.is_object()) throw ConfigError("scene: top level must be an object");
    const json& b = require(j, "bounds", what);
    s.bounds = {vec2_from(require(b, "min", "bounds")), vec2_from(require(b, "max", "bounds"))};
    s.duration = require(j, "duration", what).get<double>();
    s.burst_rate = value_or(j, "burst_rate", 5.0);

    for (const auto& c : require(j, "cameras", what)) s.cameras.push_back(camera_from_json(c));
    for (const auto& t : require(j, "transmitters", what)) {
      TxNode tx;
      tx.id = require(t, "id", "transmitter").get<std::string>();
      tx.position = vec3_from(require(t, "position", "transmitter '" + tx.id + "'"));
      tx.tx_power_dbm = value_or(t, "tx_power_dbm", 20.0);
      s.transmitters.push_back(tx);
    }
    for (const auto& o : value_or(j, "occluders", json::array())) {
      Occluder occ;
      occ.id = require(o, "id", "occluder").get<std::string>();
      const std::string ctx = "occluder '" + occ.id + "'";
      occ.footprint = polygon_from(require(o, "footprint", ctx));
      occ.height = require(o, "height", ctx).get<double>();
      s.occluders.push_back(occ);
    }
    for (const auto& r : value_or(j, "road_regions", json::array())) {
      RoadRegion region;
      region.name = require(r, "name", "road region").get<std::string>();
      region.polygon = polygon_from(require(r, "polygon", "road region '" + region.name + "'"));
      s.road_regions.push_back(region);
    }
    for (const auto& p : value_or(j, "opt_out", json::array())) {
      OptOutPolicy policy;
      policy.device_id = require(p, "device_id", "opt_out").get<std::string>();
      policy.full_opt_out = value_or(p, "full", false);
      for (const auto& w : value_or(p, "time_windows", json::array())) {
        const Vec2 se = vec2_from(w);
        policy.time_windows.push_back({se.x, se.y});
      }
      for (const auto& r : value_or(p, "regions", json::array())) {
        policy.regions.push_back(polygon_from(r));
      }
      s.opt_out_policies.push_back(policy);
    }
    for (const auto& t : require(j, "targets", what)) {
      Target target;
      target.id = require(t, "id", "target").get<std::string>();
      const std::string ctx = "target '" + target.id + "'";
      target.device_id = optional_string(t, "device_id");
      target.true_height = require(t, "true_height", ctx).get<double>();
      target.activity_truth = activity_from_string(value_or<std::string>(t, "activity", "walking"));
      if (t.contains("generate")) {
        const json& g = t.at("generate");
        const Polygon region =
            g.contains("region") ? polygon_from(g.at("region")) : s.bounds.as_polygon();
        target.trajectory =
            generate_trajectory(target.activity_truth, s.duration, region,
                                derive_seed(seed, {std::string_view("trajectory"),
                                                   std::string_view(target.id)}));
      } else {
        for (const auto& w : require(t, "trajectory", ctx)) {
          if (!w.is_array() || w.size() != 3) {
            throw ConfigError(ctx + ": trajectory entries must be [t, x, y]");
          }
          target.trajectory.push_back({w[0].get<double>(), {w[1].get<double>(), w[2].get<double>()}});
        }
      }
      s.targets.push_back(target);
    }
    if (j.contains("ranging")) {
      const json& r = j.at("ranging");
      const double dof = value_or(r, "t_dof", cfg.ranging.t_dof);
      RangingModel m = RangingModel::with_stddev(value_or(r, "stddev", 0.54), dof);
      if (r.contains("t_scale")) m.t_scale = r.at("t_scale").get<double>();
      m.nlos_extra_path = value_or(r, "nlos_extra_path", m.nlos_extra_path);
      m.nlos_rss_penalty = value_or(r, "nlos_rss_penalty", m.nlos_rss_penalty);
      m.pathloss_exponent = value_or(r, "pathloss_exponent", m.pathloss_exponent);
      m.ref_rss_1m = value_or(r, "ref_rss_1m", m.ref_rss_1m);
      m.device_height = value_or(r, "device_height", m.device_height);
      validate(m);
      cfg.ranging = m;
    }
    return 0;
  });
  cfg.scene = build_scene(std::move(cfg.scene));
  return cfg;
}

json scene_to_json(const SceneConfig& cfg) {
  const Scene& s = cfg.scene;
  json j;
  j["bounds"] = {{"min", to_json(s.bounds.min)}, {"max", to_json(s.bounds.max)}};
  j["duration"] = s.duration;
  j["burst_rate"] = s.burst_rate;
  j["cameras"] = json::array();
  for (const auto& c : s.cameras) j["cameras"].push_back(camera_to_json(c));
  j["transmitters"] = json::array();
  for (const auto& t : s.transmitters) {
    j["transmitters"].push_back(
        {{"id", t.id}, {"position", to_json(t.position)}, {"tx_power_dbm", t.tx_power_dbm}});
  }
  j["targets"] = json::array();
  for (const auto& t : s.targets) {
    json traj = json::array();
    for (const auto& w : t.trajectory) traj.push_back({w.t, w.pos.x, w.pos.y});
    j["targets"].push_back({{"id", t.id},
                            {"device_id", t.device_id ? json(*t.device_id) : json(nullptr)},
                            {"true_height", t.true_height},
                            {"activity", to_string(t.activity_truth)},
                            {"trajectory", traj}});
  }
  j["occluders"] = json::array();
  for (const auto& o : s.occluders) {
    j["occluders"].push_back({{"id", o.id}, {"footprint", to_json(o.footprint)}, {"height", o.height}});
  }
  j["road_regions"] = json::array();
  for (const auto& r : s.road_regions) {
    j["road_regions"].push_back({{"name", r.name}, {"polygon", to_json(r.polygon)}});
  }
  j["opt_out"] = json::array();
  for (const auto& p : s.opt_out_policies) {
    json windows = json::array();
    for (const auto& w : p.time_windows) windows.push_back({w.start, w.end});
    json regions = json::array();
    for (const auto& r : p.regions) regions.push_back(to_json(r));
    j["opt_out"].push_back({{"device_id", p.device_id},
                            {"full", p.full_opt_out},
                            {"time_windows", windows},
                            {"regions", regions}});
  }
  const RangingModel& m = cfg.ranging;
  j["ranging"] = {{"t_dof", m.t_dof},
                  {"t_scale", m.t_scale},
                  {"nlos_extra_path", m.nlos_extra_path},
                  {"nlos_rss_penalty", m.nlos_rss_penalty},
                  {"pathloss_exponent", m.pathloss_exponent},
                  {"ref_rss_1m", m.ref_rss_1m},
                  {"device_height", m.device_height}};
  return j;
}

SceneConfig load_scene(const std::string& path_or_template, std::uint64_t seed) {
  if (path_or_template == "street") return street_template();
  return scene_from_json(load_json(path_or_template), seed);
}

SceneConfig street_template() {
  SceneConfig cfg;
  Scene& s = cfg.scene;
  s.bounds = {{0.0, 0.0}, {5.0, 40.0}};
  s.duration = 30.0;
  s.burst_rate = 5.0;

  auto camera = [](std::string id, Vec3 pos, double heading) {
    CameraModel c;
    c.id = std::move(id);
    c.position = pos;
    const auto a = CameraModel::level_orientation(heading);
    c.yaw = a.yaw;
    c.pitch = a.pitch;
    c.roll = a.roll;
    c.focal_length = 1000.0;
    c.principal_point = {640.0, 360.0};
    c.image_width = 1280;
    c.image_height = 720;
    c.frame_rate = 5.0;
    return c;
  };
  s.cameras.push_back(camera("cam0", {2.5, 0.0, 1.5}, 0.0));
  s.cameras.push_back(camera("cam1", {2.5, 40.0, 1.5}, std::numbers::pi));

  s.transmitters = {{"tx0", {1.0, 0.0, 2.5}, 20.0},  {"tx1", {4.0, 0.0, 2.5}, 20.0},
                    {"tx2", {0.0, 20.0, 2.5}, 20.0}, {"tx3", {5.0, 20.0, 2.5}, 20.0},
                    {"tx4", {0.0, 40.0, 2.5}, 20.0}, {"tx5", {5.0, 40.0, 2.5}, 20.0}};
  s.occluders.push_back({"kiosk", {{2.0, 26.0}, {3.0, 26.0}, {3.0, 27.0}, {2.0, 27.0}}, 3.0});
  s.road_regions.push_back({"sidewalk", {{0.0, 0.0}, {1.5, 0.0}, {1.5, 40.0}, {0.0, 40.0}}});
  s.road_regions.push_back({"bike_lane", {{3.5, 0.0}, {5.0, 0.0}, {5.0, 40.0}, {3.5, 40.0}}});

  auto sampled = [&](auto&& pos) {
    Trajectory traj;
    for (int k = 0; k <= static_cast<int>(s.duration); ++k) {
      const double t = k;
      traj.push_back({t, pos(t)});
    }
    return traj;
  };
  Target crossing;
  crossing.id = "crossing";
  crossing.device_id = "02:00:00:00:00:01";
  crossing.true_height = 1.70;
  crossing.activity_truth = Activity::walking;
  crossing.trajectory = sampled([](double t) {
    return Vec2{pingpong(0.3, 4.7, 0.3, true, 1.1, t), 30.0};
  });
  Target walker;
  walker.id = "walker";
  walker.device_id = "02:00:00:00:00:02";
  walker.true_height = 1.80;
  walker.activity_truth = Activity::walking;
  walker.trajectory = sampled([](double t) { return Vec2{0.8, 4.0 + 1.1 * t}; });
  // Two one-way passes along the bike lane.
  Target biker;
  biker.id = "biker";
  biker.device_id = "02:00:00:00:00:03";
  biker.true_height = 1.75;
  biker.activity_truth = Activity::biking;
  for (int k = 0; k <= 7; ++k) biker.trajectory.push_back({double(k), {4.7, 39.0 - 5.0 * k}});
  Target biker_north;
  biker_north.id = "biker_north";
  biker_north.device_id = "02:00:00:00:00:04";
  biker_north.true_height = 1.72;
  biker_north.activity_truth = Activity::biking;
  for (int k = 0; k <= 7; ++k) {
    biker_north.trajectory.push_back({15.0 + k, {4.2, 4.0 + 5.0 * k}});
  }
  Target bystander;
  bystander.id = "bystander";
  bystander.true_height = 1.65;
  bystander.activity_truth = Activity::stationary;
  bystander.trajectory = sampled([](double) { return Vec2{1.0, 12.0}; });
  s.targets = {crossing, walker, biker, biker_north, bystander};

  cfg.scene = build_scene(std::move(cfg.scene));
  return cfg;
}

ErrorConfig error_config_from_json(const json& j) {
  return guarded("error config", [&] {
    ErrorConfig c;
    c.name = value_or<std::string>(j, "name", "custom");
    const std::string ctx = "error config '" + c.name + "'";
    c.num_tx = value_or(j, "num_tx", 2);
    c.samples_per_fix = value_or(j, "samples_per_fix", 256);
    c.target_median = value_or(j, "target_median_m", 0.0);
    c.target_p95 = value_or(j, "target_p95_m", 0.0);
    if (j.contains("gamma") && !j.at("gamma").is_null()) {
      const json& g = j.at("gamma");
      c.gamma = GammaParams{require(g, "shape", ctx).get<double>(), require(g, "scale", ctx).get<double>()};
    } else if (c.target_median > 0.0 && c.target_p95 > 0.0) {
      c.gamma = calibrate_gamma(c.target_median, c.target_p95);
    }
    validate(c);
    return c;
  });
}

json error_config_to_json(const ErrorConfig& c) {
  json j = {{"name", c.name},
            {"num_tx", c.num_tx},
            {"samples_per_fix", c.samples_per_fix},
            {"target_median_m", c.target_median},
            {"target_p95_m", c.target_p95}};
  j["gamma"] = c.gamma ? json{{"shape", c.gamma->shape}, {"scale", c.gamma->scale}} : json(nullptr);
  return j;
}

ErrorConfig load_error_config(const std::string& name_or_path) {
  for (const auto& n : builtin_error_config_names()) {
    if (n == name_or_path) return builtin_error_config(n);
  }
  return error_config_from_json(load_json(name_or_path));
}

namespace {

json label_to_json(const Label& l) {
  json j = {{"bbox", json::array({l.bbox.x, l.bbox.y, l.bbox.w, l.bbox.h})},
            {"clipped", l.bbox.clipped},
            {"depth", l.depth ? json(*l.depth) : json(nullptr)},
            {"identity", l.identity ? json(*l.identity) : json(nullptr)},
            {"confidence", l.confidence},
            {"provenance", to_string(l.provenance)},
            {"occluded", l.occluded}};
  if (l.hidden) j["hidden"] = true;
  return j;
}

Label label_from_json(const json& j, const std::string& ctx) {
  Label l;
  const json& b = require(j, "bbox", ctx);
  if (!b.is_array() || b.size() != 4) throw ConfigError(ctx + ": bbox must be [x, y, w, h]");
  l.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>(),
            value_or(j, "clipped", false)};
  if (!(l.bbox.w > 0.0) || !(l.bbox.h > 0.0)) throw ConfigError(ctx + ": bbox size must be positive");
  l.depth = optional_double(j, "depth");
  l.identity = optional_string(j, "identity");
  l.confidence = value_or(j, "confidence", 1.0);
  l.provenance = provenance_from_string(value_or<std::string>(j, "provenance", "GroundTruth"));
  l.occluded = value_or(j, "occluded", false);
  l.hidden = value_or(j, "hidden", false);
  return l;
}

}  // namespace

json frames_to_json(std::span<const Frame> frames) {
  json arr = json::array();
  for (const Frame& f : frames) {
    json labels = json::array();
    for (const Label& l : f.labels) labels.push_back(label_to_json(l));
    arr.push_back({{"frame_id", f.frame_id},
                   {"camera_id", f.camera_id},
                   {"timestamp", f.timestamp},
                   {"labels", labels}});
  }
  return {{"frames", arr}};
}

std::vector<Frame> frames_from_json(const json& j) {
  return guarded("annotations", [&] {
    std::vector<Frame> frames;
    for (const auto& fj : require(j, "frames", "annotations")) {
      Frame f;
      f.frame_id = require(fj, "frame_id", "frame").get<std::string>();
      const std::string ctx = "frame '" + f.frame_id + "'";
      f.camera_id = value_or<std::string>(fj, "camera_id", "");
      f.timestamp = value_or(fj, "timestamp", 0.0);
      std::size_t i = 0;
      for (const auto& lj : value_or(fj, "labels", json::array())) {
        f.labels.push_back(label_from_json(lj, ctx + " label " + std::to_string(i++)));
      }
      frames.push_back(std::move(f));
    }
    return frames;
  });
}

json frames_to_coco(std::span<const Frame> frames, int image_width, int image_height) {
  json images = json::array();
  json annotations = json::array();
  std::size_t ann_id = 1;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    const std::size_t image_id = i + 1;
    images.push_back({{"id", image_id},
                      {"file_name", f.frame_id + ".jpg"},
                      {"width", image_width},
                      {"height", image_height},
                      {"frame_id", f.frame_id},
                      {"camera_id", f.camera_id},
                      {"timestamp", f.timestamp}});
    for (const Label& l : f.labels) {
      json ext = label_to_json(l);
      ext.erase("bbox");
      annotations.push_back({{"id", ann_id++},
                             {"image_id", image_id},
                             {"category_id", 1},
                             {"bbox", json::array({l.bbox.x, l.bbox.y, l.bbox.w, l.bbox.h})},
                             {"area", l.bbox.area()},
                             {"iscrowd", 0},
                             {"score", l.confidence},
                             {"rflabel", ext}});
    }
  }
  return {{"images", images},
          {"annotations", annotations},
          {"categories", json::array({{{"id", 1}, {"name", "person"}}})}};
}

std::vector<Frame> frames_from_coco(const json& j) {
  return guarded("COCO document", [&] {
    std::vector<Frame> frames;
    std::map<std::int64_t, std::size_t> index;
    for (const auto& img : require(j, "images", "COCO document")) {
      Frame f;
      const auto id = require(img, "id", "COCO image").get<std::int64_t>();
      if (img.contains("frame_id")) {
        f.frame_id = img.at("frame_id").get<std::string>();
      } else {
        f.frame_id = fs::path(require(img, "file_name", "COCO image").get<std::string>()).stem().string();
      }
      f.camera_id = value_or<std::string>(img, "camera_id", "");
      f.timestamp = value_or(img, "timestamp", 0.0);
      if (!index.emplace(id, frames.size()).second) {
        throw ConfigError("COCO document: duplicate image id " + std::to_string(id));
      }
      frames.push_back(std::move(f));
    }
    for (const auto& a : value_or(j, "annotations", json::array())) {
      const auto image_id = require(a, "image_id", "COCO annotation").get<std::int64_t>();
      auto it = index.find(image_id);
      if (it == index.end()) {
        throw ConfigError("COCO annotation refers to unknown image " + std::to_string(image_id));
      }
      json lj = value_or(a, "rflabel", json::object());
      lj["bbox"] = require(a, "bbox", "COCO annotation");
      if (!lj.contains("confidence") && a.contains("score")) lj["confidence"] = a.at("score");
      frames[it->second].labels.push_back(label_from_json(lj, "COCO annotation"));
    }
    return frames;
  });
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, const std::string& ctx) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(ctx + ": '" + s + "' is not a number");
  }
  return v;
}

template <typename F>
void for_each_row(const std::string& text, const std::string& header, std::size_t columns, F&& f) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row++ == 0) {
      if (line != header) throw ConfigError("CSV header mismatch: expected '" + header + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != columns) {
      throw ConfigError("CSV row " + std::to_string(row) + ": expected " + std::to_string(columns) +
                        " columns");
    }
    f(cells, "CSV row " + std::to_string(row));
  }
  if (row == 0) throw ConfigError("CSV input is empty");
}

constexpr const char* kRangingHeader = "timestamp,tx_id,target_id,true_m,measured_m,rss_dbm,los";
constexpr const char* kFixHeader = "timestamp,target_id,x_m,y_m,residual_m,confidence";

}  // namespace

std::string ranging_to_csv(std::span<const RangingSample> samples) {
  std::string out = std::string(kRangingHeader) + "\n";
  for (const auto& s : samples) {
    out += format_double(s.timestamp) + ',' + s.tx_id + ',' + s.target_id + ',' +
           format_double(s.true_distance) + ',' + format_double(s.measured_distance) + ',' +
           format_double(s.rss) + ',' + (s.los ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<RangingSample> ranging_from_csv(const std::string& text) {
  std::vector<RangingSample> out;
  for_each_row(text, kRangingHeader, 7, [&](const auto& c, const std::string& ctx) {
    RangingSample s;
    s.timestamp = parse_number(c[0], ctx);
    s.tx_id = c[1];
    s.target_id = c[2];
    s.true_distance = parse_number(c[3], ctx);
    s.measured_distance = parse_number(c[4], ctx);
    s.rss = parse_number(c[5], ctx);
    if (c[6] != "0" && c[6] != "1") throw ConfigError(ctx + ": los must be 0 or 1");
    s.los = c[6] == "1";
    out.push_back(std::move(s));
  });
  return out;
}

std::string fixes_to_csv(std::span<const LocalizationFix> fixes) {
  std::string out = std::string(kFixHeader) + "\n";
  for (const auto& f : fixes) {
    out += format_double(f.timestamp) + ',' + f.target_id + ',' + format_double(f.position.x) + ',' +
           format_double(f.position.y) + ',' + format_double(f.residual_rms) + ',' +
           format_double(f.confidence) + '\n';
  }
  return out;
}

std::vector<LocalizationFix> fixes_from_csv(const std::string& text) {
  std::vector<LocalizationFix> out;
  for_each_row(text, kFixHeader, 6, [&](const auto& c, const std::string& ctx) {
    LocalizationFix f;
    f.timestamp = parse_number(c[0], ctx);
    f.target_id = c[1];
    f.position = {parse_number(c[2], ctx), parse_number(c[3], ctx)};
    f.residual_rms = parse_number(c[4], ctx);
    f.confidence = parse_number(c[5], ctx);
    out.push_back(std::move(f));
  });
  return out;
}

json events_to_json(std::span<const OcclusionEvent> events) {
  json arr = json::array();
  for (const auto& e : events) {
    json evidence = json::array();
    if (e.rss_drop) evidence.push_back("rss_drop");
    if (e.range_jump) evidence.push_back("range_jump");
    arr.push_back({{"target_id", e.target_id},
                   {"tx_id", e.tx_id},
                   {"start", e.start},
                   {"end", e.end},
                   {"evidence", evidence}});
  }
  return {{"events", arr}};
}

std::vector<OcclusionEvent> events_from_json(const json& j) {
  return guarded("occlusion events", [&] {
    std::vector<OcclusionEvent> out;
    for (const auto& ej : require(j, "events", "occlusion events")) {
      OcclusionEvent e;
      e.target_id = require(ej, "target_id", "event").get<std::string>();
      e.tx_id = value_or<std::string>(ej, "tx_id", "");
      e.start = require(ej, "start", "event").get<double>();
      e.end = require(ej, "end", "event").get<double>();
      if (!(e.start < e.end)) throw ConfigError("event for '" + e.target_id + "': start must precede end");
      for (const auto& ev : value_or(ej, "evidence", json::array())) {
        const auto name = ev.get<std::string>();
        if (name == "rss_drop") {
          e.rss_drop = true;
        } else if (name == "range_jump") {
          e.range_jump = true;
        } else {
          throw ConfigError("unknown occlusion evidence '" + name + "'");
        }
      }
      out.push_back(std::move(e));
    }
    return out;
  });
}

namespace {

json stats_to_json(const ErrorStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}, {"max", s.max}};
}

}  // namespace

json report_to_json(const QualityReport& r) {
  json per_config = json::object();
  for (const auto& [name, q] : r.per_config) {
    per_config[name] = {{"mean_iou", q.mean_iou},
                        {"label_precision", q.label_precision},
                        {"label_recall", q.label_recall}};
  }
  return {{"mean_iou", r.mean_iou},
          {"iou_histogram", r.iou_histogram},
          {"label_precision", r.label_precision},
          {"label_recall", r.label_recall},
          {"angular_error_stats", stats_to_json(r.angular_error_stats)},
          {"size_error_stats", stats_to_json(r.size_error_stats)},
          {"dropped_label_count", r.dropped_label_count},
          {"rf_labels", r.rf_labels},
          {"gt_labels", r.gt_labels},
          {"matched", r.matched},
          {"per_config", per_config}};
}

json emulation_report_to_json(const EmulationReport& r) {
  return {{"input_labels", r.input_labels},
          {"skipped_clipped", r.skipped_clipped},
          {"dropped_out_of_view", r.dropped_out_of_view},
          {"dropped_by_coverage", r.dropped_by_coverage},
          {"output_labels", r.output_labels},
          {"output_clipped", r.output_clipped},
          {"iou",
           {{"count", r.iou.count},
            {"mean", r.iou.mean},
            {"median", r.iou.median},
            {"p10", r.iou.p10},
            {"p90", r.iou.p90},
            {"histogram", r.iou.histogram}}}};
}

json filter_stats_to_json(const FilterStats& s) {
  return {{"examined", s.examined},
          {"removed_low_confidence", s.removed_low_confidence},
          {"removed_occlusion", s.removed_occlusion},
          {"removed_speed", s.removed_speed},
          {"removed", s.removed()},
          {"kept", s.kept}};
}

EmulationJob emulation_job_from_json(const json& j) {
  return guarded("emulation spec", [&] {
    EmulationJob job;
    const json& ec = require(j, "error_config", "emulation spec");
    job.spec.error_config =
        ec.is_string() ? load_error_config(ec.get<std::string>()) : error_config_from_json(ec);
    job.spec.coverage_p = value_or(j, "coverage_p", 1.0);
    job.spec.mode = noise_mode_from_string(value_or<std::string>(j, "mode", "both"));
    job.spec.height_variation_enabled = value_or(j, "height_variation", true);
    job.spec.seed = value_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("body")) {
      const json& b = j.at("body");
      job.spec.body.mean_height = value_or(b, "mean_height", job.spec.body.mean_height);
      job.spec.body.aspect_ratio = value_or(b, "aspect_ratio", job.spec.body.aspect_ratio);
      job.spec.body.height_variation = value_or(b, "height_variation", job.spec.body.height_variation);
    }
    job.camera = camera_from_json(require(j, "camera", "emulation spec"));
    validate(job.spec);
    return job;
  });
}

}  // namespace rflabel::io
