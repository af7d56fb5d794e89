#pragma once

#include <string>
#include <vector>

#include "rflabel/labeling.hpp"
#include "rflabel/scene.hpp"

namespace fixtures {

// Level camera at `pos` looking along (-sin(heading), cos(heading)).
inline rflabel::CameraModel level_camera(const std::string& id, rflabel::Vec3 pos,
                                         double heading = 0.0, double tilt = 0.0) {
  rflabel::CameraModel c;
  c.id = id;
  c.position = pos;
  const auto a = rflabel::CameraModel::level_orientation(heading, tilt);
  c.yaw = a.yaw;
  c.pitch = a.pitch;
  c.roll = a.roll;
  return c;
}

inline rflabel::Target straight_target(const std::string& id, const std::string& device,
                                       rflabel::Vec2 from, rflabel::Vec2 to, double t0,
                                       double t1, double height = 1.76) {
  rflabel::Target t;
  t.id = id;
  if (!device.empty()) t.device_id = device;
  t.true_height = height;
  t.trajectory = {{t0, from}, {t1, to}};
  return t;
}

// 10 x 40 m scene, one camera at the south edge looking north, two transmitters.
inline rflabel::Scene minimal_scene() {
  rflabel::Scene s;
  s.bounds = {{0.0, 0.0}, {10.0, 40.0}};
  s.duration = 10.0;
  s.cameras.push_back(level_camera("cam0", {5.0, 0.0, 1.5}));
  s.transmitters = {{"tx0", {0.0, 0.0, 2.0}, 20.0}, {"tx1", {10.0, 0.0, 2.0}, 20.0}};
  s.targets.push_back(straight_target("t0", "dev0", {5.0, 10.0}, {5.0, 20.0}, 0.0, 10.0));
  return s;
}

inline rflabel::Label box_label(double x, double y, double w, double h,
                                rflabel::Provenance p = rflabel::Provenance::GroundTruth) {
  rflabel::Label l;
  l.bbox = {x, y, w, h, false};
  l.provenance = p;
  if (p == rflabel::Provenance::RF) l.depth = 10.0;
  return l;
}

}  // namespace fixtures
