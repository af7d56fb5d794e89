#include "rflabel/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rflabel/error.hpp"

namespace rflabel {

void validate(const BodyBoxParams& p) {
  if (!(p.mean_height > 0.0)) throw ConfigError("body box: mean_height must be positive");
  if (!(p.aspect_ratio > 0.0 && p.aspect_ratio < 1.0)) {
    throw ConfigError("body box: aspect_ratio must be in (0, 1)");
  }
  if (!(p.height_variation >= 0.0 && p.height_variation < 1.0)) {
    throw ConfigError("body box: height_variation must be in [0, 1)");
  }
}

Vec3 world_to_camera(const CameraModel& camera, Vec3 world) {
  return camera.rotation().transposed() * (world - camera.position);
}

Vec3 camera_to_world(const CameraModel& camera, Vec3 cam) {
  return camera.rotation() * cam + camera.position;
}

namespace {

struct PixelAxis {
  Vec2 foot;
  Vec2 head;
  double foot_depth;
};

Vec2 pinhole(const CameraModel& c, Vec3 p) {
  return {c.principal_point.x + c.focal_length * p.x / p.z,
          c.principal_point.y + c.focal_length * p.y / p.z};
}

PixelAxis project_axis(const CameraModel& camera, Vec2 ground, double height) {
  const Mat3 rt = camera.rotation().transposed();
  const Vec3 foot = rt * (Vec3{ground.x, ground.y, 0.0} - camera.position);
  const Vec3 head = rt * (Vec3{ground.x, ground.y, height} - camera.position);
  if (foot.z <= 0.0 || head.z <= 0.0) {
    throw InfeasibleError("target behind camera '" + camera.id + "'");
  }
  return {pinhole(camera, foot), pinhole(camera, head), foot.z};
}

}  // namespace

Vec2 project_point(const CameraModel& camera, Vec3 world) {
  const Vec3 p = world_to_camera(camera, world);
  if (p.z <= 0.0) throw InfeasibleError("point not in front of camera '" + camera.id + "'");
  return pinhole(camera, p);
}

BoundingBox clip_to_image(const CameraModel& camera, BoundingBox box) {
  const double x0 = std::max(0.0, box.x);
  const double y0 = std::max(0.0, box.y);
  const double x1 = std::min(static_cast<double>(camera.image_width), box.x + box.w);
  const double y1 = std::min(static_cast<double>(camera.image_height), box.y + box.h);
  if (x1 <= x0 || y1 <= y0) throw InfeasibleError("box entirely outside image");
  if (x0 == box.x && y0 == box.y && x1 == box.x + box.w && y1 == box.y + box.h) return box;
  return {x0, y0, x1 - x0, y1 - y0, true};
}

BoundingBox synthesize_bbox(const CameraModel& camera, Vec2 ground, double height, double aspect) {
  const PixelAxis axis = project_axis(camera, ground, height);
  const double h = axis.foot.y - axis.head.y;
  if (h <= 0.0) throw InfeasibleError("body does not project upright in camera '" + camera.id + "'");
  const double w = aspect * h;
  const double cx = 0.5 * (axis.foot.x + axis.head.x);
  return clip_to_image(camera, {cx - 0.5 * w, axis.head.y, w, h, false});
}

GroundFix back_project(const CameraModel& camera, const BoundingBox& bbox, double assumed_height) {
  if (bbox.clipped) throw ConfigError("cannot back-project a clipped box");
  if (!(assumed_height > 0.0)) throw ConfigError("assumed height must be positive");
  if (!(bbox.h > 0.0)) throw ConfigError("box height must be positive");

  const double f = camera.focal_length;
  const Vec2 pp = camera.principal_point;
  const double u_obs = bbox.center_x();
  const double h_obs = bbox.h;

  // Level-camera closed form; exact when the camera's y axis is vertical.
  const Mat3 r = camera.rotation();
  const double z0 = f * assumed_height / h_obs;
  const double x0 = (u_obs - pp.x) * z0 / f;
  double y0 = (bbox.bottom() - pp.y) * z0 / f;
  if (std::abs(r(2, 1)) > 1e-9) {
    y0 = -(camera.position.z + r(2, 0) * x0 + r(2, 2) * z0) / r(2, 1);
  }
  Vec2 g = camera_to_world(camera, {x0, y0, z0}).xy();

  auto residual = [&](Vec2 p) -> std::array<double, 2> {
    const PixelAxis a = project_axis(camera, p, assumed_height);
    return {0.5 * (a.foot.x + a.head.x) - u_obs, (a.foot.y - a.head.y) - h_obs};
  };

  std::array<double, 2> res = residual(g);
  for (int iter = 0; iter < 60 && std::hypot(res[0], res[1]) > 1e-10; ++iter) {
    const double step = 1e-6 * std::max(1.0, norm(g));
    const auto rx1 = residual(g + Vec2{step, 0}), rx0 = residual(g - Vec2{step, 0});
    const auto ry1 = residual(g + Vec2{0, step}), ry0 = residual(g - Vec2{0, step});
    const double j00 = (rx1[0] - rx0[0]) / (2 * step), j10 = (rx1[1] - rx0[1]) / (2 * step);
    const double j01 = (ry1[0] - ry0[0]) / (2 * step), j11 = (ry1[1] - ry0[1]) / (2 * step);
    const double det = j00 * j11 - j01 * j10;
    if (std::abs(det) < 1e-300) throw InfeasibleError("back-projection is singular");
    const Vec2 delta{(j11 * res[0] - j01 * res[1]) / det, (-j10 * res[0] + j00 * res[1]) / det};
    double scale = 1.0;
    const double before = std::hypot(res[0], res[1]);
    for (int halving = 0; halving < 30; ++halving, scale *= 0.5) {
      const Vec2 trial = g - delta * scale;
      try {
        const auto r2 = residual(trial);
        if (std::hypot(r2[0], r2[1]) < before) {
          g = trial;
          res = r2;
          break;
        }
      } catch (const InfeasibleError&) {
      }
    }
  }
  const Vec3 foot_cam = world_to_camera(camera, {g.x, g.y, 0.0});
  return {g, foot_cam.z};
}

CameraBody recover_body(const CameraModel& camera, const BoundingBox& bbox, double assumed_height) {
  if (!(assumed_height > 0.0)) throw ConfigError("assumed height must be positive");
  if (!(bbox.h > 0.0)) throw ConfigError("box height must be positive");
  const double f = camera.focal_length;
  const double z = f * assumed_height / bbox.h;
  return {{(bbox.center_x() - camera.principal_point.x) * z / f,
           (bbox.bottom() - camera.principal_point.y) * z / f, z},
          assumed_height};
}

BoundingBox render_body(const CameraModel& camera, const CameraBody& body, double aspect) {
  if (body.foot.z <= 0.0) throw InfeasibleError("body behind camera '" + camera.id + "'");
  const double f = camera.focal_length;
  const double h = f * body.height / body.foot.z;
  const double w = aspect * h;
  const double u = camera.principal_point.x + f * body.foot.x / body.foot.z;
  const double v = camera.principal_point.y + f * body.foot.y / body.foot.z;
  return clip_to_image(camera, {u - 0.5 * w, v - h, w, h, false});
}

}  // namespace rflabel
