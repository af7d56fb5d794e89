#pragma once
// Pinhole geometry: world -> image projection, body-box synthesis and the
// inverse used to recover depth from a labeled box.
//
// The body of a target standing at ground point g is the vertical segment
// (g, 0) -> (g, height). Its box spans the projected foot and head points,
// is centered on the projected body axis and is `aspect * pixel_height` wide.

#include "rflabel/geometry.hpp"
#include "rflabel/scene.hpp"

namespace rflabel {

struct BoundingBox {
  double x = 0.0;  // top-left, px
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  bool clipped = false;

  double center_x() const { return x + 0.5 * w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  bool operator==(const BoundingBox&) const = default;
};

struct BodyBoxParams {
  double mean_height = 1.76;
  double aspect_ratio = 0.41;  // width / height
  double height_variation = 0.10;
};

/// Validates BodyBoxParams invariants; throws ConfigError.
void validate(const BodyBoxParams& params);

/// World point expressed in the camera frame (x right, y down, z forward).
Vec3 world_to_camera(const CameraModel& camera, Vec3 world);
Vec3 camera_to_world(const CameraModel& camera, Vec3 cam);

/// Throws InfeasibleError when the point is not in front of the camera.
Vec2 project_point(const CameraModel& camera, Vec3 world);

/// Throws InfeasibleError when the body is behind the camera or the box lies
/// entirely outside the image. Boxes truncated at the border come back with
/// clipped = true and the visible extent.
BoundingBox synthesize_bbox(const CameraModel& camera, Vec2 ground, double height, double aspect);

struct GroundFix {
  Vec2 ground;
  double depth = 0.0;  // optical-axis depth of the foot point, m
};

/// Inverse of synthesize_bbox for an unclipped box: the ground point whose body
/// of `assumed_height` projects to the box's center column and pixel height.
/// For a level camera this is the closed form Z = f * H / h; otherwise it is
/// refined by Newton iteration. Throws ConfigError for clipped boxes.
GroundFix back_project(const CameraModel& camera, const BoundingBox& bbox, double assumed_height);

/// Camera-frame body model used by dataset emulation, where camera extrinsics are
/// unknown: the foot point in camera coordinates with the body extending along -y.
struct CameraBody {
  Vec3 foot;  // camera frame
  double height = 0.0;
};

/// Pure pinhole inverse on the box alone: Z = f H / h, X and Y from the bottom-center pixel.
CameraBody recover_body(const CameraModel& camera, const BoundingBox& bbox, double assumed_height);

/// Exact inverse of recover_body (up to clipping). Throws InfeasibleError when the
/// foot is not in front of the camera or the box misses the image.
BoundingBox render_body(const CameraModel& camera, const CameraBody& body, double aspect);

/// Intersects a box with the image rectangle; throws InfeasibleError if empty.
BoundingBox clip_to_image(const CameraModel& camera, BoundingBox box);

}  // namespace rflabel
