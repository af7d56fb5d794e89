#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "rflabel/error.hpp"
#include "rflabel/projection.hpp"
#include "rflabel/rng.hpp"

using namespace rflabel;

namespace {

// Hand-built camera frame for a level camera with the given heading: forward
// (-sin h, cos h, 0), down (0, 0, -1), right = down x forward.
Vec2 level_pinhole_oracle(Vec3 cam_pos, double heading, Vec3 world) {
  const double s = std::sin(heading), c = std::cos(heading);
  const Vec3 d = world - cam_pos;
  const double x = d.x * c + d.y * s;
  const double y = -d.z;
  const double z = -d.x * s + d.y * c;
  return {640.0 + 1000.0 * x / z, 360.0 + 1000.0 * y / z};
}

}  // namespace

TEST_CASE("project_point on the optical axis and one metre off it") {
  CameraModel cam;
  cam.position = {0, 0, 0};
  const Vec2 a = project_point(cam, {0, 0, 10});
  CHECK(a.x == doctest::Approx(640.0));
  CHECK(a.y == doctest::Approx(360.0));
  const Vec2 b = project_point(cam, {1, 0, 10});
  CHECK(b.x == doctest::Approx(740.0));
  CHECK(b.y == doctest::Approx(360.0));
  CHECK_THROWS_AS(project_point(cam, {0, 0, -1}), InfeasibleError);
  CHECK_THROWS_AS(project_point(cam, {1, 0, 0}), InfeasibleError);
}

TEST_CASE("yawed camera matches a hand-composed rotation oracle") {
  const Vec3 pos{1.0, 2.0, 1.5};
  const Vec3 p{1.0, 12.0, 1.5};  // on the axis of the unyawed level camera
  const auto straight = fixtures::level_camera("c", pos, 0.0);
  const Vec2 on_axis = project_point(straight, p);
  CHECK(on_axis.x == doctest::Approx(640.0));
  CHECK(on_axis.y == doctest::Approx(360.0));

  const double heading = 30.0 * std::numbers::pi / 180.0;
  const auto yawed = fixtures::level_camera("c", pos, heading);
  const Vec2 got = project_point(yawed, p);
  const Vec2 want = level_pinhole_oracle(pos, heading, p);
  CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
  CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
  CHECK(std::abs(got.x - 640.0) > 100.0);

  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double h = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const auto cam = fixtures::level_camera("c", pos, h);
    const Vec3 fwd{-std::sin(h), std::cos(h), 0.0};
    const Vec3 q = pos + fwd * rng.uniform(2.0, 30.0) + Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec2 g = project_point(cam, q);
    const Vec2 w = level_pinhole_oracle(pos, h, q);
    CHECK(g.x == doctest::Approx(w.x).epsilon(1e-10));
    CHECK(g.y == doctest::Approx(w.y).epsilon(1e-10));
  }
}

TEST_CASE("general yaw-pitch-roll composition against explicit matrices") {
  CameraModel cam;
  cam.position = {0.5, -0.5, 1.0};
  cam.yaw = 0.4;
  cam.pitch = -0.3;
  cam.roll = 0.2;
  auto rz = [](double a) { return std::array<double, 9>{std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1}; };
  auto ry = [](double a) { return std::array<double, 9>{std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a)}; };
  auto rx = [](double a) { return std::array<double, 9>{1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a)}; };
  auto mul = [](const std::array<double, 9>& a, const std::array<double, 9>& b) {
    std::array<double, 9> r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
    return r;
  };
  const auto r = mul(mul(rz(0.4), ry(-0.3)), rx(0.2));
  const Vec3 world{2.0, 1.0, 9.0};
  const Vec3 d = world - cam.position;
  // camera = R^T d
  const double x = r[0] * d.x + r[3] * d.y + r[6] * d.z;
  const double y = r[1] * d.x + r[4] * d.y + r[7] * d.z;
  const double z = r[2] * d.x + r[5] * d.y + r[8] * d.z;
  REQUIRE(z > 0.0);
  const Vec2 got = project_point(cam, world);
  CHECK(got.x == doctest::Approx(640.0 + 1000.0 * x / z).epsilon(1e-12));
  CHECK(got.y == doctest::Approx(360.0 + 1000.0 * y / z).epsilon(1e-12));
  const Vec3 back = camera_to_world(cam, world_to_camera(cam, world));
  CHECK(distance(back, world) < 1e-12);
}

TEST_CASE("synthesize_bbox hand example") {
  const auto cam = fixtures::level_camera("c", {0.0, 0.0, 1.5});
  const BoundingBox b = synthesize_bbox(cam, {0.0, 10.0}, 1.76, 0.41);
  CHECK_FALSE(b.clipped);
  CHECK(b.bottom() == doctest::Approx(510.0));
  CHECK(b.y == doctest::Approx(334.0));
  CHECK(b.h == doctest::Approx(176.0));
  CHECK(b.w == doctest::Approx(72.16));
  CHECK(b.center_x() == doctest::Approx(640.0));

  const BoundingBox far = synthesize_bbox(cam, {0.0, 20.0}, 1.76, 0.41);
  CHECK(far.h == doctest::Approx(88.0));

  const BoundingBox near = synthesize_bbox(cam, {0.0, 1.0}, 1.76, 0.41);
  CHECK(near.clipped);
  CHECK(near.y + near.h <= 720.0 + 1e-9);

  CHECK_THROWS_AS(synthesize_bbox(cam, {0.0, -5.0}, 1.76, 0.41), InfeasibleError);
  CHECK_THROWS_AS(synthesize_bbox(cam, {200.0, 5.0}, 1.76, 0.41), InfeasibleError);
}

TEST_CASE("back_project inverts the pinhole") {
  const auto cam = fixtures::level_camera("c", {0.0, 0.0, 1.5});
  const GroundFix a = back_project(cam, {603.92, 334.0, 72.16, 176.0, false}, 1.76);
  CHECK(a.depth == doctest::Approx(10.0));
  CHECK(a.ground.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(a.ground.y == doctest::Approx(10.0));
  const GroundFix b = back_project(cam, {621.96, 347.0, 36.08, 88.0, false}, 1.76);
  CHECK(b.depth == doctest::Approx(20.0));
  BoundingBox clipped{0, 0, 10, 10, true};
  CHECK_THROWS_AS(back_project(cam, clipped, 1.76), ConfigError);
}

TEST_CASE("property: synthesize and back_project round-trip over random in-frustum targets") {
  Rng rng(2024);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    const double heading = rng.uniform(-3.0, 3.0);
    const double tilt = rng.uniform(0.0, 0.25);
    const auto cam = fixtures::level_camera("c", {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(1.0, 5.0)}, heading, tilt);
    const double depth = rng.uniform(3.0, 50.0);
    const double lateral = rng.uniform(-0.3, 0.3) * depth;
    const Vec2 fwd{-std::sin(heading), std::cos(heading)};
    const Vec2 right{std::cos(heading), std::sin(heading)};
    const Vec2 g = cam.position.xy() + fwd * depth + right * lateral;
    const double height = rng.uniform(1.0, 2.2);
    BoundingBox box;
    try {
      box = synthesize_bbox(cam, g, height, 0.41);
    } catch (const InfeasibleError&) {
      continue;
    }
    if (box.clipped) continue;
    const GroundFix fix = back_project(cam, box, height);
    REQUIRE(distance(fix.ground, g) < 1e-6);
    const BoundingBox again = synthesize_bbox(cam, fix.ground, height, 0.41);
    CHECK(std::abs(again.x - box.x) < 1e-6);
    CHECK(std::abs(again.y - box.y) < 1e-6);
    CHECK(std::abs(again.w - box.w) < 1e-6);
    CHECK(std::abs(again.h - box.h) < 1e-6);
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("property: pixel height strictly decreases with depth and aspect is exact") {
  const auto cam = fixtures::level_camera("c", {0.0, 0.0, 1.5}, 0.0, 0.05);
  double prev = 1e9;
  for (double y = 3.0; y < 60.0; y += 0.5) {
    const BoundingBox b = synthesize_bbox(cam, {0.3, y}, 1.76, 0.41);
    if (b.clipped) continue;
    CHECK(b.h < prev);
    CHECK(b.w / b.h == doctest::Approx(0.41).epsilon(1e-12));
    prev = b.h;
  }
}

TEST_CASE("recover_body and render_body are inverse") {
  CameraModel cam;
  const BoundingBox box{500.0, 300.0, 40.0, 100.0, false};
  const CameraBody body = recover_body(cam, box, 1.76);
  CHECK(body.foot.z == doctest::Approx(17.6));
  const BoundingBox again = render_body(cam, body, 0.4);
  CHECK(again.x == doctest::Approx(box.x));
  CHECK(again.y == doctest::Approx(box.y));
  CHECK(again.w == doctest::Approx(box.w));
  CHECK(again.h == doctest::Approx(box.h));
}

TEST_CASE("body box parameter validation") {
  BodyBoxParams p;
  CHECK_NOTHROW(validate(p));
  p.aspect_ratio = 1.2;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = {};
  p.mean_height = 0.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("clip_to_image") {
  CameraModel cam;
  const BoundingBox c = clip_to_image(cam, {-10, -10, 50, 50, false});
  CHECK(c.clipped);
  CHECK(c.x == 0.0);
  CHECK(c.w == doctest::Approx(40.0));
  CHECK_THROWS_AS(clip_to_image(cam, {2000, 0, 10, 10, false}), InfeasibleError);
}
