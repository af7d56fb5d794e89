#include "rflabel/geometry.hpp"

#include <algorithm>

namespace rflabel {

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j) + (*this)(i, 2) * o(2, j);
    }
  }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
  }
  return r;
}

Mat3 rotation_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Mat3{{1, 0, 0, 0, c, -s, 0, s, c}};
}

Mat3 rotation_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
}

Mat3 rotation_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Mat3{{c, -s, 0, s, c, 0, 0, 0, 1}};
}

double signed_area(std::span<const Vec2> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) acc += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * acc;
}

namespace {

constexpr double kEps = 1e-12;

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a, ap = p - a;
  const double scale = std::max(1.0, dot(ab, ab));
  if (std::abs(cross(ab, ap)) > kEps * scale) return false;
  const double t = dot(ap, ab);
  return t >= -kEps && t <= dot(ab, ab) + kEps;
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (std::abs(v) <= kEps) return 0;
  return v > 0 ? 1 : -1;
}

bool segments_touch(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  return on_segment(q1, p1, p2) || on_segment(q2, p1, p2) || on_segment(p1, q1, q2) ||
         on_segment(p2, q1, q2);
}

}  // namespace

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if (on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool is_simple_polygon(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  if (std::abs(signed_area(poly)) <= kEps) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a1 = poly[i], a2 = poly[(i + 1) % n];
    if (a1 == a2) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_touch(a1, a2, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<std::pair<double, double>> segment_inside_intervals(Vec2 a, Vec2 b,
                                                                std::span<const Vec2> poly) {
  std::vector<double> cuts{0.0, 1.0};
  const Vec2 d = b - a;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i], e = poly[(i + 1) % n] - poly[i];
    const double denom = cross(d, e);
    if (std::abs(denom) <= kEps) continue;
    const Vec2 ap = p - a;
    const double t = cross(ap, e) / denom;
    const double u = cross(ap, d) / denom;
    if (t > 0.0 && t < 1.0 && u >= -kEps && u <= 1.0 + kEps) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) <= 1e-12; }),
             cuts.end());

  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (!point_in_polygon(a + d * mid, poly)) continue;
    if (!out.empty() && std::abs(out.back().second - cuts[i]) <= 1e-12) {
      out.back().second = cuts[i + 1];
    } else {
      out.emplace_back(cuts[i], cuts[i + 1]);
    }
  }
  return out;
}

bool segment_intersects_polygon(Vec2 a, Vec2 b, std::span<const Vec2> poly) {
  if (point_in_polygon(a, poly) || point_in_polygon(b, poly)) return true;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (segments_touch(a, b, poly[i], poly[(i + 1) % n])) return true;
  }
  return false;
}

Vec2 polygon_centroid(std::span<const Vec2> poly) {
  const double area = signed_area(poly);
  if (std::abs(area) <= kEps) {
    Vec2 c;
    for (Vec2 p : poly) c = c + p;
    return poly.empty() ? c : c * (1.0 / static_cast<double>(poly.size()));
  }
  double cx = 0.0, cy = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % n];
    const double w = cross(p, q);
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / (6.0 * area), cy / (6.0 * area)};
}

}  // namespace rflabel
