#include <algorithm>
#include <cmath>

#include "rflabel/kernels.hpp"

namespace rflabel::kernels::scalar {

double sum(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

double sum_sq_dev(std::span<const double> v, double center) {
  double acc = 0.0;
  for (double x : v) {
    const double d = x - center;
    acc += d * d;
  }
  return acc;
}

void fold_scale(std::span<double> v, double scale) {
  for (double& x : v) x = std::fabs(scale * x);
}

void iou_one_to_many(double ax, double ay, double aw, double ah, const BoxColumns& boxes,
                     std::span<double> out) {
  const double ax2 = ax + aw, ay2 = ay + ah, area_a = aw * ah;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const double bx2 = boxes.x[i] + boxes.w[i];
    const double by2 = boxes.y[i] + boxes.h[i];
    const double iw = std::max(0.0, std::min(ax2, bx2) - std::max(ax, boxes.x[i]));
    const double ih = std::max(0.0, std::min(ay2, by2) - std::max(ay, boxes.y[i]));
    const double inter = iw * ih;
    const double uni = area_a + boxes.w[i] * boxes.h[i] - inter;
    out[i] = uni > 0.0 ? inter / uni : 0.0;
  }
}

}  // namespace rflabel::kernels::scalar
