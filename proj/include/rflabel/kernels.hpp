#pragma once
// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant. The active variant is chosen once per process from CPUID;
// setting RFLABEL_SIMD=scalar forces the reference path.
//
// Equivalence contract (checked in tests/unit/test_kernels.cpp):
//   iou_one_to_many, fold_scale  bit-identical across variants
//   sum, sum_sq_dev              equal to within 1e-12 relative (reassociation)

#include <cstddef>
#include <span>
#include <string_view>

namespace rflabel::kernels {

/// Structure-of-arrays view over boxes (top-left x, y, width, height).
struct BoxColumns {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> w;
  std::span<const double> h;

  std::size_t size() const { return x.size(); }
};

struct KernelTable {
  std::string_view name;
  double (*sum)(std::span<const double> v);
  double (*sum_sq_dev)(std::span<const double> v, double center);
  void (*fold_scale)(std::span<double> v, double scale);
  void (*iou_one_to_many)(double ax, double ay, double aw, double ah, const BoxColumns& boxes,
                          std::span<double> out);
};

namespace scalar {
double sum(std::span<const double> v);
double sum_sq_dev(std::span<const double> v, double center);
void fold_scale(std::span<double> v, double scale);
void iou_one_to_many(double ax, double ay, double aw, double ah, const BoxColumns& boxes,
                     std::span<double> out);
}  // namespace scalar

namespace avx2 {
double sum(std::span<const double> v);
double sum_sq_dev(std::span<const double> v, double center);
void fold_scale(std::span<double> v, double scale);
void iou_one_to_many(double ax, double ay, double aw, double ah, const BoxColumns& boxes,
                     std::span<double> out);
}  // namespace avx2

bool cpu_has_avx2();

const KernelTable& scalar_table();
/// Only valid when cpu_has_avx2().
const KernelTable& avx2_table();

/// Process-wide selection, resolved on first call.
const KernelTable& active();

inline double sum(std::span<const double> v) { return active().sum(v); }
inline double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : active().sum(v) / static_cast<double>(v.size());
}
inline double sum_sq_dev(std::span<const double> v, double center) {
  return active().sum_sq_dev(v, center);
}
/// v[i] = |scale * v[i]|
inline void fold_scale(std::span<double> v, double scale) { active().fold_scale(v, scale); }
inline void iou_one_to_many(double ax, double ay, double aw, double ah, const BoxColumns& boxes,
                            std::span<double> out) {
  active().iou_one_to_many(ax, ay, aw, ah, boxes, out);
}

}  // namespace rflabel::kernels
