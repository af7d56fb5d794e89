// Compiled with -mavx2 (no FMA, so results of the elementwise kernels match the
// scalar path bit-for-bit). Only reached when cpu_has_avx2() is true.

#include <immintrin.h>

#include <cmath>

#include "rflabel/kernels.hpp"

namespace rflabel::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double sum(std::span<const double> v) {
  const std::size_t n = v.size();
  const double* p = v.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
  double tail = 0.0;
  for (; i < n; ++i) tail += p[i];
  return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

double sum_sq_dev(std::span<const double> v, double center) {
  const std::size_t n = v.size();
  const double* p = v.data();
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(p + i), c);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(p + i + 4), c);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), c);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d, d));
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double d = p[i] - center;
    tail += d * d;
  }
  return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

void fold_scale(std::span<double> v, double scale) {
  const std::size_t n = v.size();
  double* p = v.data();
  const __m256d s = _mm256_set1_pd(scale);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(p + i), s);
    _mm256_storeu_pd(p + i, _mm256_andnot_pd(sign_mask, x));
  }
  for (; i < n; ++i) p[i] = std::fabs(scale * p[i]);
}

void iou_one_to_many(double ax, double ay, double aw, double ah, const BoxColumns& boxes,
                     std::span<double> out) {
  const std::size_t n = boxes.size();
  const __m256d vax = _mm256_set1_pd(ax), vay = _mm256_set1_pd(ay);
  const __m256d vax2 = _mm256_set1_pd(ax + aw), vay2 = _mm256_set1_pd(ay + ah);
  const __m256d varea = _mm256_set1_pd(aw * ah);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  // Operand order of min/max mirrors std::min/std::max tie behaviour in the scalar path.
  for (; i + 4 <= n; i += 4) {
    const __m256d bx = _mm256_loadu_pd(boxes.x.data() + i);
    const __m256d by = _mm256_loadu_pd(boxes.y.data() + i);
    const __m256d bw = _mm256_loadu_pd(boxes.w.data() + i);
    const __m256d bh = _mm256_loadu_pd(boxes.h.data() + i);
    const __m256d bx2 = _mm256_add_pd(bx, bw);
    const __m256d by2 = _mm256_add_pd(by, bh);
    const __m256d iw = _mm256_max_pd(
        _mm256_sub_pd(_mm256_min_pd(bx2, vax2), _mm256_max_pd(bx, vax)), zero);
    const __m256d ih = _mm256_max_pd(
        _mm256_sub_pd(_mm256_min_pd(by2, vay2), _mm256_max_pd(by, vay)), zero);
    const __m256d inter = _mm256_mul_pd(iw, ih);
    const __m256d uni = _mm256_sub_pd(_mm256_add_pd(varea, _mm256_mul_pd(bw, bh)), inter);
    const __m256d ratio = _mm256_div_pd(inter, uni);
    const __m256d positive = _mm256_cmp_pd(uni, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out.data() + i, _mm256_blendv_pd(zero, ratio, positive));
  }
  if (i < n) {
    const BoxColumns rest{boxes.x.subspan(i), boxes.y.subspan(i), boxes.w.subspan(i),
                          boxes.h.subspan(i)};
    scalar::iou_one_to_many(ax, ay, aw, ah, rest, out.subspan(i));
  }
}

}  // namespace rflabel::kernels::avx2
