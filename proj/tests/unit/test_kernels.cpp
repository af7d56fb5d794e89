#include <cmath>
#include <vector>

#include "doctest.h"
#include "rflabel/kernels.hpp"
#include "rflabel/rng.hpp"

using namespace rflabel;

namespace {

struct Boxes {
  std::vector<double> x, y, w, h;
  kernels::BoxColumns columns() const { return {x, y, w, h}; }
};

Boxes random_boxes(std::size_t n, Rng& rng) {
  Boxes b;
  for (std::size_t i = 0; i < n; ++i) {
    b.x.push_back(rng.uniform(0, 100));
    b.y.push_back(rng.uniform(0, 100));
    // Some degenerate (zero-area) boxes exercise the empty-union branch.
    b.w.push_back(i % 17 == 0 ? 0.0 : rng.uniform(1, 40));
    b.h.push_back(i % 17 == 0 ? 0.0 : rng.uniform(1, 40));
  }
  return b;
}

}  // namespace

TEST_CASE("scalar kernels match direct formulas") {
  const auto& s = kernels::scalar_table();
  std::vector<double> v{1.0, -2.0, 3.5, 4.0, -0.5};
  CHECK(s.sum(v) == doctest::Approx(6.0));
  CHECK(s.sum_sq_dev(v, 1.0) == doctest::Approx(0.0 + 9.0 + 6.25 + 9.0 + 2.25));
  s.fold_scale(v, -2.0);
  CHECK(v == std::vector<double>{2.0, 4.0, 7.0, 8.0, 1.0});
  CHECK(s.sum(std::vector<double>{}) == 0.0);

  Boxes b;
  b.x = {0, 5, 20};
  b.y = {0, 0, 20};
  b.w = {10, 10, 5};
  b.h = {10, 10, 5};
  std::vector<double> out(3);
  s.iou_one_to_many(0, 0, 10, 10, b.columns(), out);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(1.0 / 3.0));
  CHECK(out[2] == 0.0);
}

TEST_CASE("active kernel table is one of the variants") {
  const auto& a = kernels::active();
  CHECK((a.name == "scalar" || a.name == "avx2"));
  if (!kernels::cpu_has_avx2()) CHECK(a.name == "scalar");
}

TEST_CASE("avx2 kernels are equivalent to the scalar reference") {
  if (!kernels::cpu_has_avx2()) {
    MESSAGE("CPU lacks AVX2; equivalence check skipped");
    return;
  }
  const auto& s = kernels::scalar_table();
  const auto& v = kernels::avx2_table();
  Rng rng(2718);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 257u, 4099u}) {
    CAPTURE(n);
    std::vector<double> x(n);
    for (double& e : x) e = rng.uniform(-1e3, 1e3);
    const double ss = s.sum(x), vs = v.sum(x);
    CHECK(std::abs(ss - vs) <= 1e-12 * std::max(1.0, std::abs(ss)) * std::max<double>(1.0, n));
    const double sd = s.sum_sq_dev(x, 3.0), vd = v.sum_sq_dev(x, 3.0);
    CHECK(std::abs(sd - vd) <= 1e-12 * std::max(1.0, sd));

    std::vector<double> a = x, b = x;
    s.fold_scale(a, -0.311);
    v.fold_scale(b, -0.311);
    CHECK(a == b);

    const Boxes boxes = random_boxes(n, rng);
    std::vector<double> oa(n), ob(n);
    for (int q = 0; q < 5; ++q) {
      const double qx = rng.uniform(0, 100), qy = rng.uniform(0, 100);
      const double qw = rng.uniform(1, 40), qh = rng.uniform(1, 40);
      s.iou_one_to_many(qx, qy, qw, qh, boxes.columns(), oa);
      v.iou_one_to_many(qx, qy, qw, qh, boxes.columns(), ob);
      CHECK(oa == ob);
    }
  }
}
