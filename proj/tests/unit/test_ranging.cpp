#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "rflabel/error.hpp"
#include "rflabel/ranging.hpp"

using namespace rflabel;

namespace {

Scene blocked_scene() {
  Scene s = fixtures::minimal_scene();
  s.transmitters = {{"tx0", {5.0, 0.0, 2.0}, 20.0}, {"tx1", {10.0, 0.0, 2.0}, 20.0}};
  s.targets = {fixtures::straight_target("t0", "dev0", {5.0, 10.0}, {5.0, 10.0 + 1e-3}, 0.0, 10.0)};
  s.occluders.push_back({"wall", {{4.0, 4.0}, {6.0, 4.0}, {6.0, 5.0}, {4.0, 5.0}}, 3.0});
  return build_scene(s);
}

// Student-t density written out from its closed form.
double t_pdf(double x, double nu) {
  const double c = std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2)) / std::sqrt(nu * std::numbers::pi);
  return c * std::pow(1.0 + x * x / nu, -(nu + 1) / 2);
}

}  // namespace

TEST_CASE("default model has a 0.54 m signed standard deviation") {
  const RangingModel m;
  CHECK(m.signed_error_stddev() == doctest::Approx(0.54).epsilon(1e-12));
  CHECK(RangingModel::standard().t_scale == doctest::Approx(m.t_scale).epsilon(1e-12));
  CHECK_NOTHROW(validate(m));
}

TEST_CASE("ranging model validation") {
  RangingModel m;
  m.t_dof = 2.0;
  CHECK_THROWS_AS(validate(m), ConfigError);
  m = {};
  m.t_scale = 0.0;
  CHECK_THROWS_AS(validate(m), ConfigError);
  m = {};
  m.nlos_rss_penalty = -1.0;
  CHECK_THROWS_AS(validate(m), ConfigError);
}

TEST_CASE("folded errors are non-negative and vanish as sigma goes to zero") {
  Rng rng(1);
  const RangingModel m;
  std::vector<double> v(200000);
  sample_ranging_errors(m, rng, v);
  for (double x : v) REQUIRE(x >= 0.0);
  const RangingModel tiny = RangingModel::with_stddev(1e-12, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) worst = std::max(worst, sample_ranging_error(tiny, rng));
  CHECK(worst < 1e-9);
  RangingModel off;
  off.noise_enabled = false;
  CHECK(sample_ranging_error(off, rng) == 0.0);
}

TEST_CASE("signed error moments over many draws") {
  Rng rng(77);
  const RangingModel m;
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_signed_ranging_error(m, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  CHECK(std::abs(mean) < 0.005);
  CHECK(sd == doctest::Approx(0.54).epsilon(0.02));
}

TEST_CASE("mean folded error agrees with quadrature of the t density") {
  const RangingModel m;
  // E|sigma T| = 2 sigma int_0^inf x f(x) dx, integrated on x = tan(u).
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) * (std::numbers::pi / 2) / n;
    const double x = std::tan(u);
    acc += x * t_pdf(x, m.t_dof) / (std::cos(u) * std::cos(u));
  }
  acc *= (std::numbers::pi / 2) / n;
  CHECK(m.mean_folded_error() == doctest::Approx(2.0 * m.t_scale * acc).epsilon(1e-6));
  RangingModel off;
  off.noise_enabled = false;
  CHECK(off.mean_folded_error() == 0.0);
}

TEST_CASE("rss log-distance examples") {
  const RangingModel m;
  CHECK(rss(1.0, true, m) == doctest::Approx(-40.0));
  CHECK(rss(10.0, true, m) == doctest::Approx(-60.0));
  CHECK(rss(10.0, false, m) == doctest::Approx(-75.0));
  CHECK_THROWS_AS(rss(0.0, true, m), ConfigError);
  double prev = 0.0;
  for (double d = 0.5; d < 100.0; d *= 1.3) {
    const double r = rss(d, true, m);
    CHECK(r < prev);
    CHECK(rss(d, false, m) < r);
    prev = r;
  }
}

TEST_CASE("noiseless line-of-sight range equals the true distance") {
  const Scene s = build_scene(fixtures::minimal_scene());
  RangingModel m;
  m.noise_enabled = false;
  Rng rng(3);
  const RangingSample r = measure_range(s.transmitters[0], s.targets[0], 2.0, s, m, rng);
  const Vec3 dev{5.0, 12.0, m.device_height};
  CHECK(r.los);
  CHECK(r.true_distance == doctest::Approx(distance(s.transmitters[0].position, dev)));
  CHECK(r.measured_distance == doctest::Approx(r.true_distance));
  CHECK(r.tx_id == "tx0");
  CHECK(r.target_id == "dev0");
}

TEST_CASE("occluder between transmitter and device adds the NLoS signature") {
  const Scene s = blocked_scene();
  RangingModel m;
  m.noise_enabled = false;
  Rng rng(4);
  const RangingSample blocked = measure_range(s.transmitters[0], s.targets[0], 1.0, s, m, rng);
  CHECK_FALSE(blocked.los);
  CHECK(blocked.measured_distance == doctest::Approx(blocked.true_distance + 3.0));
  CHECK(blocked.rss == doctest::Approx(rss(blocked.true_distance, true, m) - 15.0));
  const RangingSample clear = measure_range(s.transmitters[1], s.targets[0], 1.0, s, m, rng);
  CHECK(clear.los);

  m.noise_enabled = true;
  Rng r2(5);
  for (int i = 0; i < 100; ++i) {
    const RangingSample n = measure_range(s.transmitters[0], s.targets[0], 1.0, s, m, r2);
    CHECK(n.measured_distance >= n.true_distance + 3.0);
  }
}

TEST_CASE("short occluders do not block") {
  Scene s = blocked_scene();
  s.occluders[0].height = 1.5;  // below the 2 m transmitter
  CHECK(line_of_sight(s, s.transmitters[0].position, {5.0, 10.0, 1.2}));
}

TEST_CASE("device at the transmitter position") {
  Scene s = fixtures::minimal_scene();
  RangingModel m;
  s.transmitters[0].position = {5.0, 10.0, m.device_height};
  s = build_scene(s);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const RangingSample r = measure_range(s.transmitters[0], s.targets[0], 0.0, s, m, rng);
    CHECK(r.true_distance == 0.0);
    CHECK(r.measured_distance >= 0.0);
    CHECK(r.rss == doctest::Approx(m.ref_rss_1m));
  }
}

TEST_CASE("measure_range errors and determinism") {
  Scene s = fixtures::minimal_scene();
  s.targets.push_back(fixtures::straight_target("ghost", "", {1, 1}, {2, 2}, 0.0, 5.0));
  s = build_scene(s);
  const RangingModel m;
  Rng rng(1);
  CHECK_THROWS_AS(measure_range(s.transmitters[0], s.targets[1], 1.0, s, m, rng), ConfigError);
  CHECK_THROWS_AS(measure_range(s.transmitters[0], s.targets[0], 11.0, s, m, rng), ConfigError);

  Rng a(99), b(99);
  const auto x = measure_burst(s.transmitters[0], s.targets[0], 3.0, s, m, a, 64);
  const auto y = measure_burst(s.transmitters[0], s.targets[0], 3.0, s, m, b, 64);
  REQUIRE(x.size() == 64);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].measured_distance == y[i].measured_distance);
}
