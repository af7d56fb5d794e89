#include <cmath>

#include "doctest.h"
#include "rflabel/io.hpp"
#include "rflabel/pipeline.hpp"

using namespace rflabel;

TEST_CASE("simulation is independent of the worker count") {
  const io::SceneConfig cfg = io::street_template();
  const ErrorConfig s1 = builtin_error_config("S1");
  SimulationOptions one;
  one.seed = 21;
  SimulationOptions many = one;
  many.workers = 6;
  const SimulationResult a = simulate(cfg, s1, one);
  const SimulationResult b = simulate(cfg, s1, many);
  CHECK(a.rf == b.rf);
  CHECK(a.ground_truth == b.ground_truth);
  REQUIRE(a.fixes.size() == b.fixes.size());
  for (std::size_t i = 0; i < a.fixes.size(); ++i) {
    CHECK(a.fixes[i].position == b.fixes[i].position);
    CHECK(a.fixes[i].timestamp == b.fixes[i].timestamp);
  }
  CHECK(a.report.mean_iou == b.report.mean_iou);
  CHECK(a.report.per_config.contains("S1"));
}

TEST_CASE("noiseless simulation fixes sit on the true trajectories") {
  const io::SceneConfig cfg = io::street_template();
  SimulationOptions opt;
  opt.noise = false;
  const SimulationResult r = simulate(cfg, builtin_error_config("S2"), opt);
  CHECK(r.failed_fixes == 0);
  for (const LocalizationFix& f : r.fixes) {
    const Target* t = cfg.scene.target_by_device(f.target_id);
    REQUIRE(t != nullptr);
    CHECK(distance(f.position, position_at(*t, f.timestamp)) < 1e-6);
  }
  CHECK(r.report.mean_iou >= 0.7);
}

TEST_CASE("simulation outputs are internally consistent") {
  const io::SceneConfig cfg = io::street_template();
  SimulationOptions opt;
  opt.seed = 4;
  opt.keep_beacons = true;
  const ErrorConfig s0 = builtin_error_config("S0");
  const SimulationResult r = simulate(cfg, s0, opt);
  CHECK(r.beacons.size() == r.bursts.size() * static_cast<std::size_t>(s0.samples_per_fix));
  for (const RangingSample& s : r.bursts) {
    CHECK(s.measured_distance >= 0.0);
    CHECK((s.tx_id == "tx0" || s.tx_id == "tx1"));
  }
  for (const LocalizationFix& f : r.fixes) {
    CHECK(f.confidence >= 0.0);
    CHECK(f.confidence <= 1.0);
    CHECK(f.residual_rms >= 0.0);
    CHECK(cfg.scene.bounds.contains(f.position));
  }
  for (const OcclusionEvent& e : r.events) CHECK(e.start < e.end);
  for (const Frame& f : r.rf) {
    for (const Label& l : f.labels) {
      CHECK(l.provenance == Provenance::RF);
      CHECK(l.depth.has_value());
    }
  }
  for (const Frame& f : r.ground_truth) {
    for (const Label& l : f.labels) CHECK(l.confidence == 1.0);
  }
  CHECK(r.report.label_precision >= 0.0);
  CHECK(r.report.label_recall <= 1.0);
}

TEST_CASE("more transmitters and beacons give better labels") {
  const io::SceneConfig cfg = io::street_template();
  SimulationOptions opt;
  opt.seed = 8;
  const double s0 = simulate(cfg, builtin_error_config("S0"), opt).report.mean_iou;
  const double s2 = simulate(cfg, builtin_error_config("S2"), opt).report.mean_iou;
  CHECK(s2 > s0);
}
