#pragma once
// End-to-end RF labeling run over a scene: ranging bursts, fixes, ground-truth
// and RF annotations for every camera, occlusion events and the quality report.

#include <cstdint>
#include <vector>

#include "rflabel/io.hpp"
#include "rflabel/labeling.hpp"
#include "rflabel/localization.hpp"
#include "rflabel/quality.hpp"
#include "rflabel/ranging.hpp"

namespace rflabel {

struct SimulationOptions {
  std::uint64_t seed = 0;
  bool noise = true;
  unsigned workers = 1;
  bool keep_beacons = false;  // keep every beacon exchange, not only burst means
  BodyBoxParams body;
  OcclusionParams occlusion;
  OcclusionThresholds thresholds;
};

struct SimulationResult {
  std::vector<RangingSample> beacons;  // filled only with keep_beacons
  std::vector<RangingSample> bursts;   // one row per (tx, device, burst): mean range and RSS
  std::vector<LocalizationFix> fixes;
  std::vector<OcclusionEvent> events;
  std::vector<Frame> ground_truth;  // all cameras, camera order then time
  std::vector<Frame> rf;            // RF labels, hidden = target occluded in the ground truth
  QualityReport report;
  std::size_t failed_fixes = 0;
};

/// Bursts happen at k / burst_rate for every device carrier active at that time,
/// using the first error.num_tx transmitters and error.samples_per_fix beacons
/// each. Every burst draws from a stream keyed by (seed, device, tx, k), so the
/// result does not depend on the worker count. Opt-out policies are applied to
/// every output (ranging rows and fixes by burst time and fix position).
SimulationResult simulate(const io::SceneConfig& config, const ErrorConfig& error,
                          const SimulationOptions& options);

}  // namespace rflabel
