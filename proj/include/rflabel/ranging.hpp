#pragma once
// Per-beacon FTM round-trip ranging: folded Student-t range error, log-distance
// RSS, and the NLoS signature (longer range, weaker signal) when an occluder
// blocks the transmitter-to-device path.

#include <span>
#include <string>
#include <vector>

#include "rflabel/rng.hpp"
#include "rflabel/scene.hpp"

namespace rflabel {

struct RangingModel {
  double t_scale = 0.3117691453623979;  // sigma, m (0.54 m signed std at nu = 3)
  double t_dof = 3.0;     // nu
  double nlos_extra_path = 3.0;   // m
  double nlos_rss_penalty = 15.0; // dB
  double pathloss_exponent = 2.0;
  double ref_rss_1m = -40.0;      // dBm
  double device_height = 1.2;     // m above ground where targets carry the device
  bool noise_enabled = true;

  /// Model whose signed (pre-fold) error has standard deviation `stddev`:
  /// sigma = stddev * sqrt((nu - 2) / nu).
  static RangingModel with_stddev(double stddev, double dof);
  /// 0.54 m standard deviation, nu = 3.
  static RangingModel standard();

  double signed_error_stddev() const;
  /// E|sigma * T|, the mean excess of a line-of-sight range; zero without noise.
  double mean_folded_error() const;
};

/// Throws ConfigError on sigma <= 0, nu <= 2 or negative penalties.
void validate(const RangingModel& model);

struct RangingSample {
  std::string tx_id;
  std::string target_id;  // device id
  double timestamp = 0.0;
  double true_distance = 0.0;
  double measured_distance = 0.0;
  double rss = 0.0;
  bool los = true;
};

/// sigma * T with T ~ Student-t(nu); zero when noise is disabled.
double sample_signed_ranging_error(const RangingModel& model, Rng& rng);
/// |sigma * T|.
double sample_ranging_error(const RangingModel& model, Rng& rng);
/// Fills `out` with folded errors (vectorized fold).
void sample_ranging_errors(const RangingModel& model, Rng& rng, std::span<double> out);

/// Log-distance path loss: ref - 10 n log10(d) - (los ? 0 : penalty).
/// Throws ConfigError for d <= 0.
double rss(double distance, bool los, const RangingModel& model);

/// Device position (ground point at device height) for a target at time t.
Vec3 device_position(const Target& target, double t, const RangingModel& model);

/// True when no occluder taller than both endpoints crosses the tx -> device footprint segment.
bool line_of_sight(const Scene& scene, Vec3 tx, Vec3 device);

/// One beacon exchange. Throws ConfigError for RF-invisible targets (no device)
/// or t outside the trajectory.
RangingSample measure_range(const TxNode& tx, const Target& target, double t, const Scene& scene,
                            const RangingModel& model, Rng& rng);

/// `beacons` exchanges sharing one timestamp (one localization instance for one tx).
std::vector<RangingSample> measure_burst(const TxNode& tx, const Target& target, double t,
                                         const Scene& scene, const RangingModel& model, Rng& rng,
                                         int beacons);

}  // namespace rflabel
