#pragma once
// Position fixes from ranging bursts (least-squares trilateration on the ground
// plane) and the statistical fast path: a calibrated gamma model of the
// localization error magnitude.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rflabel/geometry.hpp"
#include "rflabel/ranging.hpp"
#include "rflabel/rng.hpp"
#include "rflabel/scene.hpp"

namespace rflabel {

struct GammaParams {
  double shape = 0.0;  // k
  double scale = 0.0;  // theta, m
};

struct ErrorConfig {
  std::string name;
  int num_tx = 2;
  int samples_per_fix = 256;
  std::optional<GammaParams> gamma;  // absent => uncalibrated
  double target_median = 0.0;        // m
  double target_p95 = 0.0;           // m
};

/// Throws ConfigError on num_tx < 2, samples_per_fix < 1 or non-positive gamma parameters.
void validate(const ErrorConfig& config);

/// Hardware configurations S0-S3 with their measured/projected error quantiles,
/// calibrated on construction.
ErrorConfig builtin_error_config(std::string_view name);
std::vector<std::string> builtin_error_config_names();

/// A calibrated configuration with zero localization error (identity emulation).
ErrorConfig zero_error_config();

double gamma_quantile(const GammaParams& params, double probability);

/// Fits (k, theta) so that the gamma median and 95th percentile equal the targets.
/// The q95/q50 ratio is strictly decreasing in k, so k comes from a 1-D root
/// search and theta from the median. Throws InfeasibleError when the ratio is
/// outside the range any gamma can reach (including median >= p95).
GammaParams calibrate_gamma(double target_median, double target_p95);

/// Isotropic displacement with Gamma(k, theta) magnitude.
/// Throws ConfigError for an uncalibrated configuration.
Vec2 sample_localization_error(const ErrorConfig& config, Rng& rng);

struct RangeObservation {
  Vec2 anchor;
  double distance = 0.0;
};

struct TrilaterationResult {
  Vec2 position;
  double residual_rms = 0.0;
};

/// Least-squares minimizer of sum (|p - anchor_i| - d_i)^2.
/// Two ranges: circle intersection, the mirror solution rejected by `prior_region`
/// (when both lie inside, the one nearer the region centroid wins).
/// Three or more: Levenberg-damped Gauss-Newton from the range-weighted centroid
/// and from the linearized solution; the lower-cost result is returned.
/// A least-squares optimum outside a prior region (>= 3 vertices) is replaced by
/// the lowest-cost point on the region boundary; an empty prior means no constraint.
/// Throws InfeasibleError on fewer than 2 ranges, collinear anchors (>2),
/// unresolved ambiguity or solver divergence.
TrilaterationResult trilaterate(std::span<const RangeObservation> ranges,
                                const Polygon& prior_region);

struct LocalizationFix {
  std::string target_id;
  double timestamp = 0.0;
  Vec2 position;
  double residual_rms = 0.0;
  int num_tx_used = 0;
  double confidence = 1.0;
};

/// A range whose mean RSS falls more than rss_margin below the path-loss value
/// at its own measured range is treated as non-line-of-sight.
struct NlosScreen {
  double ref_rss_1m = -40.0;
  double pathloss_exponent = 2.0;
  double rss_margin = 8.0;  // dB
};

struct FixParams {
  double device_height = 1.2;  // slant ranges are reduced to ground distance with this
  double sigma_ref = RangingModel{}.t_scale;  // confidence = exp(-residual / sigma_ref)
  std::optional<NlosScreen> nlos_screen;
  double range_bias = 0.0;  // m, subtracted from each averaged slant range
};

/// Averages each transmitter's beacons, reduces to horizontal range and trilaterates.
/// With a screen, ranges flagged as non-line-of-sight are dropped as long as at
/// least two others remain.
/// Throws InfeasibleError when fewer than two transmitters contributed samples.
LocalizationFix fix_from_burst(std::span<const RangingSample> samples,
                               std::span<const TxNode> transmitters, const Polygon& prior_region,
                               const FixParams& params = {});

}  // namespace rflabel
