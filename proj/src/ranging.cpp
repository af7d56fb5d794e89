#include "rflabel/ranging.hpp"

#include <algorithm>
#include <boost/random/student_t_distribution.hpp>
#include <cmath>
#include <numbers>

#include "rflabel/error.hpp"
#include "rflabel/kernels.hpp"

namespace rflabel {

RangingModel RangingModel::with_stddev(double stddev, double dof) {
  RangingModel m;
  m.t_dof = dof;
  m.t_scale = stddev * std::sqrt((dof - 2.0) / dof);
  return m;
}

RangingModel RangingModel::standard() { return with_stddev(0.54, 3.0); }

double RangingModel::signed_error_stddev() const {
  return t_scale * std::sqrt(t_dof / (t_dof - 2.0));
}

double RangingModel::mean_folded_error() const {
  if (!noise_enabled) return 0.0;
  const double nu = t_dof;
  return t_scale * 2.0 * std::sqrt(nu) *
         std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) /
         (std::sqrt(std::numbers::pi) * (nu - 1.0));
}

void validate(const RangingModel& m) {
  if (!(m.t_scale > 0.0)) throw ConfigError("ranging: t_scale must be positive");
  if (!(m.t_dof > 2.0)) throw ConfigError("ranging: t_dof must exceed 2 for a finite variance");
  if (m.nlos_extra_path < 0.0 || m.nlos_rss_penalty < 0.0) {
    throw ConfigError("ranging: NLoS penalties must be non-negative");
  }
  if (!(m.pathloss_exponent > 0.0)) throw ConfigError("ranging: pathloss_exponent must be positive");
  if (m.device_height < 0.0) throw ConfigError("ranging: device_height must be non-negative");
}

double sample_signed_ranging_error(const RangingModel& model, Rng& rng) {
  if (!model.noise_enabled) return 0.0;
  boost::random::student_t_distribution<double> t(model.t_dof);
  return model.t_scale * t(rng);
}

double sample_ranging_error(const RangingModel& model, Rng& rng) {
  return std::fabs(sample_signed_ranging_error(model, rng));
}

void sample_ranging_errors(const RangingModel& model, Rng& rng, std::span<double> out) {
  if (!model.noise_enabled) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  boost::random::student_t_distribution<double> t(model.t_dof);
  for (double& x : out) x = t(rng);
  kernels::fold_scale(out, model.t_scale);
}

double rss(double distance, bool los, const RangingModel& model) {
  if (!(distance > 0.0)) throw ConfigError("rss: distance must be positive");
  return model.ref_rss_1m - 10.0 * model.pathloss_exponent * std::log10(distance) -
         (los ? 0.0 : model.nlos_rss_penalty);
}

Vec3 device_position(const Target& target, double t, const RangingModel& model) {
  const Vec2 g = position_at(target, t);
  return {g.x, g.y, model.device_height};
}

bool line_of_sight(const Scene& scene, Vec3 tx, Vec3 device) {
  for (const Occluder& o : scene.occluders) {
    if (o.height <= std::max(tx.z, device.z)) continue;
    if (segment_intersects_polygon(tx.xy(), device.xy(), o.footprint)) return false;
  }
  return true;
}

namespace {

void require_device(const Target& target) {
  if (!target.rf_visible()) {
    throw ConfigError("target '" + target.id + "' carries no RF device (not localizable)");
  }
}

// Inside the 1 m reference distance the path-loss model is pinned to its reference value.
double rss_near_field(double distance, bool los, const RangingModel& model) {
  return rss(std::max(distance, 1.0), los, model);
}

}  // namespace

RangingSample measure_range(const TxNode& tx, const Target& target, double t, const Scene& scene,
                            const RangingModel& model, Rng& rng) {
  require_device(target);
  const Vec3 dev = device_position(target, t, model);
  const bool los = line_of_sight(scene, tx.position, dev);
  const double truth = distance(tx.position, dev);
  const double measured =
      truth + sample_ranging_error(model, rng) + (los ? 0.0 : model.nlos_extra_path);
  return {tx.id, *target.device_id, t, truth, measured, rss_near_field(truth, los, model), los};
}

std::vector<RangingSample> measure_burst(const TxNode& tx, const Target& target, double t,
                                         const Scene& scene, const RangingModel& model, Rng& rng,
                                         int beacons) {
  require_device(target);
  const Vec3 dev = device_position(target, t, model);
  const bool los = line_of_sight(scene, tx.position, dev);
  const double truth = distance(tx.position, dev);
  const double signal = rss_near_field(truth, los, model);
  const double extra = los ? 0.0 : model.nlos_extra_path;

  std::vector<double> err(static_cast<std::size_t>(std::max(beacons, 0)));
  sample_ranging_errors(model, rng, err);
  std::vector<RangingSample> out;
  out.reserve(err.size());
  for (double e : err) out.push_back({tx.id, *target.device_id, t, truth, truth + e + extra, signal, los});
  return out;
}

}  // namespace rflabel
