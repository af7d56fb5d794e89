#include "rflabel/localization.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "rflabel/error.hpp"
#include "rflabel/kernels.hpp"

namespace rflabel {

void validate(const ErrorConfig& c) {
  const std::string who = "error config '" + c.name + "'";
  if (c.num_tx < 2) throw ConfigError(who + ": num_tx must be >= 2");
  if (c.samples_per_fix < 1) throw ConfigError(who + ": samples_per_fix must be >= 1");
  if (c.gamma && (c.gamma->shape < 0.0 || c.gamma->scale < 0.0 ||
                  !std::isfinite(c.gamma->shape) || !std::isfinite(c.gamma->scale))) {
    throw ConfigError(who + ": gamma parameters must be finite and non-negative");
  }
}

namespace {

struct TableRow {
  const char* name;
  int num_tx;
  int samples;
  double median_cm;
  double p95_cm;
};

// 802.11 FTM localization error per hardware configuration (S0 measured, S1-S3 projected).
constexpr std::array<TableRow, 4> kTable{{
    {"S0", 2, 256, 132.0, 462.8},
    {"S1", 4, 2048, 31.8, 93.8},
    {"S2", 6, 2048, 24.6, 63.8},
    {"S3", 6, 5012, 16.2, 42.0},
}};

}  // namespace

ErrorConfig builtin_error_config(std::string_view name) {
  for (const TableRow& row : kTable) {
    if (name != row.name) continue;
    ErrorConfig c;
    c.name = row.name;
    c.num_tx = row.num_tx;
    c.samples_per_fix = row.samples;
    c.target_median = row.median_cm / 100.0;
    c.target_p95 = row.p95_cm / 100.0;
    c.gamma = calibrate_gamma(c.target_median, c.target_p95);
    return c;
  }
  throw ConfigError("unknown built-in error configuration '" + std::string(name) + "'");
}

std::vector<std::string> builtin_error_config_names() {
  std::vector<std::string> names;
  for (const TableRow& row : kTable) names.emplace_back(row.name);
  return names;
}

ErrorConfig zero_error_config() {
  ErrorConfig c;
  c.name = "zero";
  c.gamma = GammaParams{0.0, 0.0};
  return c;
}

double gamma_quantile(const GammaParams& params, double probability) {
  if (params.shape <= 0.0 || params.scale <= 0.0) return 0.0;
  return params.scale * boost::math::gamma_p_inv(params.shape, probability);
}

GammaParams calibrate_gamma(double target_median, double target_p95) {
  if (!(target_median > 0.0) || !(target_p95 > target_median)) {
    throw InfeasibleError("gamma calibration needs 0 < median < p95 (got median " +
                          std::to_string(target_median) + ", p95 " + std::to_string(target_p95) +
                          ")");
  }
  const double wanted = target_p95 / target_median;
  auto ratio = [](double k) {
    return boost::math::gamma_p_inv(k, 0.95) / boost::math::gamma_p_inv(k, 0.5);
  };
  double lo = std::log(0.05), hi = std::log(1e5);
  if (wanted >= ratio(std::exp(lo)) || wanted <= ratio(std::exp(hi))) {
    throw InfeasibleError("p95/median ratio " + std::to_string(wanted) +
                          " is outside the range reachable by a gamma distribution");
  }
  // ratio(k) decreases in k.
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(std::exp(mid)) > wanted) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double k = std::exp(0.5 * (lo + hi));
  return {k, target_median / boost::math::gamma_p_inv(k, 0.5)};
}

Vec2 sample_localization_error(const ErrorConfig& config, Rng& rng) {
  if (!config.gamma) {
    throw ConfigError("error config '" + config.name + "' is not calibrated");
  }
  const GammaParams g = *config.gamma;
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (g.shape <= 0.0 || g.scale <= 0.0) return {0.0, 0.0};
  boost::random::gamma_distribution<double> dist(g.shape, g.scale);
  const double magnitude = dist(rng);
  return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

namespace {

double cost_of(Vec2 p, std::span<const RangeObservation> r) {
  double c = 0.0;
  for (const auto& o : r) {
    const double e = distance(p, o.anchor) - o.distance;
    c += e * e;
  }
  return c;
}

Vec2 weighted_centroid(std::span<const RangeObservation> r) {
  Vec2 acc;
  double wsum = 0.0;
  for (const auto& o : r) {
    const double w = 1.0 / (std::max(o.distance, 0.0) + 0.1);
    acc = acc + o.anchor * w;
    wsum += w;
  }
  return acc * (1.0 / wsum);
}

std::optional<Vec2> linearized_solution(std::span<const RangeObservation> r) {
  // Subtracting the first circle equation from the others gives A p = b.
  double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
  const Vec2 p0 = r[0].anchor;
  const double d0 = r[0].distance;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const Vec2 pi = r[i].anchor;
    const double ax = 2.0 * (pi.x - p0.x), ay = 2.0 * (pi.y - p0.y);
    const double rhs = dot(pi, pi) - dot(p0, p0) - r[i].distance * r[i].distance + d0 * d0;
    a00 += ax * ax;
    a01 += ax * ay;
    a11 += ay * ay;
    b0 += ax * rhs;
    b1 += ay * rhs;
  }
  const double det = a00 * a11 - a01 * a01;
  if (std::abs(det) <= 1e-12 * std::max(1.0, a00 * a11)) return std::nullopt;
  return Vec2{(a11 * b0 - a01 * b1) / det, (a00 * b1 - a01 * b0) / det};
}

Vec2 levenberg_marquardt(Vec2 p, std::span<const RangeObservation> r) {
  double lambda = 1e-3;
  double cost = cost_of(p, r);
  for (int iter = 0; iter < 200 && cost > 1e-30; ++iter) {
    double h00 = 0, h01 = 0, h11 = 0, g0 = 0, g1 = 0;
    for (const auto& o : r) {
      const Vec2 diff = p - o.anchor;
      const double len = norm(diff);
      if (len < 1e-15) continue;
      const Vec2 j = diff * (1.0 / len);
      const double res = len - o.distance;
      h00 += j.x * j.x;
      h01 += j.x * j.y;
      h11 += j.y * j.y;
      g0 += j.x * res;
      g1 += j.y * res;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 40 && !improved; ++attempt) {
      const double m00 = h00 * (1.0 + lambda) + 1e-18, m11 = h11 * (1.0 + lambda) + 1e-18;
      const double det = m00 * m11 - h01 * h01;
      const Vec2 step{-(m11 * g0 - h01 * g1) / det, -(m00 * g1 - h01 * g0) / det};
      const Vec2 trial = p + step;
      const double c = cost_of(trial, r);
      if (std::isfinite(c) && c < cost) {
        const double moved = norm(step);
        p = trial;
        cost = c;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (moved < 1e-14 * std::max(1.0, norm(p))) return p;
      } else {
        lambda *= 4.0;
      }
    }
    if (!improved) break;
  }
  return p;
}

double residual_rms(Vec2 p, std::span<const RangeObservation> r) {
  return std::sqrt(cost_of(p, r) / static_cast<double>(r.size()));
}

// Minimum of the range cost over the boundary of the prior region: dense sampling
// of every edge followed by golden-section refinement around the best sample.
Vec2 boundary_minimum(std::span<const RangeObservation> r, const Polygon& prior) {
  constexpr int kSamples = 64;
  Vec2 best = prior.front();
  double best_cost = cost_of(best, r);
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const Vec2 a = prior[i], b = prior[(i + 1) % prior.size()];
    auto at = [&](double u) { return a + (b - a) * u; };
    int k_best = 0;
    double c_best = cost_of(a, r);
    for (int k = 1; k <= kSamples; ++k) {
      const double c = cost_of(at(static_cast<double>(k) / kSamples), r);
      if (c < c_best) {
        c_best = c;
        k_best = k;
      }
    }
    double lo = std::max(0.0, (k_best - 1.0) / kSamples), hi = std::min(1.0, (k_best + 1.0) / kSamples);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double u1 = hi - g * (hi - lo), u2 = lo + g * (hi - lo);
    double c1 = cost_of(at(u1), r), c2 = cost_of(at(u2), r);
    for (int it = 0; it < 80; ++it) {
      if (c1 <= c2) {
        hi = u2;
        u2 = u1;
        c2 = c1;
        u1 = hi - g * (hi - lo);
        c1 = cost_of(at(u1), r);
      } else {
        lo = u1;
        u1 = u2;
        c1 = c2;
        u2 = lo + g * (hi - lo);
        c2 = cost_of(at(u2), r);
      }
    }
    for (const auto& [u, c] : {std::pair{u1, c1}, std::pair{static_cast<double>(k_best) / kSamples, c_best}}) {
      if (c < best_cost) {
        best_cost = c;
        best = at(u);
      }
    }
  }
  return best;
}

// Keeps a solution inside the prior region; an outside optimum is replaced by the
// best point on the region boundary.
TrilaterationResult within_prior(Vec2 p, std::span<const RangeObservation> r, const Polygon& prior) {
  if (prior.size() >= 3 && !point_in_polygon(p, prior)) p = boundary_minimum(r, prior);
  return {p, residual_rms(p, r)};
}

TrilaterationResult two_range(std::span<const RangeObservation> r, const Polygon& prior) {
  const Vec2 p1 = r[0].anchor, p2 = r[1].anchor;
  const double r1 = std::max(r[0].distance, 0.0), r2 = std::max(r[1].distance, 0.0);
  const double d = distance(p1, p2);
  if (d <= 1e-12) throw InfeasibleError("trilateration: transmitters are co-located");
  const Vec2 e = (p2 - p1) * (1.0 / d);
  const Vec2 perp{-e.y, e.x};

  // Along-baseline coordinate of the least-squares point when the circles miss each other.
  std::optional<double> tangent;
  if (d > r1 + r2) {
    tangent = 0.5 * (r1 + d - r2);
  } else if (r1 > r2 + d) {
    tangent = 0.5 * (r1 + d + r2);
  } else if (r2 > r1 + d) {
    tangent = 0.5 * (d - r1 - r2);
  }
  if (tangent) return within_prior(p1 + e * *tangent, r, prior);

  const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, r1 * r1 - a * a));
  const Vec2 base = p1 + e * a;
  const Vec2 plus = base + perp * h, minus = base - perp * h;
  if (h == 0.0) return {base, residual_rms(base, r)};

  if (prior.size() < 3) throw InfeasibleError("trilateration: two-range ambiguity needs a prior region");
  const bool in_plus = point_in_polygon(plus, prior);
  const bool in_minus = point_in_polygon(minus, prior);
  Vec2 chosen;
  if (in_plus && !in_minus) {
    chosen = plus;
  } else if (in_minus && !in_plus) {
    chosen = minus;
  } else if (in_plus && in_minus) {
    const Vec2 c = polygon_centroid(prior);
    chosen = distance(plus, c) <= distance(minus, c) ? plus : minus;
  } else {
    throw InfeasibleError("trilateration: both two-range solutions fall outside the prior region");
  }
  return {chosen, residual_rms(chosen, r)};
}

bool all_collinear(std::span<const RangeObservation> r) {
  double scale = 0.0;
  for (const auto& o : r) scale = std::max(scale, distance(o.anchor, r[0].anchor));
  if (scale <= 1e-12) return true;
  for (std::size_t i = 1; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      const double c = cross(r[i].anchor - r[0].anchor, r[j].anchor - r[0].anchor);
      if (std::abs(c) > 1e-9 * scale * scale) return false;
    }
  }
  return true;
}

}  // namespace

TrilaterationResult trilaterate(std::span<const RangeObservation> ranges,
                                const Polygon& prior_region) {
  if (ranges.size() < 2) throw InfeasibleError("trilateration needs at least two ranges");
  if (ranges.size() == 2) return two_range(ranges, prior_region);
  if (all_collinear(ranges)) throw InfeasibleError("trilateration: transmitters are collinear");

  std::vector<Vec2> starts{weighted_centroid(ranges)};
  if (auto lin = linearized_solution(ranges)) starts.push_back(*lin);

  std::optional<Vec2> best;
  double best_cost = 0.0;
  for (Vec2 s : starts) {
    const Vec2 p = levenberg_marquardt(s, ranges);
    const double c = cost_of(p, ranges);
    if (!std::isfinite(c) || !std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    if (!best || c < best_cost) {
      best = p;
      best_cost = c;
    }
  }
  if (!best) throw InfeasibleError("trilateration solver diverged");
  return within_prior(*best, ranges, prior_region);
}

LocalizationFix fix_from_burst(std::span<const RangingSample> samples,
                               std::span<const TxNode> transmitters, const Polygon& prior_region,
                               const FixParams& params) {
  std::map<std::string, std::vector<double>> by_tx;
  for (const auto& s : samples) by_tx[s.tx_id].push_back(s.measured_distance);

  std::map<std::string, std::vector<double>> rss_by_tx;
  for (const auto& s : samples) rss_by_tx[s.tx_id].push_back(s.rss);

  std::vector<RangeObservation> ranges, screened;
  for (const TxNode& tx : transmitters) {
    auto it = by_tx.find(tx.id);
    if (it == by_tx.end() || it->second.empty()) continue;
    const double slant = std::max(0.0, kernels::mean(it->second) - params.range_bias);
    const double dz = tx.position.z - params.device_height;
    const RangeObservation obs{tx.position.xy(), std::sqrt(std::max(0.0, slant * slant - dz * dz))};
    ranges.push_back(obs);
    if (params.nlos_screen) {
      const NlosScreen& sc = *params.nlos_screen;
      const double expected =
          sc.ref_rss_1m - 10.0 * sc.pathloss_exponent * std::log10(std::max(slant, 1.0));
      if (expected - kernels::mean(rss_by_tx[tx.id]) > sc.rss_margin) continue;
    }
    screened.push_back(obs);
  }
  if (screened.size() >= 2 && screened.size() < ranges.size()) ranges = std::move(screened);
  if (ranges.size() < 2) {
    throw InfeasibleError("fix needs samples from at least two transmitters (got " +
                          std::to_string(ranges.size()) + ")");
  }
  const TrilaterationResult tri = trilaterate(ranges, prior_region);
  LocalizationFix fix;
  fix.target_id = samples.front().target_id;
  fix.timestamp = samples.front().timestamp;
  fix.position = tri.position;
  fix.residual_rms = tri.residual_rms;
  fix.num_tx_used = static_cast<int>(ranges.size());
  fix.confidence = params.sigma_ref > 0.0 ? std::exp(-tri.residual_rms / params.sigma_ref) : 1.0;
  return fix;
}

}  // namespace rflabel
