#include "rflabel/emulation.hpp"

#include <algorithm>
#include <cmath>

#include "rflabel/error.hpp"
#include "rflabel/parallel.hpp"
#include "rflabel/quality.hpp"

namespace rflabel {

std::string_view to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::angular_only: return "angular_only";
    case NoiseMode::depth_only: return "depth_only";
    case NoiseMode::both: return "both";
  }
  return "unknown";
}

NoiseMode noise_mode_from_string(std::string_view s) {
  if (s == "angular" || s == "angular_only") return NoiseMode::angular_only;
  if (s == "depth" || s == "depth_only") return NoiseMode::depth_only;
  if (s == "both") return NoiseMode::both;
  throw ConfigError("unknown noise mode '" + std::string(s) + "'");
}

void validate(const EmulationSpec& spec) {
  if (!(spec.coverage_p >= 0.0 && spec.coverage_p <= 1.0)) {
    throw ConfigError("coverage_p must be within [0, 1]");
  }
  validate(spec.error_config);
  if (!spec.error_config.gamma) {
    throw ConfigError("error config '" + spec.error_config.name + "' is not calibrated");
  }
  validate(spec.body);
}

std::vector<Frame> apply_coverage(std::vector<Frame> frames, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("coverage p must be within [0, 1]");
  for (Frame& f : frames) {
    std::uint64_t index = 0;
    std::erase_if(f.labels, [&](const Label&) {
      Rng rng(derive_seed(seed, {std::string_view("coverage"), std::string_view(f.frame_id), index++}));
      return !(rng.uniform() < p);
    });
  }
  return frames;
}

double sample_assumed_height(const BodyBoxParams& params, bool variation_enabled, Rng& rng) {
  if (!variation_enabled || params.height_variation == 0.0) return params.mean_height;
  return rng.uniform(params.mean_height * (1.0 - params.height_variation),
                     params.mean_height * (1.0 + params.height_variation));
}

std::optional<Vec2> displace(Vec2 at, Vec2 d, NoiseMode mode) {
  const double len = norm(at);
  if (len <= 0.0 || at.y <= 0.0) return std::nullopt;
  const Vec2 ray = at * (1.0 / len);
  const Vec2 along = ray * dot(d, ray);
  Vec2 out;
  switch (mode) {
    case NoiseMode::both: out = at + d; break;
    case NoiseMode::depth_only: out = at + along; break;
    case NoiseMode::angular_only: {
      const Vec2 moved = at + (d - along);
      if (moved.y <= 0.0) return std::nullopt;
      out = {moved.x * (at.y / moved.y), at.y};
      break;
    }
  }
  if (out.y <= 0.0) return std::nullopt;
  return out;
}

IouSummary summarize_iou(std::vector<double> v) {
  IouSummary s;
  s.histogram.assign(10, 0);
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) {
    acc += x;
    const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(std::floor(x * 10.0)));
    ++s.histogram[bin];
  }
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(v.size() - 1, lo + 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.mean = acc / static_cast<double>(v.size());
  s.median = quantile(0.5);
  s.p10 = quantile(0.1);
  s.p90 = quantile(0.9);
  return s;
}

namespace {

enum class Outcome { emulated, skipped_clipped, out_of_view };

struct LabelResult {
  Outcome outcome = Outcome::emulated;
  Label label;
  double iou = 0.0;
};

LabelResult emulate_one(const Label& in, const CameraModel& camera, const EmulationSpec& spec,
                        Rng rng) {
  LabelResult r;
  if (in.bbox.clipped) {
    r.outcome = Outcome::skipped_clipped;
    return r;
  }
  const double height = sample_assumed_height(spec.body, spec.height_variation_enabled, rng);
  CameraBody body = recover_body(camera, in.bbox, height);
  const Vec2 error = sample_localization_error(spec.error_config, rng);
  const auto moved = displace({body.foot.x, body.foot.z}, error, spec.mode);
  if (!moved) {
    r.outcome = Outcome::out_of_view;
    return r;
  }
  body.foot.x = moved->x;
  body.foot.z = moved->y;
  try {
    r.label = in;
    r.label.bbox = render_body(camera, body, in.bbox.w / in.bbox.h);
  } catch (const InfeasibleError&) {
    r.outcome = Outcome::out_of_view;
    return r;
  }
  r.label.depth = body.foot.z;
  r.label.provenance = Provenance::RF;
  r.iou = iou(in.bbox, r.label.bbox);
  return r;
}

}  // namespace

EmulationResult emulate_noisy_labels(std::span<const Frame> annotations, const CameraModel& camera,
                                     const EmulationSpec& spec, unsigned workers) {
  validate(spec);
  struct Slot {
    std::size_t frame;
    std::size_t label;
  };
  std::vector<Slot> slots;
  for (std::size_t f = 0; f < annotations.size(); ++f) {
    for (std::size_t l = 0; l < annotations[f].labels.size(); ++l) slots.push_back({f, l});
  }

  std::vector<LabelResult> results(slots.size());
  parallel_for(slots.size(), workers, [&](std::size_t i) {
    const Frame& f = annotations[slots[i].frame];
    Rng rng(derive_seed(spec.seed, {std::string_view("emulate"), std::string_view(f.frame_id),
                                    static_cast<std::uint64_t>(slots[i].label)}));
    results[i] = emulate_one(f.labels[slots[i].label], camera, spec, rng);
  });

  EmulationResult out;
  EmulationReport& rep = out.report;
  rep.input_labels = slots.size();
  out.frames.reserve(annotations.size());
  for (const Frame& f : annotations) out.frames.push_back({f.frame_id, f.camera_id, f.timestamp, {}});
  std::vector<double> ious;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    switch (results[i].outcome) {
      case Outcome::skipped_clipped: ++rep.skipped_clipped; break;
      case Outcome::out_of_view: ++rep.dropped_out_of_view; break;
      case Outcome::emulated:
        ious.push_back(results[i].iou);
        out.frames[slots[i].frame].labels.push_back(std::move(results[i].label));
        break;
    }
  }
  rep.iou = summarize_iou(std::move(ious));

  const std::size_t before = rep.input_labels - rep.skipped_clipped - rep.dropped_out_of_view;
  out.frames = apply_coverage(std::move(out.frames), spec.coverage_p, spec.seed);
  for (const Frame& f : out.frames) {
    rep.output_labels += f.labels.size();
    for (const Label& l : f.labels) rep.output_clipped += l.bbox.clipped ? 1 : 0;
  }
  rep.dropped_by_coverage = before - rep.output_labels;
  return out;
}

InjectionResult inject_extraneous(std::vector<Frame> frames, const Scene& scene,
                                  const CameraModel& camera, std::uint64_t seed, double rate,
                                  const BodyBoxParams& body, const OcclusionParams& occlusion) {
  if (scene.occluders.empty()) throw ConfigError("extraneous-label injection needs occluders");
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("injection rate must be within [0, 1]");
  InjectionResult out;
  for (Frame& f : frames) {
    if (f.camera_id != camera.id) continue;
    for (const Target& target : scene.targets) {
      if (!target.device_id || !target.active_at(f.timestamp)) continue;
      const bool labeled = std::any_of(f.labels.begin(), f.labels.end(), [&](const Label& l) {
        return l.identity && *l.identity == *target.device_id;
      });
      if (labeled) continue;
      const Vec2 g = position_at(target, f.timestamp);
      if (!in_occluder_shadow(scene, camera, g, target.true_height)) continue;
      if (body_occlusion_fraction(scene, camera, g, target.true_height, body.aspect_ratio,
                                  occlusion) <= occlusion.threshold) {
        continue;
      }
      Label label;
      try {
        label.bbox = synthesize_bbox(camera, g, body.mean_height, body.aspect_ratio);
      } catch (const InfeasibleError&) {
        continue;
      }
      if (label.bbox.clipped) continue;
      Rng rng(derive_seed(seed, {std::string_view("inject"), std::string_view(f.frame_id),
                                 std::string_view(*target.device_id)}));
      if (!(rng.uniform() < rate)) continue;
      label.depth = world_to_camera(camera, {g.x, g.y, 0.0}).z;
      label.identity = target.device_id;
      label.confidence = 1.0;
      label.provenance = Provenance::RF;
      label.hidden = true;
      f.labels.push_back(std::move(label));
      ++out.injected;
    }
  }
  out.frames = std::move(frames);
  return out;
}

}  // namespace rflabel
