#pragma once
// Noisy-label emulation on existing annotation sets and injection of the
// label mismatch types: partial coverage (missing labels), extraneous labels
// for camera-occluded targets, and localization noise split into angular and
// depth components.

#include <cstdint>
#include <span>
#include <vector>

#include "rflabel/labeling.hpp"
#include "rflabel/localization.hpp"
#include "rflabel/projection.hpp"
#include "rflabel/rng.hpp"

namespace rflabel {

enum class NoiseMode { angular_only, depth_only, both };

std::string_view to_string(NoiseMode m);
/// Accepts "angular"/"angular_only", "depth"/"depth_only", "both".
NoiseMode noise_mode_from_string(std::string_view s);

struct EmulationSpec {
  ErrorConfig error_config;
  double coverage_p = 1.0;
  NoiseMode mode = NoiseMode::both;
  bool height_variation_enabled = true;
  std::uint64_t seed = 0;
  BodyBoxParams body;
};

/// Throws ConfigError when coverage_p is outside [0, 1] or the error config is invalid.
void validate(const EmulationSpec& spec);

/// Keeps each label independently with probability p. Frames are preserved
/// (possibly empty). The draw for a label depends only on (seed, frame_id, index).
std::vector<Frame> apply_coverage(std::vector<Frame> frames, double p, std::uint64_t seed);

/// Uniform in [mean * (1 - variation), mean * (1 + variation)]; the mean when disabled.
double sample_assumed_height(const BodyBoxParams& params, bool variation_enabled, Rng& rng);

/// Splits a horizontal displacement (camera x, camera z) of a body at camera-frame
/// horizontal position `at` into the component along the camera ray (depth) and
/// the remainder (angular), and applies the selected part. The angular part is
/// re-expressed at the original optical depth so that it moves the box without
/// resizing it. Returns nullopt if the result is not in front of the camera.
std::optional<Vec2> displace(Vec2 at, Vec2 displacement, NoiseMode mode);

struct IouSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  std::vector<std::size_t> histogram;  // 10 bins over [0, 1]
};

IouSummary summarize_iou(std::vector<double> values);

struct EmulationReport {
  std::size_t input_labels = 0;
  std::size_t skipped_clipped = 0;
  std::size_t dropped_out_of_view = 0;
  std::size_t dropped_by_coverage = 0;
  std::size_t output_labels = 0;
  std::size_t output_clipped = 0;
  IouSummary iou;  // input vs emulated box, before coverage sampling
};

struct EmulationResult {
  std::vector<Frame> frames;
  EmulationReport report;
};

/// Per label: recover the body with a sampled assumed height, displace it by a
/// sampled localization error (restricted by `mode`), re-render with the same
/// height and the input box's aspect, then apply coverage. Output labels are RF
/// provenance with the emulated depth. Independent of `workers`.
EmulationResult emulate_noisy_labels(std::span<const Frame> annotations, const CameraModel& camera,
                                     const EmulationSpec& spec, unsigned workers = 1);

struct InjectionResult {
  std::vector<Frame> frames;
  std::size_t injected = 0;
};

/// For every frame and every RF-carrying target that is hidden from the camera
/// (ground ray crosses an occluder and the body is occluded beyond the threshold),
/// adds an RF label with probability `rate`, tagged hidden = true. Targets that
/// already have a label in that frame, or whose box would be clipped, are skipped.
/// Throws ConfigError when the scene has no occluders or rate is outside [0, 1].
InjectionResult inject_extraneous(std::vector<Frame> frames, const Scene& scene,
                                  const CameraModel& camera, std::uint64_t seed, double rate,
                                  const BodyBoxParams& body = {},
                                  const OcclusionParams& occlusion = {});

}  // namespace rflabel
