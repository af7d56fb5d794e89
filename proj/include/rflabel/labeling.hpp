#pragma once
// RF labeling pipeline: fixes are matched to camera frames and turned into
// body-box labels; ground-truth labels, identity correlation, activity
// classification and privacy opt-out operate on the same frame sets.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rflabel/localization.hpp"
#include "rflabel/projection.hpp"
#include "rflabel/scene.hpp"

namespace rflabel {

enum class Provenance { GroundTruth, RF, EmulatedHuman };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Label {
  BoundingBox bbox;
  std::optional<double> depth;  // optical-axis depth of the foot point, m
  std::optional<std::string> identity;
  double confidence = 1.0;
  Provenance provenance = Provenance::GroundTruth;
  bool occluded = false;
  bool hidden = false;  // injected for a target hidden from the camera (scoring tag)

  bool operator==(const Label&) const = default;
};

struct Frame {
  std::string frame_id;
  std::string camera_id;
  double timestamp = 0.0;
  std::vector<Label> labels;

  bool operator==(const Frame&) const = default;
};

std::string frame_id_for(const CameraModel& camera, std::size_t tick);

/// Number of frame ticks a camera produces over `duration` (ticks at k / frame_rate).
std::size_t frame_count(const CameraModel& camera, double duration);

/// Index of the frame matched to time t: nearest tick within half a period,
/// exact midpoints go to the earlier frame. nullopt when no tick qualifies.
std::optional<std::size_t> match_frame(const CameraModel& camera, double duration, double t);

struct OcclusionParams {
  double threshold = 0.35;  // hidden body-area fraction above which a label is occluded
  int grid_columns = 8;
  int grid_rows = 16;
};

/// Fraction of the target's vertical body rectangle (facing the camera) whose
/// sight line from the camera center passes through an occluder prism.
double body_occlusion_fraction(const Scene& scene, const CameraModel& camera, Vec2 ground,
                               double height, double aspect, const OcclusionParams& params = {});

/// True when the camera's ground ray to `ground` crosses an occluder footprint
/// that is taller than the camera or the target.
bool in_occluder_shadow(const Scene& scene, const CameraModel& camera, Vec2 ground,
                        double target_height);

Label ground_truth_label(const Scene& scene, const CameraModel& camera, const Target& target,
                         double t, double aspect, const OcclusionParams& params);

std::vector<Frame> generate_ground_truth(const Scene& scene, const CameraModel& camera,
                                         const BodyBoxParams& body = {},
                                         const OcclusionParams& params = {});

std::vector<Frame> generate_rf_labels(const Scene& scene, const CameraModel& camera,
                                      std::span<const LocalizationFix> fixes,
                                      const BodyBoxParams& body = {});

/// Removes labels of devices covered by a policy (full, time window, or the
/// label's back-projected ground position inside a region). Clipped labels
/// cannot be located and are removed under any region policy.
std::vector<Frame> apply_optout(std::vector<Frame> frames, std::span<const OptOutPolicy> policies,
                                std::span<const CameraModel> cameras,
                                const BodyBoxParams& body = {});

struct ActivityParams {
  SpeedBands bands;
  double window = 2.0;  // s, speed smoothing window
  std::string bike_lane_region = "bike_lane";
};

/// Median windowed speed mapped through the speed bands. Speeds in the running
/// band or above are classified as biking when most fixes lie in the bike-lane
/// region; elsewhere they are running unless faster than any runner.
/// Throws ConfigError with fewer than two fixes or a span shorter than the window.
Activity classify_activity(std::span<const LocalizationFix> fixes,
                           std::span<const RoadRegion> road_regions,
                           const ActivityParams& params = {});

struct CorrelatedLabel {
  std::string camera_id;
  std::string frame_id;
  double timestamp = 0.0;
  Label label;
};

/// Groups labels by identity across cameras; each group ordered by (timestamp, camera_id).
std::map<std::string, std::vector<CorrelatedLabel>> correlate_identities(
    std::span<const Frame> frames);

}  // namespace rflabel
