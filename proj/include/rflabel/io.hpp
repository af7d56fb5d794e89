#pragma once
// File formats: scene and error-config JSON, annotation JSON and its COCO-style
// mirror, ranging and fix CSV logs, occlusion events and report documents.
// Every parse failure is a ConfigError; every filesystem failure an IoError.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rflabel/emulation.hpp"
#include "rflabel/labeling.hpp"
#include "rflabel/localization.hpp"
#include "rflabel/quality.hpp"
#include "rflabel/ranging.hpp"
#include "rflabel/scene.hpp"

namespace rflabel::io {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

json parse_json(const std::string& text, const std::string& what);
json load_json(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
std::string dump(const json& j);
/// FNV-1a hex digest of the compact dump; stable across re-serialization.
std::string digest(const json& j);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

struct SceneConfig {
  Scene scene;
  RangingModel ranging;
};

/// Targets may carry a "generate" object instead of a trajectory; the walk is
/// then drawn with a seed derived from `seed` and the target id.
SceneConfig scene_from_json(const json& j, std::uint64_t seed = 0);
json scene_to_json(const SceneConfig& config);
/// "street" selects the built-in template; anything else is a file path.
SceneConfig load_scene(const std::string& path_or_template, std::uint64_t seed = 0);

/// 5 x 40 m street segment with two facing cameras, six transmitters, a kiosk
/// occluder, sidewalk and bike lane, four device carriers (a pedestrian crossing
/// behind the kiosk, a sidewalk walker, two one-way bikers) and one stationary
/// pedestrian without a device.
SceneConfig street_template();

ErrorConfig error_config_from_json(const json& j);
json error_config_to_json(const ErrorConfig& config);
/// "S0".."S3" select the built-ins; anything else is a file path.
ErrorConfig load_error_config(const std::string& name_or_path);

CameraModel camera_from_json(const json& j);
json camera_to_json(const CameraModel& camera);

json frames_to_json(std::span<const Frame> frames);
std::vector<Frame> frames_from_json(const json& j);

/// COCO-style detection document: images, annotations (bbox, category 1 = person)
/// and an "rflabel" extension per annotation carrying the remaining label fields.
json frames_to_coco(std::span<const Frame> frames, int image_width, int image_height);
std::vector<Frame> frames_from_coco(const json& j);

std::string ranging_to_csv(std::span<const RangingSample> samples);
std::vector<RangingSample> ranging_from_csv(const std::string& text);

std::string fixes_to_csv(std::span<const LocalizationFix> fixes);
std::vector<LocalizationFix> fixes_from_csv(const std::string& text);

json events_to_json(std::span<const OcclusionEvent> events);
std::vector<OcclusionEvent> events_from_json(const json& j);

json report_to_json(const QualityReport& report);
json emulation_report_to_json(const EmulationReport& report);
json filter_stats_to_json(const FilterStats& stats);

struct EmulationJob {
  EmulationSpec spec;
  CameraModel camera;
};

/// {"error_config": "S1" | {...}, "coverage_p", "mode", "height_variation",
///  "seed", "camera": {...}}
EmulationJob emulation_job_from_json(const json& j);

}  // namespace rflabel::io
