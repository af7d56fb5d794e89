#pragma once
// Label-quality evaluation and filtering: box overlap, occlusion detection on
// RF time series, rule-based label filtering, RF-vs-ground-truth reports and
// the log-average miss rate used for pedestrian detectors.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rflabel/labeling.hpp"
#include "rflabel/localization.hpp"
#include "rflabel/projection.hpp"
#include "rflabel/ranging.hpp"

namespace rflabel {

double iou(const BoundingBox& a, const BoundingBox& b);

struct OcclusionThresholds {
  double rss_threshold = 8.0;    // dB below the rolling median
  double range_threshold = 1.5;  // m above the rolling median
  double min_duration = 0.5;     // s
  double window = 3.0;           // s of unflagged history forming the baseline
  std::size_t min_baseline = 3;  // samples needed before anything can be flagged
};

struct OcclusionEvent {
  std::string target_id;
  std::string tx_id;
  double start = 0.0;
  double end = 0.0;
  bool rss_drop = false;
  bool range_jump = false;

  bool active_at(double t) const { return t >= start && t < end; }
};

/// Collapses beacons sharing (tx, target, timestamp) into one sample carrying the
/// mean measured range and mean RSS; output ordered by (tx, target, timestamp).
std::vector<RangingSample> summarize_bursts(std::span<const RangingSample> samples);

/// One (tx, target) series, time-ordered. A sample is anomalous when its RSS falls
/// more than rss_threshold below, or its range rises more than range_threshold
/// above, the baseline: a Theil-Sen trend (median slope, median intercept) through
/// the most recent `window` seconds of non-anomalous samples, evaluated at the
/// sample time. For a stationary target the baseline is the rolling median.
/// Maximal anomalous runs lasting at least min_duration become events covering
/// [first anomalous sample, next sample) (the last run extends by the median spacing).
/// Throws ConfigError if the series spans less than one window.
std::vector<OcclusionEvent> detect_occlusion(std::span<const RangingSample> series,
                                             const OcclusionThresholds& thresholds = {});

/// Groups raw samples per (tx, target), summarizes bursts and runs detect_occlusion
/// on every series long enough to be analysed.
std::vector<OcclusionEvent> detect_occlusions(std::span<const RangingSample> samples,
                                              const OcclusionThresholds& thresholds = {});

struct FilterCriteria {
  double min_confidence = 0.2;
  double speed_cap = 12.0;  // m/s between consecutive fixes of one identity
  double fix_match_tolerance = 0.05;  // s between label frame time and fix time
};

struct FilterStats {
  std::size_t examined = 0;
  std::size_t removed_low_confidence = 0;
  std::size_t removed_occlusion = 0;
  std::size_t removed_speed = 0;
  std::size_t kept = 0;

  std::size_t removed() const { return removed_low_confidence + removed_occlusion + removed_speed; }
};

struct FilterResult {
  std::vector<Frame> frames;
  FilterStats stats;
};

/// Drops non-ground-truth labels whose fix has low confidence, whose identity has an
/// active occlusion event at the frame time, or whose fix implies a speed above the
/// cap relative to the previous fix of the same identity. Ground-truth labels are
/// never removed.
FilterResult filter_labels(std::vector<Frame> frames, std::span<const LocalizationFix> fixes,
                           std::span<const OcclusionEvent> events,
                           const FilterCriteria& criteria = {});

struct ScoredBox {
  BoundingBox box;
  double score = 0.0;
};

struct DetectionFrame {
  std::string frame_id;
  std::vector<ScoredBox> detections;
};

/// Log-average miss rate over nine FPPI reference points log-spaced in [1e-2, 1].
/// Detections are greedily matched (descending score, best IoU >= match_iou) to
/// non-occluded ground truth; a detection that only overlaps an occluded label is
/// ignored. At each reference point the lowest miss rate achieved at or below that
/// FPPI is taken; the result is the arithmetic mean of the nine values.
/// Throws InfeasibleError when the ground truth has no usable labels.
double log_average_miss_rate(std::span<const DetectionFrame> detections,
                             std::span<const Frame> ground_truth, double match_iou = 0.5);

struct ErrorStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

ErrorStats error_stats(std::vector<double> values);

struct LabelPair {
  std::string frame_id;
  std::string camera_id;
  std::size_t rf_index = 0;
  std::size_t gt_index = 0;
  double iou = 0.0;
  double center_error_px = 0.0;  // |center column difference|
  double height_error_px = 0.0;  // |box height difference|
};

struct QualitySummary {
  double mean_iou = 0.0;
  double label_precision = 0.0;
  double label_recall = 0.0;
};

struct QualityReport {
  double mean_iou = 0.0;
  std::vector<std::size_t> iou_histogram;  // 10 bins over [0, 1]
  double label_precision = 0.0;
  double label_recall = 0.0;
  ErrorStats angular_error_stats;
  ErrorStats size_error_stats;
  std::size_t dropped_label_count = 0;  // usable ground-truth labels without an RF partner
  std::size_t rf_labels = 0;
  std::size_t gt_labels = 0;
  std::size_t matched = 0;  // pairs with IoU >= match_iou
  std::map<std::string, QualitySummary> per_config;
  std::vector<LabelPair> pairs;
};

/// Pairs RF and ground-truth labels frame by frame (greedy, highest IoU first,
/// any positive overlap). Precision and recall count pairs with IoU >= match_iou.
/// Occluded labels are excluded on both sides. Throws ConfigError when an RF
/// frame id has no ground-truth counterpart.
QualityReport quality_report(std::span<const Frame> rf_frames, std::span<const Frame> gt_frames,
                             double match_iou = 0.5);

}  // namespace rflabel
