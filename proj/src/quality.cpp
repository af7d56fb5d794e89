#include "rflabel/quality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>
#include <unordered_map>

#include "rflabel/error.hpp"
#include "rflabel/kernels.hpp"

namespace rflabel {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  }
  return m;
}

// Theil-Sen line through the history (median pairwise slope, median intercept),
// evaluated at t. For a stationary signal this is the rolling median.
double trend_at(const std::deque<const RangingSample*>& history, double t,
                double RangingSample::*field) {
  std::vector<double> slopes;
  for (std::size_t a = 0; a < history.size(); ++a) {
    for (std::size_t b = a + 1; b < history.size(); ++b) {
      const double dt = history[b]->timestamp - history[a]->timestamp;
      if (dt > 0.0) slopes.push_back((history[b]->*field - history[a]->*field) / dt);
    }
  }
  const double slope = slopes.empty() ? 0.0 : median_of(std::move(slopes));
  std::vector<double> intercepts;
  for (const RangingSample* h : history) intercepts.push_back(h->*field - slope * (h->timestamp - t));
  return median_of(std::move(intercepts));
}

struct BoxTable {
  std::vector<double> x, y, w, h;

  void push(const BoundingBox& b) {
    x.push_back(b.x);
    y.push_back(b.y);
    w.push_back(b.w);
    h.push_back(b.h);
  }
  kernels::BoxColumns columns() const { return {x, y, w, h}; }
  std::size_t size() const { return x.size(); }
};

}  // namespace

std::vector<RangingSample> summarize_bursts(std::span<const RangingSample> samples) {
  using Key = std::tuple<std::string, std::string, double>;
  std::map<Key, std::vector<const RangingSample*>> groups;
  for (const auto& s : samples) groups[{s.tx_id, s.target_id, s.timestamp}].push_back(&s);

  std::vector<RangingSample> out;
  out.reserve(groups.size());
  std::vector<double> measured, signal;
  for (const auto& [key, members] : groups) {
    measured.clear();
    signal.clear();
    bool los = true;
    for (const RangingSample* s : members) {
      measured.push_back(s->measured_distance);
      signal.push_back(s->rss);
      los = los && s->los;
    }
    RangingSample r = *members.front();
    r.measured_distance = kernels::mean(measured);
    r.rss = kernels::mean(signal);
    r.los = los;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<OcclusionEvent> detect_occlusion(std::span<const RangingSample> series,
                                             const OcclusionThresholds& th) {
  if (series.size() < 2 || series.back().timestamp - series.front().timestamp < th.window) {
    throw ConfigError("series too short for the " + std::to_string(th.window) +
                      " s rolling window");
  }
  struct Flags {
    bool rss = false;
    bool range = false;
    bool any() const { return rss || range; }
  };
  std::vector<Flags> flags(series.size());
  std::deque<const RangingSample*> history;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const RangingSample& s = series[i];
    // Age the baseline against its own newest sample so a long blockage keeps
    // the last clean window instead of draining into the blocked level.
    while (!history.empty() && history.front()->timestamp < history.back()->timestamp - th.window) {
      history.pop_front();
    }
    if (history.size() >= th.min_baseline) {
      const double rss_base = trend_at(history, s.timestamp, &RangingSample::rss);
      const double range_base = trend_at(history, s.timestamp, &RangingSample::measured_distance);
      flags[i].rss = s.rss < rss_base - th.rss_threshold;
      flags[i].range = s.measured_distance > range_base + th.range_threshold;
    }
    if (!flags[i].any()) history.push_back(&s);
  }

  std::vector<double> gaps;
  for (std::size_t i = 1; i < series.size(); ++i) {
    gaps.push_back(series[i].timestamp - series[i - 1].timestamp);
  }
  const double spacing = median_of(gaps);

  std::vector<OcclusionEvent> events;
  for (std::size_t i = 0; i < series.size();) {
    if (!flags[i].any()) {
      ++i;
      continue;
    }
    std::size_t j = i;
    OcclusionEvent ev;
    ev.target_id = series[i].target_id;
    ev.tx_id = series[i].tx_id;
    while (j < series.size() && flags[j].any()) {
      ev.rss_drop = ev.rss_drop || flags[j].rss;
      ev.range_jump = ev.range_jump || flags[j].range;
      ++j;
    }
    ev.start = series[i].timestamp;
    ev.end = j < series.size() ? series[j].timestamp : series[j - 1].timestamp + spacing;
    if (ev.end - ev.start >= th.min_duration - 1e-9) events.push_back(std::move(ev));
    i = j;
  }
  return events;
}

std::vector<OcclusionEvent> detect_occlusions(std::span<const RangingSample> samples,
                                              const OcclusionThresholds& thresholds) {
  const std::vector<RangingSample> bursts = summarize_bursts(samples);
  std::vector<OcclusionEvent> events;
  std::size_t i = 0;
  while (i < bursts.size()) {
    std::size_t j = i;
    while (j < bursts.size() && bursts[j].tx_id == bursts[i].tx_id &&
           bursts[j].target_id == bursts[i].target_id) {
      ++j;
    }
    const std::span<const RangingSample> series(bursts.data() + i, j - i);
    if (series.size() >= 2 &&
        series.back().timestamp - series.front().timestamp >= thresholds.window) {
      auto found = detect_occlusion(series, thresholds);
      events.insert(events.end(), found.begin(), found.end());
    }
    i = j;
  }
  return events;
}

FilterResult filter_labels(std::vector<Frame> frames, std::span<const LocalizationFix> fixes,
                           std::span<const OcclusionEvent> events,
                           const FilterCriteria& criteria) {
  std::unordered_map<std::string, std::vector<const LocalizationFix*>> by_identity;
  for (const auto& f : fixes) by_identity[f.target_id].push_back(&f);
  for (auto& [id, list] : by_identity) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto* a, const auto* b) { return a->timestamp < b->timestamp; });
  }
  std::unordered_map<std::string, std::vector<const OcclusionEvent*>> events_by_identity;
  for (const auto& e : events) events_by_identity[e.target_id].push_back(&e);

  FilterResult out;
  FilterStats& st = out.stats;
  for (Frame& frame : frames) {
    std::erase_if(frame.labels, [&](const Label& label) {
      if (label.provenance == Provenance::GroundTruth) return false;
      ++st.examined;
      if (!label.identity) {
        ++st.kept;
        return false;
      }
      const std::string& id = *label.identity;
      if (auto it = events_by_identity.find(id); it != events_by_identity.end()) {
        for (const OcclusionEvent* e : it->second) {
          if (e->active_at(frame.timestamp)) {
            ++st.removed_occlusion;
            return true;
          }
        }
      }
      if (auto it = by_identity.find(id); it != by_identity.end()) {
        const auto& list = it->second;
        auto pos = std::lower_bound(list.begin(), list.end(), frame.timestamp,
                                    [](const auto* f, double t) { return f->timestamp < t; });
        std::optional<std::size_t> idx;
        double best = criteria.fix_match_tolerance;
        for (auto cand : {pos - (pos == list.begin() ? 0 : 1), pos}) {
          if (cand == list.end()) continue;
          const double gap = std::abs((*cand)->timestamp - frame.timestamp);
          if (gap <= best) {
            best = gap;
            idx = static_cast<std::size_t>(cand - list.begin());
          }
        }
        if (idx) {
          const LocalizationFix& fix = *list[*idx];
          if (fix.confidence < criteria.min_confidence) {
            ++st.removed_low_confidence;
            return true;
          }
          if (*idx > 0) {
            const LocalizationFix& prev = *list[*idx - 1];
            const double dt = fix.timestamp - prev.timestamp;
            if (dt > 0.0 && distance(fix.position, prev.position) / dt > criteria.speed_cap) {
              ++st.removed_speed;
              return true;
            }
          }
        }
      }
      ++st.kept;
      return false;
    });
  }
  out.frames = std::move(frames);
  return out;
}

double log_average_miss_rate(std::span<const DetectionFrame> detections,
                             std::span<const Frame> ground_truth, double match_iou) {
  std::unordered_map<std::string, const DetectionFrame*> det_by_frame;
  for (const auto& d : detections) det_by_frame[d.frame_id] = &d;

  struct Scored {
    double score;
    bool true_positive;
  };
  std::vector<Scored> scored;
  std::size_t positives = 0;
  for (const Frame& gt : ground_truth) {
    BoxTable table;
    std::vector<bool> ignore;
    for (const Label& l : gt.labels) {
      table.push(l.bbox);
      ignore.push_back(l.occluded);
      if (!l.occluded) ++positives;
    }
    auto it = det_by_frame.find(gt.frame_id);
    if (it == det_by_frame.end()) continue;

    std::vector<std::size_t> order(it->second->detections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto& dets = it->second->detections;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    std::vector<bool> taken(table.size(), false);
    std::vector<double> overlap(table.size());
    for (std::size_t di : order) {
      const BoundingBox& b = dets[di].box;
      kernels::iou_one_to_many(b.x, b.y, b.w, b.h, table.columns(), overlap);
      std::optional<std::size_t> best;
      bool hits_ignored = false;
      for (std::size_t g = 0; g < table.size(); ++g) {
        if (overlap[g] < match_iou) continue;
        if (ignore[g]) {
          hits_ignored = true;
          continue;
        }
        if (taken[g]) continue;
        if (!best || overlap[g] > overlap[*best]) best = g;
      }
      if (best) {
        taken[*best] = true;
        scored.push_back({dets[di].score, true});
      } else if (!hits_ignored) {
        scored.push_back({dets[di].score, false});
      }
    }
  }
  if (positives == 0) throw InfeasibleError("log-average miss rate: ground truth has no usable labels");

  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  const double images = static_cast<double>(ground_truth.size());
  std::vector<std::pair<double, double>> curve{{0.0, 1.0}};  // (fppi, miss rate)
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    (scored[i].true_positive ? tp : fp) += 1;
    if (i + 1 < scored.size() && scored[i + 1].score == scored[i].score) continue;
    curve.emplace_back(static_cast<double>(fp) / images,
                       1.0 - static_cast<double>(tp) / static_cast<double>(positives));
  }

  double acc = 0.0;
  for (int k = 0; k < 9; ++k) {
    const double ref = std::pow(10.0, -2.0 + 2.0 * k / 8.0);
    double best = 1.0;
    for (const auto& [fppi, miss] : curve) {
      if (fppi <= ref) best = std::min(best, miss);
    }
    acc += best;
  }
  return acc / 9.0;
}

ErrorStats error_stats(std::vector<double> v) {
  ErrorStats s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.mean = kernels::mean(v);
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(v.size() - 1, lo + 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.median = quantile(0.5);
  s.p95 = quantile(0.95);
  s.max = v.back();
  return s;
}

QualityReport quality_report(std::span<const Frame> rf_frames, std::span<const Frame> gt_frames,
                             double match_iou) {
  std::unordered_map<std::string, const Frame*> rf_by_id;
  std::unordered_map<std::string, const Frame*> gt_by_id;
  for (const Frame& f : gt_frames) gt_by_id[f.frame_id] = &f;
  for (const Frame& f : rf_frames) {
    if (!gt_by_id.contains(f.frame_id)) {
      throw ConfigError("misaligned frame sets: RF frame '" + f.frame_id +
                        "' has no ground-truth frame");
    }
    rf_by_id[f.frame_id] = &f;
  }

  QualityReport rep;
  std::vector<double> ious, center_err, height_err;
  for (const Frame& gt : gt_frames) {
    std::vector<std::size_t> gt_idx;
    BoxTable table;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
      if (gt.labels[i].occluded) continue;
      gt_idx.push_back(i);
      table.push(gt.labels[i].bbox);
    }
    rep.gt_labels += gt_idx.size();
    auto it = rf_by_id.find(gt.frame_id);
    if (it == rf_by_id.end()) {
      rep.dropped_label_count += gt_idx.size();
      continue;
    }
    const Frame& rf = *it->second;

    struct Candidate {
      double iou;
      std::size_t rf, gt;
    };
    std::vector<Candidate> cands;
    std::vector<double> overlap(table.size());
    std::size_t rf_usable = 0;
    for (std::size_t r = 0; r < rf.labels.size(); ++r) {
      if (rf.labels[r].occluded) continue;
      ++rf_usable;
      const BoundingBox& b = rf.labels[r].bbox;
      kernels::iou_one_to_many(b.x, b.y, b.w, b.h, table.columns(), overlap);
      for (std::size_t g = 0; g < table.size(); ++g) {
        if (overlap[g] > 0.0) cands.push_back({overlap[g], r, g});
      }
    }
    rep.rf_labels += rf_usable;
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.iou > b.iou; });
    std::vector<bool> rf_used(rf.labels.size(), false), gt_used(table.size(), false);
    std::size_t paired_gt = 0;
    for (const Candidate& c : cands) {
      if (rf_used[c.rf] || gt_used[c.gt]) continue;
      rf_used[c.rf] = gt_used[c.gt] = true;
      ++paired_gt;
      const BoundingBox& a = rf.labels[c.rf].bbox;
      const BoundingBox& b = gt.labels[gt_idx[c.gt]].bbox;
      LabelPair p{gt.frame_id,
                  gt.camera_id,
                  c.rf,
                  gt_idx[c.gt],
                  c.iou,
                  std::abs(a.center_x() - b.center_x()),
                  std::abs(a.h - b.h)};
      ious.push_back(p.iou);
      center_err.push_back(p.center_error_px);
      height_err.push_back(p.height_error_px);
      if (p.iou >= match_iou) ++rep.matched;
      rep.pairs.push_back(std::move(p));
    }
    rep.dropped_label_count += gt_idx.size() - paired_gt;
  }

  rep.iou_histogram.assign(10, 0);
  for (double v : ious) {
    ++rep.iou_histogram[std::min<std::size_t>(9, static_cast<std::size_t>(std::floor(v * 10.0)))];
  }
  rep.mean_iou = ious.empty() ? 0.0 : kernels::mean(ious);
  rep.label_precision =
      rep.rf_labels == 0 ? 0.0 : static_cast<double>(rep.matched) / static_cast<double>(rep.rf_labels);
  rep.label_recall =
      rep.gt_labels == 0 ? 0.0 : static_cast<double>(rep.matched) / static_cast<double>(rep.gt_labels);
  rep.angular_error_stats = error_stats(std::move(center_err));
  rep.size_error_stats = error_stats(std::move(height_err));
  return rep;
}

}  // namespace rflabel
