#include "rflabel/pipeline.hpp"

#include <cmath>

#include "rflabel/error.hpp"
#include "rflabel/parallel.hpp"

namespace rflabel {

namespace {

struct BurstJob {
  const Target* target;
  std::uint64_t index;
  double t;
};

struct BurstOutcome {
  std::vector<RangingSample> beacons;
  std::vector<RangingSample> means;
  std::optional<LocalizationFix> fix;
};

const OptOutPolicy* policy_for(const Scene& scene, const std::string& device) {
  for (const auto& p : scene.opt_out_policies) {
    if (p.device_id == device) return &p;
  }
  return nullptr;
}

// Marks RF labels whose target the ground truth reports as occluded in that frame.
void tag_hidden(std::vector<Frame>& rf, const std::vector<Frame>& gt) {
  std::map<std::string, const Frame*> by_id;
  for (const Frame& f : gt) by_id[f.frame_id] = &f;
  for (Frame& f : rf) {
    auto it = by_id.find(f.frame_id);
    if (it == by_id.end()) continue;
    for (Label& l : f.labels) {
      for (const Label& g : it->second->labels) {
        if (g.identity && l.identity && *g.identity == *l.identity && g.occluded) l.hidden = true;
      }
    }
  }
}

}  // namespace

SimulationResult simulate(const io::SceneConfig& config, const ErrorConfig& error,
                          const SimulationOptions& options) {
  const Scene& scene = config.scene;
  validate(error);
  RangingModel model = config.ranging;
  model.noise_enabled = options.noise;
  const std::vector<TxNode> txs = scene.active_transmitters(error.num_tx);
  const Polygon prior = scene.bounds.as_polygon();
  const FixParams fix_params{model.device_height, model.t_scale,
                             NlosScreen{model.ref_rss_1m, model.pathloss_exponent,
                                        options.thresholds.rss_threshold},
                             model.mean_folded_error()};

  std::vector<BurstJob> jobs;
  const auto bursts = static_cast<std::uint64_t>(std::floor(scene.duration * scene.burst_rate + 1e-9));
  for (const Target& target : scene.targets) {
    if (!target.rf_visible()) continue;
    for (std::uint64_t k = 0; k <= bursts; ++k) {
      const double t = static_cast<double>(k) / scene.burst_rate;
      if (target.active_at(t)) jobs.push_back({&target, k, t});
    }
  }

  std::vector<BurstOutcome> outcomes(jobs.size());
  parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
    const BurstJob& job = jobs[i];
    const std::string& device = *job.target->device_id;
    BurstOutcome& out = outcomes[i];
    std::vector<RangingSample> all;
    for (const TxNode& tx : txs) {
      Rng rng(derive_seed(options.seed, {std::string_view("ranging"), std::string_view(device),
                                         std::string_view(tx.id), job.index}));
      auto samples = measure_burst(tx, *job.target, job.t, scene, model, rng, error.samples_per_fix);
      const auto mean = summarize_bursts(samples);
      out.means.insert(out.means.end(), mean.begin(), mean.end());
      all.insert(all.end(), std::make_move_iterator(samples.begin()),
                 std::make_move_iterator(samples.end()));
    }
    try {
      out.fix = fix_from_burst(all, txs, prior, fix_params);
    } catch (const InfeasibleError&) {
      out.fix.reset();
    }
    if (options.keep_beacons) out.beacons = std::move(all);
  });

  SimulationResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    BurstOutcome& out = outcomes[i];
    if (!out.fix) ++result.failed_fixes;
    if (const OptOutPolicy* p = policy_for(scene, *jobs[i].target->device_id)) {
      std::optional<Vec2> where;
      if (out.fix) where = out.fix->position;
      if (p->suppresses(jobs[i].t, where)) continue;
    }
    result.bursts.insert(result.bursts.end(), out.means.begin(), out.means.end());
    result.beacons.insert(result.beacons.end(), std::make_move_iterator(out.beacons.begin()),
                          std::make_move_iterator(out.beacons.end()));
    if (out.fix) result.fixes.push_back(std::move(*out.fix));
  }
  result.events = detect_occlusions(result.bursts, options.thresholds);

  for (const CameraModel& camera : scene.cameras) {
    auto gt = apply_optout(generate_ground_truth(scene, camera, options.body, options.occlusion),
                           scene.opt_out_policies, scene.cameras, options.body);
    auto rf = apply_optout(generate_rf_labels(scene, camera, result.fixes, options.body),
                           scene.opt_out_policies, scene.cameras, options.body);
    tag_hidden(rf, gt);
    result.ground_truth.insert(result.ground_truth.end(), gt.begin(), gt.end());
    result.rf.insert(result.rf.end(), rf.begin(), rf.end());
  }

  result.report = quality_report(result.rf, result.ground_truth);
  result.report.per_config[error.name] = {result.report.mean_iou, result.report.label_precision,
                                          result.report.label_recall};
  return result;
}

}  // namespace rflabel
