#include <chrono>
#include <cstdlib>
#include <thread>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "rflabel/cli.hpp"
#include "rflabel/emulation.hpp"
#include "rflabel/error.hpp"
#include "rflabel/io.hpp"
#include "rflabel/pipeline.hpp"
#include "rflabel/quality.hpp"

namespace rflabel::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

using Logger = std::shared_ptr<spdlog::logger>;

spdlog::level::level_enum level_from_env() {
  const char* v = std::getenv("RFLABEL_LOG");
  if (!v || !*v) return spdlog::level::warn;
  return spdlog::level::from_str(v);
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Collects written outputs for the run manifest.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    io::write_file_atomic(dir_ / name, content);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash_string(content)));
    files_.push_back({{"path", name}, {"digest", buf}});
  }
  void write_json(const std::string& name, const json& j) { write(name, io::dump(j)); }

  void manifest(const std::string& command, std::uint64_t seed, const json& config,
                const json& inputs, std::chrono::steady_clock::time_point started) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const json m = {{"command", command},
                    {"tool_version", kVersion},
                    {"seed", seed},
                    {"config_digest", io::digest(config)},
                    {"inputs", inputs},
                    {"outputs", files_},
                    {"timing", {{"wall_seconds", seconds}}}};
    io::write_file_atomic(dir_ / "manifest.json", io::dump(m));
  }

 private:
  fs::path dir_;
  json files_ = json::array();
};

struct SimulateArgs {
  std::string config = "street";
  std::string error_config = "S0";
  std::string out;
  std::uint64_t seed = 0;
  bool no_noise = false;
  bool beacon_log = false;
  unsigned jobs = default_workers();
};

void cmd_simulate(const SimulateArgs& a, const Logger& log) {
  const auto started = std::chrono::steady_clock::now();
  const io::SceneConfig scene = io::load_scene(a.config, a.seed);
  const ErrorConfig error = io::load_error_config(a.error_config);
  SimulationOptions opt;
  opt.seed = a.seed;
  opt.noise = !a.no_noise;
  opt.workers = a.jobs;
  opt.keep_beacons = a.beacon_log;
  log->info("simulate: {} targets, {} cameras, config {}", scene.scene.targets.size(),
            scene.scene.cameras.size(), error.name);
  const SimulationResult r = simulate(scene, error, opt);
  if (r.failed_fixes > 0) log->warn("{} bursts produced no fix", r.failed_fixes);

  Outputs out(a.out);
  out.write("ranging.csv", io::ranging_to_csv(a.beacon_log ? r.beacons : r.bursts));
  out.write("fixes.csv", io::fixes_to_csv(r.fixes));
  out.write_json("gt_annotations.json", io::frames_to_json(r.ground_truth));
  out.write_json("rf_annotations.json", io::frames_to_json(r.rf));
  out.write_json("occlusion_events.json", io::events_to_json(r.events));
  out.write_json("quality_report.json", io::report_to_json(r.report));
  const json config = {{"scene", io::scene_to_json(scene)},
                       {"error_config", io::error_config_to_json(error)},
                       {"noise", !a.no_noise}};
  out.manifest("simulate", a.seed, config,
               {{"config", a.config}, {"error_config", a.error_config}}, started);
  log->info("simulate: mean IoU {:.3f}, {} RF labels", r.report.mean_iou, r.report.rf_labels);
}

struct EmulateArgs {
  std::string annotations;
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> coverage;
  unsigned jobs = default_workers();
};

void cmd_emulate(const EmulateArgs& a, const Logger& log) {
  const auto started = std::chrono::steady_clock::now();
  const auto frames = io::frames_from_json(io::load_json(a.annotations));
  const json spec_json = io::load_json(a.spec);
  io::EmulationJob job = io::emulation_job_from_json(spec_json);
  if (a.seed) job.spec.seed = *a.seed;
  if (a.mode) job.spec.mode = noise_mode_from_string(*a.mode);
  if (a.coverage) job.spec.coverage_p = *a.coverage;
  validate(job.spec);
  if (job.spec.coverage_p == 0.0) log->warn("coverage p = 0: every label will be dropped");

  const EmulationResult r = emulate_noisy_labels(frames, job.camera, job.spec, a.jobs);
  if (r.report.skipped_clipped > 0) {
    log->warn("{} clipped input labels skipped", r.report.skipped_clipped);
  }
  Outputs out(a.out);
  out.write_json("annotations.json", io::frames_to_json(r.frames));
  out.write_json("emulation_report.json", io::emulation_report_to_json(r.report));
  const json config = {{"spec", spec_json},
                       {"mode", to_string(job.spec.mode)},
                       {"coverage_p", job.spec.coverage_p}};
  out.manifest("emulate", job.spec.seed, config,
               {{"annotations", a.annotations}, {"spec", a.spec}}, started);
}

struct CalibrateArgs {
  std::vector<std::string> pairs;
  bool builtins = false;
  std::string out;
};

void cmd_calibrate(const CalibrateArgs& a, const Logger& log) {
  const auto started = std::chrono::steady_clock::now();
  if (a.pairs.empty() && !a.builtins) throw ConfigError("calibrate: give --pair or --builtins");
  std::vector<ErrorConfig> configs;
  if (a.builtins) {
    for (const auto& n : builtin_error_config_names()) configs.push_back(builtin_error_config(n));
  }
  for (const auto& p : a.pairs) {
    const auto first = p.find(':');
    const auto second = p.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos) {
      throw ConfigError("calibrate: pair '" + p + "' is not NAME:MEDIAN_M:P95_M");
    }
    ErrorConfig c;
    c.name = p.substr(0, first);
    try {
      c.target_median = std::stod(p.substr(first + 1, second - first - 1));
      c.target_p95 = std::stod(p.substr(second + 1));
    } catch (const std::exception&) {
      throw ConfigError("calibrate: pair '" + p + "' has non-numeric quantiles");
    }
    if (c.name.empty()) throw ConfigError("calibrate: pair '" + p + "' has an empty name");
    c.gamma = calibrate_gamma(c.target_median, c.target_p95);
    configs.push_back(c);
  }
  Outputs out(a.out);
  json all = json::array();
  for (const auto& c : configs) {
    log->info("calibrated {}: k={:.6g} theta={:.6g}", c.name, c.gamma->shape, c.gamma->scale);
    const json j = io::error_config_to_json(c);
    out.write_json(c.name + ".json", j);
    all.push_back(j);
  }
  out.manifest("calibrate", 0, all, {{"pairs", a.pairs}, {"builtins", a.builtins}}, started);
}

struct FilterArgs {
  std::string annotations;
  std::string fixes;
  std::string events;
  std::string ranging;
  std::string out;
  FilterCriteria criteria;
};

void cmd_filter(const FilterArgs& a, const Logger& log) {
  const auto started = std::chrono::steady_clock::now();
  auto frames = io::frames_from_json(io::load_json(a.annotations));
  const auto fixes = io::fixes_from_csv(io::read_file(a.fixes));
  std::vector<OcclusionEvent> events;
  if (!a.events.empty()) events = io::events_from_json(io::load_json(a.events));
  if (!a.ranging.empty()) {
    auto found = detect_occlusions(io::ranging_from_csv(io::read_file(a.ranging)));
    events.insert(events.end(), found.begin(), found.end());
  }
  const FilterResult r = filter_labels(std::move(frames), fixes, events, a.criteria);
  log->info("filter: removed {} of {} labels", r.stats.removed(), r.stats.examined);
  Outputs out(a.out);
  out.write_json("filtered_annotations.json", io::frames_to_json(r.frames));
  out.write_json("filter_stats.json", io::filter_stats_to_json(r.stats));
  const json config = {{"min_confidence", a.criteria.min_confidence},
                       {"speed_cap", a.criteria.speed_cap},
                       {"fix_match_tolerance", a.criteria.fix_match_tolerance}};
  out.manifest("filter", 0, config,
               {{"annotations", a.annotations}, {"fixes", a.fixes}, {"events", a.events},
                {"ranging", a.ranging}},
               started);
}

std::string histogram_svg(const std::vector<std::size_t>& bins) {
  const double width = 420, height = 260, left = 40, bottom = 30;
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(bins.begin(), bins.end()));
  const double bar = (width - left - 10) / static_cast<double>(bins.size());
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"260\">\n";
  s += "<text x=\"40\" y=\"16\" font-size=\"12\">IoU histogram (" + std::to_string(peak) +
       " max)</text>\n";
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double h = (height - bottom - 30) * static_cast<double>(bins[i]) / static_cast<double>(peak);
    s += "<rect x=\"" + io::format_double(left + i * bar) + "\" y=\"" +
         io::format_double(height - bottom - h) + "\" width=\"" + io::format_double(bar - 2) +
         "\" height=\"" + io::format_double(h) + "\" fill=\"#4878a8\"/>\n";
    s += "<text x=\"" + io::format_double(left + i * bar) + "\" y=\"" +
         io::format_double(height - 12) + "\" font-size=\"10\">" + io::format_double(i / 10.0) +
         "</text>\n";
  }
  return s + "</svg>\n";
}

std::string scatter_svg(const std::vector<LabelPair>& pairs) {
  double xmax = 1.0, ymax = 1.0;
  for (const auto& p : pairs) {
    xmax = std::max(xmax, p.center_error_px);
    ymax = std::max(ymax, p.height_error_px);
  }
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"320\">\n";
  s += "<text x=\"40\" y=\"16\" font-size=\"12\">center-column error (x, px) vs height error (y, px)</text>\n";
  s += "<line x1=\"40\" y1=\"290\" x2=\"410\" y2=\"290\" stroke=\"black\"/>\n";
  s += "<line x1=\"40\" y1=\"30\" x2=\"40\" y2=\"290\" stroke=\"black\"/>\n";
  for (const auto& p : pairs) {
    s += "<circle cx=\"" + io::format_double(40 + 370 * p.center_error_px / xmax) + "\" cy=\"" +
         io::format_double(290 - 260 * p.height_error_px / ymax) +
         "\" r=\"1.5\" fill=\"#a84848\"/>\n";
  }
  return s + "</svg>\n";
}

struct ReportArgs {
  std::string rf;
  std::string gt;
  std::string out;
  std::string name;
  bool svg = false;
  bool csv = false;
};

void cmd_report(const ReportArgs& a, const Logger& log) {
  const auto started = std::chrono::steady_clock::now();
  const auto rf = io::frames_from_json(io::load_json(a.rf));
  const auto gt = io::frames_from_json(io::load_json(a.gt));
  QualityReport r = quality_report(rf, gt);
  if (!a.name.empty()) r.per_config[a.name] = {r.mean_iou, r.label_precision, r.label_recall};
  log->info("report: mean IoU {:.3f}, precision {:.3f}, recall {:.3f}", r.mean_iou,
            r.label_precision, r.label_recall);
  Outputs out(a.out);
  out.write_json("quality_report.json", io::report_to_json(r));
  if (a.svg) {
    out.write("iou_histogram.svg", histogram_svg(r.iou_histogram));
    out.write("error_scatter.svg", scatter_svg(r.pairs));
  }
  if (a.csv) {
    std::string csv = "frame_id,camera_id,rf_index,gt_index,iou,center_error_px,height_error_px\n";
    for (const auto& p : r.pairs) {
      csv += p.frame_id + ',' + p.camera_id + ',' + std::to_string(p.rf_index) + ',' +
             std::to_string(p.gt_index) + ',' + io::format_double(p.iou) + ',' +
             io::format_double(p.center_error_px) + ',' + io::format_double(p.height_error_px) + '\n';
    }
    out.write("label_errors.csv", csv);
  }
  out.manifest("report", 0, {{"name", a.name}}, {{"rf", a.rf}, {"gt", a.gt}}, started);
}

struct ConvertArgs {
  std::string in;
  std::string out;
  std::string to;
  std::string image_size = "1280x720";
};

void cmd_convert(const ConvertArgs& a, const Logger& log) {
  const json doc = io::load_json(a.in);
  json result;
  if (a.to == "coco") {
    const auto x = a.image_size.find('x');
    int w = 0, h = 0;
    try {
      if (x == std::string::npos) throw std::invalid_argument("no separator");
      w = std::stoi(a.image_size.substr(0, x));
      h = std::stoi(a.image_size.substr(x + 1));
    } catch (const std::exception&) {
      throw ConfigError("convert: --image-size must look like 1280x720");
    }
    if (w <= 0 || h <= 0) throw ConfigError("convert: --image-size must be positive");
    result = io::frames_to_coco(io::frames_from_json(doc), w, h);
  } else {
    result = io::frames_to_json(io::frames_from_coco(doc));
  }
  io::write_file_atomic(a.out, io::dump(result));
  log->info("convert: wrote {}", a.out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("rflabel", sink);
  log->set_pattern("rflabel: %l: %v");
  log->set_level(level_from_env());

  CLI::App app{"RF labeling simulator and noisy-label emulation toolkit", "rflabel"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run the RF labeling pipeline on a scene");
  simulate->add_option("--config", sim.config, "scene JSON file or 'street'")->capture_default_str();
  simulate->add_option("--error-config", sim.error_config, "S0..S3 or error-config JSON")
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  simulate->add_flag("--no-noise", sim.no_noise, "disable ranging noise");
  simulate->add_flag("--beacon-log", sim.beacon_log, "write every beacon instead of burst means");
  simulate->add_option("--jobs", sim.jobs, "worker threads")->check(CLI::PositiveNumber);

  EmulateArgs emu;
  auto* emulate = app.add_subcommand("emulate", "inject localization noise into annotations");
  emulate->add_option("--annotations", emu.annotations, "annotation JSON")->required();
  emulate->add_option("--spec", emu.spec, "emulation spec JSON")->required();
  emulate->add_option("--out", emu.out, "output directory")->required();
  emulate->add_option("--seed", emu.seed, "overrides the seed in the --spec file");
  emulate->add_option("--mode", emu.mode, "angular | depth | both")
      ->check(CLI::IsMember({"angular", "depth", "both"}));
  emulate->add_option("--coverage", emu.coverage, "label keep probability");
  emulate->add_option("--jobs", emu.jobs, "worker threads")->check(CLI::PositiveNumber);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "fit gamma error models to quantile pairs");
  calibrate->add_option("--pair", cal.pairs, "NAME:MEDIAN_M:P95_M (repeatable)");
  calibrate->add_flag("--builtins", cal.builtins, "write the S0..S3 configurations");
  calibrate->add_option("--out", cal.out, "output directory")->required();

  FilterArgs fil;
  auto* filter = app.add_subcommand("filter", "drop labels with bad localization instances");
  filter->add_option("--annotations", fil.annotations, "annotation JSON")->required();
  filter->add_option("--fixes", fil.fixes, "fixes CSV")->required();
  filter->add_option("--events", fil.events, "occlusion events JSON");
  filter->add_option("--ranging", fil.ranging, "ranging CSV to detect occlusions from");
  filter->add_option("--out", fil.out, "output directory")->required();
  filter->add_option("--min-confidence", fil.criteria.min_confidence)->capture_default_str();
  filter->add_option("--speed-cap", fil.criteria.speed_cap, "m/s")->capture_default_str();

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "score RF annotations against ground truth");
  report->add_option("--rf", rep.rf, "RF annotation JSON")->required();
  report->add_option("--gt", rep.gt, "ground-truth annotation JSON")->required();
  report->add_option("--out", rep.out, "output directory")->required();
  report->add_option("--name", rep.name, "configuration name for the per-config breakdown");
  report->add_flag("--svg", rep.svg, "write IoU histogram and error scatter plots");
  report->add_flag("--csv", rep.csv, "write per-label errors");

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "annotation JSON <-> COCO-style JSON");
  convert->add_option("--in", conv.in, "input file")->required();
  convert->add_option("--out", conv.out, "output file")->required();
  convert->add_option("--to", conv.to, "coco | native")->required()->check(CLI::IsMember({"coco", "native"}));
  convert->add_option("--image-size", conv.image_size, "WxH for COCO images")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }

  try {
    if (*simulate) cmd_simulate(sim, log);
    if (*emulate) cmd_emulate(emu, log);
    if (*calibrate) cmd_calibrate(cal, log);
    if (*filter) cmd_filter(fil, log);
    if (*report) cmd_report(rep, log);
    if (*convert) cmd_convert(conv, log);
  } catch (const Error& e) {
    log->error("{}", e.what());
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    log->error("{}", e.what());
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return 1;
  }
  return 0;
}

}  // namespace rflabel::cli
