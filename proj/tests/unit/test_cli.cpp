#include <algorithm>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "rflabel/cli.hpp"
#include "rflabel/io.hpp"

using namespace rflabel;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run rflabel_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rflabel");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rflabel_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

// A thousand unclipped boxes for the default camera, written as annotation JSON.
fs::path write_synthetic_annotations(const fs::path& dir) {
  const CameraModel cam;
  Rng rng(1);
  std::vector<Frame> frames;
  for (int f = 0; f < 100; ++f) {
    Frame fr{"img" + std::to_string(f), "default", f * 0.1, {}};
    while (fr.labels.size() < 10) {
      const double z = rng.uniform(8.0, 30.0);
      const BoundingBox b = render_body(cam, {{rng.uniform(-0.2, 0.2) * z, 1.5, z}, 1.76}, 0.41);
      if (b.clipped) continue;
      Label l;
      l.bbox = b;
      l.provenance = Provenance::EmulatedHuman;
      fr.labels.push_back(l);
    }
    frames.push_back(fr);
  }
  const fs::path p = dir / "annotations.json";
  io::write_file_atomic(p, io::dump(io::frames_to_json(frames)));
  return p;
}

fs::path write_spec(const fs::path& dir, const std::string& config, double p) {
  const io::json spec = {{"error_config", config},
                         {"coverage_p", p},
                         {"mode", "both"},
                         {"seed", 4},
                         {"camera", io::camera_to_json(CameraModel{})}};
  const fs::path path = dir / ("spec_" + config + "_" + std::to_string(p) + ".json");
  io::write_file_atomic(path, io::dump(spec));
  return path;
}

}  // namespace

TEST_CASE("cli: help, version and argument errors") {
  CHECK(rflabel_cli({"--help"}).code == 0);
  const Run v = rflabel_cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(cli::kVersion) != std::string::npos);
  CHECK(rflabel_cli({}).code == 2);
  CHECK(rflabel_cli({"frobnicate"}).code == 2);
  CHECK(rflabel_cli({"simulate"}).code == 2);  // --out is required
  CHECK(rflabel_cli({"convert", "--in", "a", "--out", "b", "--to", "xml"}).code == 2);
}

TEST_CASE("cli: simulate writes every artifact deterministically") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b"), c = scratch("sim_c");
  REQUIRE(rflabel_cli({"simulate", "--out", a.string(), "--seed", "9", "--jobs", "1"}).code == 0);
  REQUIRE(rflabel_cli({"simulate", "--out", b.string(), "--seed", "9", "--jobs", "4"}).code == 0);
  REQUIRE(rflabel_cli({"simulate", "--out", c.string(), "--seed", "10"}).code == 0);
  for (const char* f : {"ranging.csv", "fixes.csv", "gt_annotations.json", "rf_annotations.json",
                        "occlusion_events.json", "quality_report.json", "manifest.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
  }
  for (const char* f : {"ranging.csv", "fixes.csv", "gt_annotations.json", "rf_annotations.json",
                        "occlusion_events.json", "quality_report.json"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "rf_annotations.json") != slurp(c / "rf_annotations.json"));

  // Files parse with their own readers.
  CHECK_NOTHROW(io::ranging_from_csv(slurp(a / "ranging.csv")));
  CHECK_NOTHROW(io::fixes_from_csv(slurp(a / "fixes.csv")));
  CHECK_FALSE(io::frames_from_json(io::load_json(a / "rf_annotations.json")).empty());
  CHECK_NOTHROW(io::events_from_json(io::load_json(a / "occlusion_events.json")));
  const io::json manifest = io::load_json(a / "manifest.json");
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 9);
  CHECK(manifest["tool_version"] == cli::kVersion);
  bool listed = false;
  for (const auto& o : manifest["outputs"]) listed = listed || o["path"] == "rf_annotations.json";
  CHECK(listed);
  CHECK(manifest["config_digest"] == io::load_json(b / "manifest.json")["config_digest"]);
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("cli: noiseless simulation labels match ground truth closely") {
  const fs::path d = scratch("sim_clean");
  REQUIRE(rflabel_cli({"simulate", "--out", d.string(), "--no-noise"}).code == 0);
  const io::json report = io::load_json(d / "quality_report.json");
  CHECK(report["mean_iou"].get<double>() >= 0.7);
  fs::remove_all(d);
}

TEST_CASE("cli: simulate configuration and file errors") {
  const fs::path d = scratch("sim_err");
  const Run missing = rflabel_cli({"simulate", "--config", (d / "none.json").string(), "--out", d.string()});
  CHECK(missing.code == 3);
  CHECK(missing.err.find("none.json") != std::string::npos);
  io::write_file_atomic(d / "bad.json", "{\"cameras\": 3}");
  CHECK(rflabel_cli({"simulate", "--config", (d / "bad.json").string(), "--out", d.string()}).code == 2);
  CHECK(rflabel_cli({"simulate", "--error-config", "S7", "--out", d.string()}).code == 3);
  fs::remove_all(d);
}

TEST_CASE("cli: emulate") {
  const fs::path d = scratch("emu");
  const fs::path ann = write_synthetic_annotations(d);
  const fs::path spec = write_spec(d, "S0", 1.0);
  const Run r1 = rflabel_cli({"emulate", "--annotations", ann.string(), "--spec", spec.string(), "--out", (d / "o1").string(), "--jobs", "1"});
  REQUIRE(r1.code == 0);
  const Run r2 = rflabel_cli({"emulate", "--annotations", ann.string(), "--spec", spec.string(), "--out", (d / "o2").string(), "--jobs", "3"});
  REQUIRE(r2.code == 0);
  CHECK(slurp(d / "o1" / "annotations.json") == slurp(d / "o2" / "annotations.json"));
  const io::json rep = io::load_json(d / "o1" / "emulation_report.json");
  CHECK(rep["input_labels"] == 1000);
  CHECK(rep.contains("iou"));
  CHECK(rep["iou"]["mean"].get<double>() > 0.0);

  const Run empty = rflabel_cli({"emulate", "--annotations", ann.string(), "--spec", write_spec(d, "S1", 0.0).string(), "--out", (d / "o3").string()});
  CHECK(empty.code == 0);
  CHECK(empty.err.find("warn") != std::string::npos);
  std::size_t labels = 0;
  for (const Frame& f : io::frames_from_json(io::load_json(d / "o3" / "annotations.json"))) labels += f.labels.size();
  CHECK(labels == 0);

  CHECK(rflabel_cli({"emulate", "--annotations", ann.string(), "--spec", spec.string(), "--out", (d / "o4").string(), "--coverage", "1.5"}).code == 2);
  CHECK(rflabel_cli({"emulate", "--annotations", (d / "nope.json").string(), "--spec", spec.string(), "--out", (d / "o5").string()}).code == 3);
  fs::remove_all(d);
}

TEST_CASE("cli: calibrate") {
  const fs::path d = scratch("cal");
  REQUIRE(rflabel_cli({"calibrate", "--builtins", "--out", d.string()}).code == 0);
  for (const auto& name : builtin_error_config_names()) {
    const ErrorConfig c = io::load_error_config((d / (name + ".json")).string());
    Rng rng(5);
    std::vector<double> v;
    for (int i = 0; i < 100000; ++i) v.push_back(norm(sample_localization_error(c, rng)));
    std::sort(v.begin(), v.end());
    CHECK(v[50000] == doctest::Approx(c.target_median).epsilon(0.03));
    CHECK(v[95000] == doctest::Approx(c.target_p95).epsilon(0.03));
  }
  const fs::path one = scratch("cal_one");
  REQUIRE(rflabel_cli({"calibrate", "--pair", "custom:0.5:1.2", "--out", one.string()}).code == 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(one)) files += e.path().filename() != "manifest.json";
  CHECK(files == 1);
  CHECK(fs::exists(one / "custom.json"));

  const Run bad = rflabel_cli({"calibrate", "--pair", "oops:1.2:0.5", "--out", one.string()});
  CHECK(bad.code == 4);
  CHECK(bad.err.find("p95") != std::string::npos);
  CHECK(rflabel_cli({"calibrate", "--pair", "broken", "--out", one.string()}).code == 2);
  fs::remove_all(d);
  fs::remove_all(one);
}

TEST_CASE("cli: report, filter and convert on simulate output") {
  const fs::path d = scratch("post");
  REQUIRE(rflabel_cli({"simulate", "--out", (d / "sim").string(), "--seed", "3"}).code == 0);
  const std::string rf = (d / "sim" / "rf_annotations.json").string();
  const std::string gt = (d / "sim" / "gt_annotations.json").string();

  REQUIRE(rflabel_cli({"report", "--rf", rf, "--gt", gt, "--out", (d / "rep").string(), "--svg", "--csv", "--name", "S0"}).code == 0);
  const io::json rep = io::load_json(d / "rep" / "quality_report.json");
  CHECK(rep["label_precision"].get<double>() <= 1.0);
  CHECK(rep["per_config"].contains("S0"));
  CHECK(slurp(d / "rep" / "iou_histogram.svg").find("<svg") != std::string::npos);
  CHECK(fs::exists(d / "rep" / "error_scatter.svg"));
  CHECK(slurp(d / "rep" / "label_errors.csv").rfind("frame_id", 0) == 0);

  REQUIRE(rflabel_cli({"filter", "--annotations", rf, "--fixes", (d / "sim" / "fixes.csv").string(),
                       "--events", (d / "sim" / "occlusion_events.json").string(), "--out", (d / "fil").string()}).code == 0);
  const io::json stats = io::load_json(d / "fil" / "filter_stats.json");
  CHECK(stats["examined"].get<int>() > 0);
  CHECK(stats.contains("removed_occlusion"));
  CHECK(fs::exists(d / "fil" / "filtered_annotations.json"));
  REQUIRE(rflabel_cli({"filter", "--annotations", rf, "--fixes", (d / "sim" / "fixes.csv").string(),
                       "--ranging", (d / "sim" / "ranging.csv").string(), "--out", (d / "fil2").string()}).code == 0);
  CHECK(rflabel_cli({"filter", "--annotations", rf, "--fixes", (d / "missing.csv").string(), "--out", (d / "fil3").string()}).code == 3);

  REQUIRE(rflabel_cli({"convert", "--in", rf, "--out", (d / "coco.json").string(), "--to", "coco"}).code == 0);
  REQUIRE(rflabel_cli({"convert", "--in", (d / "coco.json").string(), "--out", (d / "native.json").string(), "--to", "native"}).code == 0);
  CHECK(io::frames_from_json(io::load_json(d / "native.json")) == io::frames_from_json(io::load_json(rf)));
  CHECK(rflabel_cli({"convert", "--in", rf, "--out", (d / "x.json").string(), "--to", "coco", "--image-size", "huge"}).code == 2);

  const Run missing = rflabel_cli({"report", "--rf", (d / "none.json").string(), "--gt", gt, "--out", (d / "r2").string()});
  CHECK(missing.code == 3);
  CHECK_FALSE(missing.err.empty());
  fs::remove_all(d);
}
