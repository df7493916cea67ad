#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "sslg/batch.hpp"
#include "test_support.hpp"

using namespace sslg;
using sslg::fixtures::TempDir;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

SceneSpec small_scene(int i) {
  auto spec = fixtures::half_res_scene(0.03 + 0.01 * i);
  spec.backdrop_distance = 8.5;
  spec.boxes = random_boxes(spec, {.count = 2}, 100 + i);
  return spec;
}

/// rgb/ depth/ label/ for three frames.
void write_dataset(const fs::path& root, int frames = 3) {
  for (int i = 0; i < frames; ++i) {
    const auto r = render(small_scene(i), i);
    const std::string name = frame_name(i) + ".png";
    write_rgb(r.rgb, root / "rgb" / name);
    write_depth(r.depth, root / "depth" / name);
    write_label(r.truth, root / "label" / name);
  }
}

LabelOptions options(const fs::path& in, const fs::path& out, int jobs = 1) {
  LabelOptions opt;
  opt.input = in;
  opt.output = out;
  opt.config = fixtures::config_for(small_scene(0));
  opt.jobs = jobs;
  return opt;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SSLG_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CmdLabel, LabelsEveryFrameAndWritesManifest) {
  TempDir dir;
  write_dataset(dir / "data");
  std::ostringstream log;
  RunManifest manifest;
  EXPECT_EQ(cmd_label(options(dir / "data", dir / "out"), &manifest, log), kExitOk) << log.str();
  EXPECT_EQ(manifest.frames.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    const auto l = read_label(dir / "out" / "label" / (frame_name(i) + ".png"));
    EXPECT_EQ(l.width(), 640);
  }
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(j["summary"]["ok"], 3);
  EXPECT_EQ(j["frames"].size(), 3u);
  EXPECT_TRUE(j["frames"][0]["timing_ms"].contains("rgb"));
  EXPECT_EQ(j["config"]["focal_length"], "320");
}

TEST(CmdLabel, CorruptFrameIsRecordedAndOthersFinish) {
  TempDir dir;
  write_dataset(dir / "data");
  std::ofstream(dir / "data" / "depth" / (frame_name(1) + ".png")) << "garbage";
  write_rgb(RgbImage(4, 4), dir / "data" / "rgb" / "orphan.png");
  RunManifest manifest;
  std::ostringstream log;
  EXPECT_EQ(cmd_label(options(dir / "data", dir / "out"), &manifest, log), kExitPartial);
  EXPECT_EQ(manifest.count(FrameStatus::Error), 2u);
  EXPECT_TRUE(fs::exists(dir / "out" / "label" / (frame_name(0) + ".png")));
  EXPECT_FALSE(fs::exists(dir / "out" / "label" / (frame_name(1) + ".png")));
  EXPECT_TRUE(fs::exists(dir / "out" / "label" / (frame_name(2) + ".png")));
  EXPECT_NE(log.str().find(frame_name(1)), std::string::npos);
}

TEST(CmdLabel, ResultsDoNotDependOnRunOrThreads) {
  TempDir dir;
  write_dataset(dir / "data");
  std::ostringstream log;
  ASSERT_EQ(cmd_label(options(dir / "data", dir / "a", 1), nullptr, log), kExitOk);
  ASSERT_EQ(cmd_label(options(dir / "data", dir / "b", 3), nullptr, log), kExitOk);
  for (int i = 0; i < 3; ++i) {
    const std::string name = frame_name(i) + ".png";
    EXPECT_EQ(slurp(dir / "a" / "label" / name), slurp(dir / "b" / "label" / name));
  }
}

TEST(CmdLabel, DumpsDebugMaps) {
  TempDir dir;
  write_dataset(dir / "data", 1);
  auto opt = options(dir / "data", dir / "out");
  opt.dump_vdisp = opt.dump_depth_maps = opt.dump_rgb_maps = opt.dump_viz = true;
  std::ostringstream log;
  ASSERT_EQ(cmd_label(opt, nullptr, log), kExitOk);
  for (const char* sub : {"viz", "vdisp", "drivable", "depth_original", "depth_final",
                          "rgb_original", "rgb_final"})
    EXPECT_TRUE(fs::exists(dir / "out" / "debug" / sub / (frame_name(0) + ".png"))) << sub;
  EXPECT_EQ(read_gray8(dir / "out" / "debug" / "vdisp" / (frame_name(0) + ".png")).width(), 256);
}

TEST(CmdLabel, BadInputDirectoryIsUsageError) {
  TempDir dir;
  std::ostringstream log;
  EXPECT_EQ(cmd_label(options(dir / "missing", dir / "out"), nullptr, log), kExitUsage);
}

TEST(CmdEval, IdenticalDirectoriesScorePerfect) {
  TempDir dir;
  write_dataset(dir / "data");
  std::ostringstream out, log;
  EXPECT_EQ(cmd_eval(dir / "data", dir / "data" / "label", dir / "r" / "report.txt",
                     Aggregation::Global, out, log),
            kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "r" / "report.json"));
  EXPECT_DOUBLE_EQ(j["metrics"]["drivable"]["iou"].get<double>(), 100.0);
  EXPECT_DOUBLE_EQ(j["metrics"]["anomaly"]["iou"].get<double>(), 100.0);
  EXPECT_EQ(slurp(dir / "r" / "report.txt"), out.str());
}

TEST(CmdEval, LabelThenEvalScoresWell) {
  TempDir dir;
  write_dataset(dir / "data");
  std::ostringstream out, log;
  ASSERT_EQ(cmd_label(options(dir / "data", dir / "pred"), nullptr, log), kExitOk);
  ASSERT_EQ(cmd_eval(dir / "data", dir / "pred", dir / "report.txt", Aggregation::Global, out, log),
            kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_GT(j["metrics"]["drivable"]["iou"].get<double>(), 85.0);
}

TEST(CmdEval, MissingPredictionsArePartialFailure) {
  TempDir dir;
  write_dataset(dir / "data", 2);
  fs::create_directories(dir / "pred");
  fs::copy_file(dir / "data" / "label" / (frame_name(0) + ".png"),
                dir / "pred" / (frame_name(0) + ".png"));
  std::ostringstream out, log;
  EXPECT_EQ(cmd_eval(dir / "data", dir / "pred", dir / "report.txt", Aggregation::Global, out, log),
            kExitPartial);
  EXPECT_NE(out.str().find("missing counterpart: " + frame_name(1)), std::string::npos);
}

TEST(CmdSynth, DeterministicCountAndLayout) {
  TempDir dir;
  const fs::path scene = SSLG_CONFIG_DIR "/scene_random.cfg";
  std::ostringstream log;
  ASSERT_EQ(cmd_synth(scene, dir / "a", 2, 7, log), kExitOk) << log.str();
  ASSERT_EQ(cmd_synth(scene, dir / "b", 2, 7, log), kExitOk);
  ASSERT_EQ(cmd_synth(scene, dir / "c", 1, 8, log), kExitOk);
  for (const char* sub : {"rgb", "depth", "label"}) {
    EXPECT_EQ(png_basenames(dir / "a" / sub).size(), 2u);
    for (int i = 0; i < 2; ++i) {
      const std::string name = frame_name(i) + ".png";
      EXPECT_EQ(slurp(dir / "a" / sub / name), slurp(dir / "b" / sub / name)) << sub;
    }
  }
  EXPECT_NE(slurp(dir / "a" / "depth" / (frame_name(0) + ".png")),
            slurp(dir / "c" / "depth" / (frame_name(0) + ".png")));
}

TEST(CmdSynth, CameraBelowGroundIsConfigError) {
  TempDir dir;
  std::ofstream(dir / "bad.cfg") << "width = 64\nheight = 48\nground_height = -1.0\n";
  std::ostringstream log;
  EXPECT_EQ(cmd_synth(dir / "bad.cfg", dir / "out", 1, 0, log), kExitUsage);
  EXPECT_FALSE(fs::exists(dir / "out" / "rgb"));
}

TEST(Binary, SubcommandsAndExitCodes) {
  TempDir dir;
  const std::string d = dir.path().string();
  std::ofstream(dir / "scene.cfg") << "width = 320\nheight = 180\nfocal_length = 160\n"
                                      "pitch = 0.04\nbackdrop_distance = 8\n"
                                      "box = -0.3 3 0.3 3.3 0.3 200 30 30\n";
  std::ofstream(dir / "pipeline.cfg") << "config_version = 1\nfocal_length = 160\nu0 = 160\n"
                                         "v0 = 90\npitch = 0.04\n";
  EXPECT_EQ(run("synth --scene " + d + "/scene.cfg --output " + d + "/data --count 2 --seed 3"), 0);
  EXPECT_EQ(run("label --input " + d + "/data --output " + d + "/out --config " + d +
                "/pipeline.cfg --jobs 2 --dump-viz"),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "debug" / "viz" / (frame_name(1) + ".png")));
  EXPECT_EQ(run("eval --gt " + d + "/data --pred " + d + "/out --report " + d + "/rep.txt"), 0);
  EXPECT_TRUE(fs::exists(dir / "rep.json"));

  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("label --input " + d + "/data --output " + d + "/o2"), 2);
  EXPECT_EQ(run("label --input " + d + "/data --output " + d + "/o2 --config " + d + "/none.cfg"), 2);
  EXPECT_EQ(run("label --input " + d + "/data --output " + d + "/o2 --config " + d +
                "/pipeline.cfg --alpha 3"),
            2);
  EXPECT_EQ(run("synth --scene " + d + "/none.cfg --output " + d + "/x"), 2);
}
