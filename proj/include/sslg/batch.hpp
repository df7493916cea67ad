#pragma once

// Batch front ends behind the `sslg` executable: label a dataset directory,
// evaluate label directories, synthesize scenes.
//
// Exit codes: 0 success, 1 per-file failures, 2 usage or config error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslg/config.hpp"
#include "sslg/dataset_io.hpp"
#include "sslg/evaluation.hpp"
#include "sslg/fusion.hpp"
#include "sslg/synth.hpp"

namespace sslg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

inline int default_jobs() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `fn(i)` for i in [0, n) on `jobs` threads. Work is handed out through
/// a shared counter; callers write results into per-index slots.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// label

enum class FrameStatus { Ok, Warning, Error };

inline const char* to_string(FrameStatus s) {
  switch (s) {
    case FrameStatus::Ok: return "ok";
    case FrameStatus::Warning: return "warning";
    default: return "error";
  }
}

struct FrameRecord {
  std::string name;
  FrameStatus status = FrameStatus::Ok;
  std::vector<std::string> messages;
  std::vector<StageTiming> timings;  // milliseconds
  double total_ms = 0.0;
};

struct RunManifest {
  PipelineConfig config;
  std::vector<FrameRecord> frames;
  int jobs = 1;

  std::size_t count(FrameStatus s) const {
    return static_cast<std::size_t>(std::count_if(
        frames.begin(), frames.end(), [&](const auto& f) { return f.status == s; }));
  }
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : m.config.entries()) cfg[k] = v;
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : m.frames) {
    nlohmann::json timing = nlohmann::json::object();
    for (const auto& t : f.timings) timing[t.stage] = t.ms;
    timing["total"] = f.total_ms;
    frames.push_back({{"name", f.name},
                      {"status", to_string(f.status)},
                      {"messages", f.messages},
                      {"timing_ms", timing}});
  }
  return {{"config", cfg},
          {"jobs", m.jobs},
          {"summary",
           {{"ok", m.count(FrameStatus::Ok)},
            {"warning", m.count(FrameStatus::Warning)},
            {"error", m.count(FrameStatus::Error)}}},
          {"frames", frames}};
}

struct LabelOptions {
  fs::path input;
  fs::path output;
  PipelineConfig config;
  int jobs = default_jobs();
  bool dump_vdisp = false;
  bool dump_depth_maps = false;
  bool dump_rgb_maps = false;
  bool dump_viz = false;

  bool any_dump() const { return dump_vdisp || dump_depth_maps || dump_rgb_maps || dump_viz; }
};

/// Grayscale v-disparity image (log-scaled counts, up to 200) with the
/// classified lines drawn at 255.
inline Image<std::uint8_t> render_vdisparity(const VDisparityMap& m,
                                             const std::vector<VDisparityLine>& lines) {
  Image<std::uint8_t> out(m.bins(), m.rows(), 0);
  double peak = 0.0;
  for (auto c : m.counts.pixels()) peak = std::max(peak, std::log1p(static_cast<double>(c)));
  if (peak > 0.0)
    for (int y = 0; y < m.rows(); ++y)
      for (int x = 0; x < m.bins(); ++x)
        out(x, y) = static_cast<std::uint8_t>(
            std::lround(200.0 * std::log1p(static_cast<double>(m.counts(x, y))) / peak));
  for (const auto& l : lines)
    for (int v = std::max(0, l.v_min); v <= std::min(m.rows() - 1, l.v_max); ++v) {
      const long x = std::lround(l.bin_at(v) - 0.5);
      if (x >= 0 && x < m.bins()) out(static_cast<int>(x), v) = 255;
    }
  return out;
}

inline void write_dumps(const LabelOptions& opt, const std::string& name,
                        const SslgResult& r) {
  const fs::path dbg = opt.output / "debug";
  const auto file = name + ".png";
  if (opt.dump_viz) write_rgb(colorize_label(r.label), dbg / "viz" / file);
  if (!r.maps) return;
  const PipelineMaps& m = *r.maps;
  if (opt.dump_vdisp) write_gray8(render_vdisparity(m.vdisparity, r.lines), dbg / "vdisp" / file);
  if (m.drivable.empty()) return;  // no ground found: only the map exists
  if (opt.dump_depth_maps) {
    write_mask(m.drivable, dbg / "drivable" / file);
    write_unit_map(m.depth_original, dbg / "depth_original" / file);
    write_unit_map(m.depth_final, dbg / "depth_final" / file);
  }
  if (opt.dump_rgb_maps) {
    AnomalyMap r_o = m.rgb_original;
    normalize_by_max(r_o);
    write_unit_map(r_o, dbg / "rgb_original" / file);
    write_unit_map(m.rgb_final, dbg / "rgb_final" / file);
  }
}

inline FrameRecord label_frame(const LabelOptions& opt, const FramePaths& frame) {
  using clock = std::chrono::steady_clock;
  FrameRecord rec{frame.name};
  const auto start = clock::now();
  auto lap_ms = [](clock::time_point since) {
    return std::chrono::duration<double, std::milli>(clock::now() - since).count();
  };
  try {
    auto t = clock::now();
    const auto [rgb, depth] = load_rgbd_pair(frame.rgb, frame.depth,
                                             static_cast<float>(opt.config.max_range));
    rec.timings.push_back({"load", lap_ms(t)});
    SslgResult r = run_sslg(rgb, depth, opt.config, opt.any_dump());
    rec.timings.insert(rec.timings.end(), r.timings.begin(), r.timings.end());
    t = clock::now();
    write_label(r.label, opt.output / "label" / (frame.name + ".png"));
    write_dumps(opt, frame.name, r);
    rec.timings.push_back({"write", lap_ms(t)});
    if (!r.warnings.empty()) {
      rec.status = FrameStatus::Warning;
      rec.messages = r.warnings;
    }
  } catch (const std::exception& e) {
    rec.status = FrameStatus::Error;
    rec.messages.push_back(e.what());
  }
  rec.total_ms = lap_ms(start);
  return rec;
}

/// Labels every rgb/depth pair under `opt.input`, writing `label/<name>.png`
/// and `manifest.json` under `opt.output`.
inline int cmd_label(const LabelOptions& opt, RunManifest* manifest_out = nullptr,
                     std::ostream& log = std::cerr) {
  FrameListing listing;
  try {
    opt.config.validate();
    listing = list_frames(opt.input);
    fs::create_directories(opt.output / "label");
  } catch (const std::exception& e) {
    log << "sslg label: " << e.what() << "\n";
    return kExitUsage;
  }

  RunManifest manifest{opt.config, {}, std::max(opt.jobs, 1)};
  manifest.frames.resize(listing.frames.size());
  parallel_for(listing.frames.size(), opt.jobs,
               [&](std::size_t i) { manifest.frames[i] = label_frame(opt, listing.frames[i]); });
  for (const auto& orphan : listing.orphans)
    manifest.frames.push_back({orphan, FrameStatus::Error,
                               {"missing rgb or depth counterpart"}, {}, 0.0});
  std::sort(manifest.frames.begin(), manifest.frames.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });

  for (const auto& f : manifest.frames)
    for (const auto& msg : f.messages) log << f.name << ": " << to_string(f.status) << ": " << msg << "\n";

  try {
    std::ofstream(opt.output / "manifest.json") << to_json(manifest).dump(2) << "\n";
  } catch (const std::exception& e) {
    log << "sslg label: cannot write manifest: " << e.what() << "\n";
    return kExitPartial;
  }
  const bool failed = manifest.count(FrameStatus::Error) > 0;
  if (manifest_out) *manifest_out = std::move(manifest);
  return failed ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// eval

/// Machine-readable companion of a text report: same path, `.json` extension.
inline fs::path json_report_path(const fs::path& report) {
  fs::path p = report;
  return p.replace_extension(".json");
}

inline int cmd_eval(const fs::path& gt_dir, const fs::path& pred_dir, const fs::path& report,
                    Aggregation aggregation = Aggregation::Global,
                    std::ostream& out = std::cout, std::ostream& log = std::cerr) {
  DatasetEvaluation e;
  try {
    e = evaluate_dataset(gt_dir, pred_dir, aggregation);
  } catch (const std::exception& ex) {
    log << "sslg eval: " << ex.what() << "\n";
    return kExitUsage;
  }
  std::string text = format_report_table(e.report);
  text += "images: " + std::to_string(e.images.size()) + ", aggregation: " +
          (aggregation == Aggregation::Global ? "global" : "per_image") + "\n";
  for (const auto& m : e.missing) text += "missing counterpart: " + m + "\n";
  for (const auto& m : e.errors) text += "error: " + m + "\n";
  out << text;
  try {
    if (report.has_parent_path()) fs::create_directories(report.parent_path());
    std::ofstream txt(report);
    std::ofstream json(json_report_path(report));
    if (!txt || !json) throw IoError("cannot write report " + report.string());
    txt << text;
    json << to_json(e, aggregation).dump(2) << "\n";
  } catch (const std::exception& ex) {
    log << "sslg eval: " << ex.what() << "\n";
    return kExitUsage;
  }
  return e.missing.empty() && e.errors.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// synth

inline std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05d", index);
  return buf;
}

inline std::uint64_t frame_seed(std::uint64_t seed, int index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Renders `count` frames into `output/{rgb,depth,label}`.
inline int cmd_synth(const fs::path& scene_path, const fs::path& output, int count,
                     std::uint64_t seed, std::ostream& log = std::cerr) {
  SceneFile scene;
  try {
    if (count < 0) throw ConfigError("count must be non-negative");
    scene = load_scene(scene_path);
  } catch (const std::exception& e) {
    log << "sslg synth: " << e.what() << "\n";
    return kExitUsage;
  }
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    const std::string name = frame_name(i) + ".png";
    try {
      const std::uint64_t s = frame_seed(seed, i);
      const RenderedScene r = render(scene_for_frame(scene, s, i), s);
      write_rgb(r.rgb, output / "rgb" / name);
      write_depth(r.depth, output / "depth" / name);
      write_label(r.truth, output / "label" / name);
    } catch (const std::exception& e) {
      log << "sslg synth: " << name << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures ? kExitPartial : kExitOk;
}

}  // namespace sslg
