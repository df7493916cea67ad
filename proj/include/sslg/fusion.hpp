#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sslg/config.hpp"
#include "sslg/dataset_io.hpp"
#include "sslg/depth_pipeline.hpp"
#include "sslg/image.hpp"
#include "sslg/rgb_pipeline.hpp"
#include "sslg/vdisparity.hpp"

namespace sslg {

using FinalAnomalyMap = AnomalyMap;

/// M_A = alpha * R_f + (1 - alpha) * D_f.
inline FinalAnomalyMap fuse_anomaly_maps(const AnomalyMap& r_f, const AnomalyMap& d_f,
                                         double alpha) {
  require_same_shape(r_f, d_f, "RGB vs depth anomaly map");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  FinalAnomalyMap out(r_f.width(), r_f.height());
  const float a = static_cast<float>(alpha);
  const float one_minus_a = static_cast<float>(1.0 - alpha);
  auto rf = r_f.pixels();
  auto df = d_f.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a * rf[i] + one_minus_a * df[i];
  return out;
}

/// Per pixel: anomaly if M_A > kappa, else drivable if inside M_D, else
/// unknown. The comparison is strict.
inline LabelImage generate_label(const FinalAnomalyMap& m_a, const DrivableMask& m_d,
                                 double kappa) {
  require_same_shape(m_a, m_d, "final anomaly map vs drivable mask");
  LabelImage out(m_a.width(), m_a.height());
  auto a = m_a.pixels();
  auto d = m_d.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (static_cast<double>(a[i]) > kappa)
      dst[i] = to_u8(LabelClass::Anomaly);
    else if (d[i])
      dst[i] = to_u8(LabelClass::Drivable);
    else
      dst[i] = to_u8(LabelClass::Unknown);
  }
  return out;
}

/// Intermediate products kept for debug dumps.
struct PipelineMaps {
  VDisparityMap vdisparity;
  FilteredVDisparityMap filtered;
  DrivableMask drivable;
  Mask holes;
  AnomalyMap depth_original;   // D_o
  AnomalyMap depth_final;      // D_f
  AnomalyMap rgb_original;     // R_o
  AnomalyMap rgb_final;        // R_f
  FinalAnomalyMap fused;       // M_A
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct SslgResult {
  LabelImage label;
  std::vector<VDisparityLine> lines;  // classified
  std::vector<std::string> warnings;
  std::vector<StageTiming> timings;
  std::optional<PipelineMaps> maps;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}
  void lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_.push_back({std::move(stage),
                     std::chrono::duration<double, std::milli>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<StageTiming>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Full label generation for one RGB-D frame. Frames without a detectable
/// ground line produce an all-unknown label and a warning.
inline SslgResult run_sslg(const RgbImage& rgb, const DepthImage& depth,
                           const PipelineConfig& cfg, bool keep_maps = false) {
  require_same_shape(rgb, depth, "RGB vs depth image");
  SslgResult result;
  detail::StageClock clock(result.timings);

  const DisparityImage disparity = depth_to_disparity(depth, cfg.camera);
  VDisparityMap vdisp = build_v_disparity(disparity, cfg.bins, cfg.max_disparity());
  FilteredVDisparityMap filtered = filter_v_disparity(vdisp, cfg.ridge);
  std::vector<VDisparityLine> lines = extract_lines(filtered, cfg.hough);
  try {
    result.lines = classify_lines(std::move(lines), cfg.camera, cfg.min_anomaly_height);
  } catch (const NoGroundError& e) {
    result.warnings.emplace_back(e.what());
    result.label = LabelImage(rgb.width(), rgb.height(), to_u8(LabelClass::Unknown));
    clock.lap("vdisparity");
    if (keep_maps) {
      PipelineMaps maps;
      maps.vdisparity = std::move(vdisp);
      maps.filtered = std::move(filtered);
      result.maps = std::move(maps);
    }
    return result;
  }
  clock.lap("vdisparity");

  const VDisparityLine& drivable = *find_line(result.lines, LineKind::Drivable);
  std::vector<VDisparityLine> others, anomalies;
  for (const auto& l : result.lines) {
    if (l.kind != LineKind::Drivable) others.push_back(l);
    if (l.kind == LineKind::Anomaly) anomalies.push_back(l);
  }
  DrivableMask mask = extract_drivable_mask(disparity, drivable, cfg.tol, others);
  AnomalyMap d_o = extract_depth_anomalies(disparity, anomalies, cfg.tol, &drivable);
  Mask holes = find_holes(mask, cfg.min_hole_pixels);
  AnomalyMap d_f = finalize_depth_anomalies(d_o, holes);
  clock.lap("depth");

  AnomalyMap r_o = rgb_anomaly_map(rgb_to_lab(rgb), cfg.rgb);
  AnomalyMap r_f = finalize_rgb_anomalies(r_o, mask, holes);
  clock.lap("rgb");

  FinalAnomalyMap m_a = fuse_anomaly_maps(r_f, d_f, cfg.rgb.alpha);
  result.label = generate_label(m_a, mask, cfg.rgb.kappa);
  clock.lap("fusion");

  if (keep_maps)
    result.maps = PipelineMaps{std::move(vdisp), std::move(filtered), std::move(mask),
                               std::move(holes), std::move(d_o), std::move(d_f),
                               std::move(r_o), std::move(r_f), std::move(m_a)};
  return result;
}

}  // namespace sslg
