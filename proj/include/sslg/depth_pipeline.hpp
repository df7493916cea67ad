#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sslg/image.hpp"
#include "sslg/vdisparity.hpp"

namespace sslg {

using DrivableMask = Mask;

namespace detail {

/// Distance in bins from a pixel's disparity to `line` at row v, or +inf when
/// the row lies outside the line's extent.
inline double bin_distance(const VDisparityLine& line, double x, int v) {
  if (!line.covers(v)) return std::numeric_limits<double>::infinity();
  return std::abs(x - line.bin_at(v));
}

}  // namespace detail

/// M_D: pixels whose disparity lies within `tol` bins of the drivable line at
/// their row. Pixels strictly closer to one of `competitors` (the other
/// classified lines) are left out, so no pixel is claimed by both the ground
/// and an anomaly.
inline DrivableMask extract_drivable_mask(
    const DisparityImage& disparity, const VDisparityLine& drivable, double tol,
    std::span<const VDisparityLine> competitors = {}) {
  DrivableMask mask(disparity.width(), disparity.height(), 0);
  const double inv_bw = 1.0 / drivable.bin_width;
  for (int v = 0; v < disparity.height(); ++v) {
    if (!drivable.covers(v)) continue;
    for (int u = 0; u < disparity.width(); ++u) {
      const float d = disparity(u, v);
      if (!(d > 0.0f)) continue;
      const double x = d * inv_bw;
      const double own = detail::bin_distance(drivable, x, v);
      if (own > tol) continue;
      const bool stolen = std::any_of(competitors.begin(), competitors.end(),
                                      [&](const VDisparityLine& c) {
                                        return detail::bin_distance(c, x, v) < own;
                                      });
      if (!stolen) mask(u, v) = 1;
    }
  }
  return mask;
}

/// D_o: 1 where a pixel lies within `tol` bins of any anomaly line, 0
/// elsewhere. When `drivable` is given, pixels at least as close to it as to
/// every anomaly line stay 0.
inline AnomalyMap extract_depth_anomalies(const DisparityImage& disparity,
                                          std::span<const VDisparityLine> anomaly_lines,
                                          double tol,
                                          const VDisparityLine* drivable = nullptr) {
  AnomalyMap out(disparity.width(), disparity.height(), 0.0f);
  if (anomaly_lines.empty()) return out;
  for (int v = 0; v < disparity.height(); ++v)
    for (int u = 0; u < disparity.width(); ++u) {
      const float d = disparity(u, v);
      if (!(d > 0.0f)) continue;
      const double x = d / anomaly_lines.front().bin_width;
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& l : anomaly_lines)
        nearest = std::min(nearest, detail::bin_distance(l, x, v));
      if (nearest > tol) continue;
      if (drivable && detail::bin_distance(*drivable, x, v) <= nearest) continue;
      out(u, v) = 1.0f;
    }
  return out;
}

/// Non-drivable pixels forming 4-connected components that do not touch the
/// image border; such components are enclosed by drivable pixels. Components
/// smaller than `min_pixels` are dropped.
inline Mask find_holes(const DrivableMask& mask, int min_pixels = 1) {
  const int w = mask.width(), h = mask.height();
  Mask holes(w, h, 0);
  Image<std::uint8_t> seen(w, h, 0);
  std::vector<std::pair<int, int>> stack, component;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      if (mask(sx, sy) || seen(sx, sy)) continue;
      bool touches_border = false;
      component.clear();
      stack.assign(1, {sx, sy});
      seen(sx, sy) = 1;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        component.emplace_back(x, y);
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) touches_border = true;
        constexpr int dx[] = {1, -1, 0, 0};
        constexpr int dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k], ny = y + dy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (mask(nx, ny) || seen(nx, ny)) continue;
          seen(nx, ny) = 1;
          stack.emplace_back(nx, ny);
        }
      }
      if (touches_border || static_cast<int>(component.size()) < min_pixels) continue;
      for (const auto& [x, y] : component) holes(x, y) = 1;
    }
  return holes;
}

/// D_f = normalize(max(D_o, holes)).
inline AnomalyMap finalize_depth_anomalies(const AnomalyMap& d_o, const Mask& holes) {
  require_same_shape(d_o, holes, "depth anomaly map vs hole map");
  AnomalyMap out(d_o.width(), d_o.height());
  for (int y = 0; y < d_o.height(); ++y)
    for (int x = 0; x < d_o.width(); ++x)
      out(x, y) = std::max(d_o(x, y), holes(x, y) ? 1.0f : 0.0f);
  normalize_by_max(out);
  return out;
}

}  // namespace sslg
