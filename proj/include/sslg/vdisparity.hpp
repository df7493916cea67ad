#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sslg/camera.hpp"
#include "sslg/gaussian.hpp"
#include "sslg/image.hpp"

namespace sslg {

/// Per-pixel disparity; 0 where the depth pixel was invalid.
using DisparityImage = Image<float>;

inline DisparityImage depth_to_disparity(const DepthImage& depth,
                                         const CameraModel& cam) {
  const double fb = cam.f * cam.b;
  DisparityImage out(depth.width(), depth.height(), 0.0f);
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      if (depth.valid(x, y))
        out(x, y) = static_cast<float>(fb / static_cast<double>(depth(x, y)));
  return out;
}

/// Row-indexed disparity histogram. Cell (k, v) counts the pixels of image
/// row v whose disparity falls in [k, k+1) * bin_width. In map coordinates a
/// disparity d sits at x = d / bin_width, so the center of bin k is k + 0.5.
struct VDisparityMap {
  Image<std::uint32_t> counts;  // width = bins, height = image rows
  double bin_width = 1.0;

  int rows() const { return counts.height(); }
  int bins() const { return counts.width(); }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts.pixels()) t += c;
    return t;
  }
};

inline VDisparityMap build_v_disparity(const DisparityImage& disparity, int bins,
                                       double max_disparity) {
  if (bins < 2) throw Error("v-disparity needs at least 2 bins");
  if (!(max_disparity > 0.0)) throw Error("max_disparity must be positive");
  VDisparityMap m{Image<std::uint32_t>(bins, disparity.height(), 0),
                  max_disparity / bins};
  for (int y = 0; y < disparity.height(); ++y)
    for (float d : disparity.row(y)) {
      if (!(d > 0.0f)) continue;
      // Disparities beyond the range (closer than z_min) land in the last bin.
      const int k = std::min(bins - 1, static_cast<int>(d / m.bin_width));
      ++m.counts(k, y);
    }
  return m;
}

struct FilteredVDisparityMap {
  Image<float> response;  // same grid as the source map
  double bin_width = 1.0;

  int rows() const { return response.height(); }
  int bins() const { return response.width(); }
};

struct RidgeFilterParams {
  double sigma = 1.0;  // bins
  // Filter log(1 + count) instead of raw counts so thin anomaly ridges are
  // not drowned by the side lobes of the much denser ground ridge.
  bool log_compress = true;
};

inline constexpr std::array<double, 6> kSteerAnglesDeg = {0, 30, 60, 90, 120, 150};

/// Steerable second-derivative-of-Gaussian ridge filter. For each orientation
/// the basis responses (Gxx, Gxy, Gyy) are steered to the second derivative
/// along that direction; the cell keeps the largest negated response, with
/// negative values clamped to zero, so bright ridges yield positive output.
inline FilteredVDisparityMap filter_v_disparity(const VDisparityMap& m,
                                                const RidgeFilterParams& p) {
  if (!(p.sigma > 0.0)) throw Error("ridge filter sigma must be positive");
  Image<float> input(m.bins(), m.rows());
  for (int y = 0; y < m.rows(); ++y)
    for (int x = 0; x < m.bins(); ++x) {
      const double c = m.counts(x, y);
      input(x, y) = static_cast<float>(p.log_compress ? std::log1p(c) : c);
    }

  const int radius = static_cast<int>(std::ceil(4.0 * p.sigma));
  const auto g0 = gaussian_kernel(p.sigma, radius);
  const auto g1 = gaussian_derivative_kernel(1, p.sigma, radius);
  const auto g2 = gaussian_derivative_kernel(2, p.sigma, radius);
  const Image<double> gxx = separable_filter(input, g2, g0, Border::Zero);
  const Image<double> gyy = separable_filter(input, g0, g2, Border::Zero);
  const Image<double> gxy = separable_filter(input, g1, g1, Border::Zero);

  std::array<std::array<double, 3>, kSteerAnglesDeg.size()> steer{};
  for (std::size_t i = 0; i < kSteerAnglesDeg.size(); ++i) {
    const double a = kSteerAnglesDeg[i] * std::numbers::pi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    steer[i] = {c * c, 2.0 * c * s, s * s};
  }

  FilteredVDisparityMap out{Image<float>(m.bins(), m.rows(), 0.0f), m.bin_width};
  for (int y = 0; y < m.rows(); ++y)
    for (int x = 0; x < m.bins(); ++x) {
      double best = 0.0;
      for (const auto& w : steer) {
        const double r = -(w[0] * gxx(x, y) + w[1] * gxy(x, y) + w[2] * gyy(x, y));
        best = std::max(best, r);
      }
      out.response(x, y) = static_cast<float>(best);
    }
  return out;
}

inline FilteredVDisparityMap filter_v_disparity(const VDisparityMap& m,
                                                double sigma) {
  return filter_v_disparity(m, RidgeFilterParams{sigma, true});
}

// ---------------------------------------------------------------------------
// Lines

enum class LineKind { Unclassified, Drivable, Infinity, Anomaly };

inline const char* to_string(LineKind k) {
  switch (k) {
    case LineKind::Drivable: return "drivable";
    case LineKind::Infinity: return "infinity";
    case LineKind::Anomaly: return "anomaly";
    default: return "unclassified";
  }
}

/// A straight segment of the v-disparity map, stored as bin coordinate as a
/// function of image row: x(v) = intercept + slope * v. Rows are the
/// independent variable because vertical planes give constant disparity,
/// which this form keeps finite.
struct VDisparityLine {
  double intercept = 0.0;  // bins at row 0
  double slope = 0.0;      // bins per row
  int v_min = 0;
  int v_max = 0;
  double support = 0.0;
  double bin_width = 1.0;
  LineKind kind = LineKind::Unclassified;

  double bin_at(double v) const { return intercept + slope * v; }
  double disparity_at(double v) const { return bin_at(v) * bin_width; }
  bool covers(int v) const { return v >= v_min && v <= v_max; }
  int row_extent() const { return v_max - v_min + 1; }
  double mean_disparity() const { return disparity_at(0.5 * (v_min + v_max)); }

  /// Row at which the line reaches zero disparity (the horizon for a ground
  /// line); infinite for constant-disparity lines.
  double v_intercept() const {
    return slope == 0.0 ? std::numeric_limits<double>::infinity()
                        : -intercept / slope;
  }
};

struct HoughParams {
  double angle_step_deg = 1.0;
  double max_angle_deg = 80.0;   // |normal angle| limit; 0 deg = constant disparity
  double rho_step = 1.0;         // cells
  float response_floor = 0.25f;  // cells at or below this do not vote
  int min_votes = 30;
  double inlier_distance = 1.5;  // cells, perpendicular to the line
  int max_row_gap = 4;           // rows allowed between inliers of one segment
  int max_lines = 12;
};

namespace detail {

struct RidgeCell {
  double x, y, w;
};

struct LineFit {
  double intercept = 0.0, slope = 0.0;
  bool ok = false;
};

inline LineFit fit_x_of_y(const std::vector<RidgeCell>& cells,
                          const std::vector<int>& idx) {
  double sw = 0, sy = 0, sx = 0, syy = 0, sxy = 0;
  for (int i : idx) {
    const auto& c = cells[i];
    sw += c.w;
    sy += c.w * c.y;
    sx += c.w * c.x;
    syy += c.w * c.y * c.y;
    sxy += c.w * c.x * c.y;
  }
  LineFit f;
  if (sw <= 0.0) return f;
  const double my = sy / sw, mx = sx / sw;
  const double vyy = syy / sw - my * my;
  const double vxy = sxy / sw - mx * my;
  f.slope = vyy > 1e-12 ? vxy / vyy : 0.0;
  f.intercept = mx - f.slope * my;
  f.ok = true;
  return f;
}

/// Keeps the heaviest run of inliers whose consecutive rows differ by at most
/// `max_gap + 1`.
inline std::vector<int> heaviest_run(const std::vector<RidgeCell>& cells,
                                     std::vector<int> idx, int max_gap) {
  if (idx.empty()) return idx;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return cells[a].y < cells[b].y; });
  std::size_t best_begin = 0, best_end = 0, begin = 0;
  double best_w = -1.0, run_w = 0.0;
  for (std::size_t i = 0; i <= idx.size(); ++i) {
    const bool breaks = i == idx.size() ||
                        (i > 0 && cells[idx[i]].y - cells[idx[i - 1]].y > max_gap + 1);
    if (breaks) {
      if (run_w > best_w) {
        best_w = run_w;
        best_begin = begin;
        best_end = i;
      }
      begin = i;
      run_w = 0.0;
    }
    if (i < idx.size()) run_w += cells[idx[i]].w;
  }
  return {idx.begin() + best_begin, idx.begin() + best_end};
}

}  // namespace detail

/// Extracts straight ridges from the filtered map with a (angle, distance)
/// Hough accumulator. Peaks are taken greedily: the strongest accumulator
/// cell is refined by a response-weighted least-squares fit over its inlier
/// cells, those cells withdraw their votes, and the search repeats. Lines are
/// returned sorted by support (summed response of inliers), descending.
inline std::vector<VDisparityLine> extract_lines(const FilteredVDisparityMap& fm,
                                                 const HoughParams& hp = {}) {
  using detail::RidgeCell;
  std::vector<RidgeCell> cells;
  for (int y = 0; y < fm.rows(); ++y)
    for (int x = 0; x < fm.bins(); ++x)
      if (const float r = fm.response(x, y); r > hp.response_floor)
        cells.push_back({x + 0.5, static_cast<double>(y), r});
  if (cells.empty()) return {};

  const int n_angles =
      static_cast<int>(std::floor(2.0 * hp.max_angle_deg / hp.angle_step_deg)) + 1;
  std::vector<double> cos_t(n_angles), sin_t(n_angles);
  for (int a = 0; a < n_angles; ++a) {
    const double deg = -hp.max_angle_deg + a * hp.angle_step_deg;
    cos_t[a] = std::cos(deg * std::numbers::pi / 180.0);
    sin_t[a] = std::sin(deg * std::numbers::pi / 180.0);
  }
  const double rho_max = std::hypot(fm.bins() + 1.0, fm.rows() + 1.0);
  const int n_rho = static_cast<int>(std::ceil(2.0 * rho_max / hp.rho_step)) + 1;
  std::vector<std::int32_t> acc(static_cast<std::size_t>(n_angles) * n_rho, 0);
  auto rho_index = [&](const RidgeCell& c, int a) {
    const double rho = c.x * cos_t[a] + c.y * sin_t[a];
    return static_cast<int>(std::lround((rho + rho_max) / hp.rho_step));
  };
  auto vote = [&](int i, int delta) {
    for (int a = 0; a < n_angles; ++a)
      acc[static_cast<std::size_t>(a) * n_rho + rho_index(cells[i], a)] += delta;
  };
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) vote(i, +1);

  std::vector<char> alive(cells.size(), 1);
  std::vector<VDisparityLine> lines;
  const int max_iterations = 4 * hp.max_lines + 8;
  for (int iter = 0; iter < max_iterations &&
                     static_cast<int>(lines.size()) < hp.max_lines;
       ++iter) {
    const auto peak = std::max_element(acc.begin(), acc.end());
    if (*peak < hp.min_votes) break;
    const auto flat = static_cast<std::size_t>(peak - acc.begin());
    const int a = static_cast<int>(flat / n_rho);
    const double rho = static_cast<double>(flat % n_rho) * hp.rho_step - rho_max;

    std::vector<int> inliers;
    for (int i = 0; i < static_cast<int>(cells.size()); ++i)
      if (alive[i] &&
          std::abs(cells[i].x * cos_t[a] + cells[i].y * sin_t[a] - rho) <=
              hp.inlier_distance)
        inliers.push_back(i);

    // Refine in x(v) form; perpendicular distance uses the fitted slope.
    detail::LineFit fit = detail::fit_x_of_y(cells, inliers);
    for (int pass = 0; pass < 2 && fit.ok; ++pass) {
      const double norm = std::sqrt(1.0 + fit.slope * fit.slope);
      std::vector<int> next;
      for (int i = 0; i < static_cast<int>(cells.size()); ++i)
        if (alive[i] && std::abs(cells[i].x - (fit.intercept + fit.slope * cells[i].y)) /
                                norm <=
                            hp.inlier_distance)
          next.push_back(i);
      next = detail::heaviest_run(cells, std::move(next), hp.max_row_gap);
      if (next.empty()) break;
      inliers = std::move(next);
      fit = detail::fit_x_of_y(cells, inliers);
    }
    if (inliers.empty()) {
      // Nothing alive explains this peak any more; retire it.
      *peak = 0;
      continue;
    }

    VDisparityLine line;
    line.intercept = fit.intercept;
    line.slope = fit.slope;
    line.bin_width = fm.bin_width;
    line.v_min = std::numeric_limits<int>::max();
    line.v_max = std::numeric_limits<int>::min();
    for (int i : inliers) {
      const int v = static_cast<int>(cells[i].y);
      line.v_min = std::min(line.v_min, v);
      line.v_max = std::max(line.v_max, v);
      line.support += cells[i].w;
      alive[i] = 0;
      vote(i, -1);
    }
    if (static_cast<int>(inliers.size()) >= hp.min_votes && fit.ok)
      lines.push_back(line);
  }

  std::stable_sort(lines.begin(), lines.end(),
                   [](const auto& l, const auto& r) { return l.support > r.support; });
  return lines;
}

// ---------------------------------------------------------------------------
// Classification

class NoGroundError : public Error {
 public:
  NoGroundError() : Error("no ground structure found in v-disparity map") {}
};

inline constexpr int kFallbackMinAnomalyRows = 8;

/// Image rows spanned by one meter of vertical extent at disparity
/// `disparity`, for an object standing on the ground plane described by the
/// drivable line.
inline double rows_per_meter(const CameraModel& cam, const VDisparityLine& drivable,
                             double disparity) {
  const double z_cam = cam.f * cam.b / disparity;
  const double ground_slope = drivable.slope * drivable.bin_width;  // disparity per row
  double forward = z_cam;
  if (ground_slope > 0.0) {
    // Ground height from the line slope: d(disparity)/dV = b cos(theta) / m.
    const double height = cam.b * std::cos(cam.theta) / ground_slope;
    forward = (z_cam - height * std::sin(cam.theta)) / std::cos(cam.theta);
  }
  return disparity / cam.b * std::max(forward, 0.0) / z_cam;
}

/// Labels the strongest line Drivable (ties: larger row extent), the line
/// with the smallest mean disparity among the rest Infinity, and keeps the
/// remaining lines as Anomaly only if their row extent corresponds to at
/// least `min_anomaly_height` meters. Without a camera a fixed minimum of
/// kFallbackMinAnomalyRows rows applies.
inline std::vector<VDisparityLine> classify_lines(
    std::vector<VDisparityLine> lines, const std::optional<CameraModel>& cam,
    double min_anomaly_height = 0.05) {
  if (lines.empty()) throw NoGroundError();
  auto dominant = std::max_element(lines.begin(), lines.end(), [](const auto& l, const auto& r) {
    if (l.support != r.support) return l.support < r.support;
    return l.row_extent() < r.row_extent();
  });
  VDisparityLine drivable = *dominant;
  drivable.kind = LineKind::Drivable;
  lines.erase(dominant);

  std::vector<VDisparityLine> out{drivable};
  if (lines.empty()) return out;

  auto farthest = std::min_element(lines.begin(), lines.end(), [](const auto& l, const auto& r) {
    return l.mean_disparity() < r.mean_disparity();
  });
  VDisparityLine infinity = *farthest;
  infinity.kind = LineKind::Infinity;
  lines.erase(farthest);
  out.push_back(infinity);

  std::sort(lines.begin(), lines.end(),
            [](const auto& l, const auto& r) { return l.support > r.support; });
  for (auto& l : lines) {
    double min_rows = kFallbackMinAnomalyRows;
    if (cam) {
      const double base_disparity = l.disparity_at(l.v_max);
      if (base_disparity <= 0.0) continue;
      min_rows = min_anomaly_height * rows_per_meter(*cam, drivable, base_disparity);
    }
    if (l.row_extent() < min_rows) continue;
    l.kind = LineKind::Anomaly;
    out.push_back(l);
  }
  return out;
}

inline const VDisparityLine* find_line(const std::vector<VDisparityLine>& lines,
                                       LineKind kind) {
  for (const auto& l : lines)
    if (l.kind == kind) return &l;
  return nullptr;
}

/// Disparity range covered by the default binning: [0, f b / z_min].
inline double max_disparity_for(const CameraModel& cam, double min_depth) {
  return cam.f * cam.b / min_depth;
}

}  // namespace sslg
