#pragma once

#include <array>
#include <cmath>
#include <span>

#include "sslg/depth_pipeline.hpp"
#include "sslg/gaussian.hpp"
#include "sslg/image.hpp"

namespace sslg {

/// Planar CIELAB image (D65): l in [0, 100], a and b roughly [-128, 127].
struct LabImage {
  Image<double> l, a, b;

  int width() const { return l.width(); }
  int height() const { return l.height(); }
};

struct RgbAnomalyConfig {
  double sigma_s = 12.0;  // blur scale divisor
  double alpha = 0.5;     // RGB weight in the fused anomaly map
  double kappa = 0.3;     // anomaly threshold on the fused map

  void validate() const {
    if (!(sigma_s > 0.0)) throw Error("sigma_s must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
    if (!(kappa > 0.0 && kappa < 1.0)) throw Error("kappa must lie in (0, 1)");
  }

  /// Blur standard deviation for an h x w image: min(h, w) / sigma_s.
  double blur_sigma(int height, int width) const {
    return static_cast<double>(std::min(height, width)) / sigma_s;
  }
};

namespace detail {

inline const std::array<double, 256>& srgb_to_linear_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return t;
  }();
  return table;
}

inline double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace detail

inline std::array<double, 3> srgb_to_lab(Rgb c) {
  const auto& lin = detail::srgb_to_linear_table();
  const double r = lin[c.r], g = lin[c.g], b = lin[c.b];
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = detail::lab_f(x / 0.95047);
  const double fy = detail::lab_f(y / 1.0);
  const double fz = detail::lab_f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline LabImage rgb_to_lab(const RgbImage& img) {
  LabImage lab{Image<double>(img.width(), img.height()),
               Image<double>(img.width(), img.height()),
               Image<double>(img.width(), img.height())};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const auto v = srgb_to_lab(img(x, y));
      lab.l(x, y) = v[0];
      lab.a(x, y) = v[1];
      lab.b(x, y) = v[2];
    }
  return lab;
}

/// R_o: squared Lab distance between each pixel and its Gaussian-blurred
/// surround, sigma = min(h, w) / sigma_s. Not normalized.
inline AnomalyMap rgb_anomaly_map(const LabImage& lab, const RgbAnomalyConfig& cfg) {
  const double sigma = cfg.blur_sigma(lab.height(), lab.width());
  AnomalyMap out(lab.width(), lab.height(), 0.0f);
  if (lab.l.empty()) return out;
  for (const Image<double>* channel : {&lab.l, &lab.a, &lab.b}) {
    // Offset by one pixel's value so uniform regions blur to exactly zero.
    const double ref = (*channel)(0, 0);
    Image<double> centered(lab.width(), lab.height());
    auto c_px = centered.pixels();
    auto s_px = channel->pixels();
    for (std::size_t i = 0; i < c_px.size(); ++i) c_px[i] = s_px[i] - ref;
    const Image<double> blurred = gaussian_blur(centered, sigma);
    for (int y = 0; y < lab.height(); ++y) {
      auto src = centered.row(y);
      auto blr = blurred.row(y);
      auto dst = out.row(y);
      for (int x = 0; x < lab.width(); ++x) {
        const double d = src[x] - blr[x];
        dst[x] += static_cast<float>(d * d);
      }
    }
  }
  return out;
}

/// R_f: R_o restricted to the drivable mask plus its holes, then divided by
/// the surviving maximum.
inline AnomalyMap finalize_rgb_anomalies(const AnomalyMap& r_o, const DrivableMask& mask,
                                         const Mask& holes) {
  require_same_shape(r_o, mask, "RGB anomaly map vs drivable mask");
  require_same_shape(mask, holes, "drivable mask vs hole map");
  AnomalyMap out(r_o.width(), r_o.height(), 0.0f);
  for (int y = 0; y < r_o.height(); ++y)
    for (int x = 0; x < r_o.width(); ++x)
      if (mask(x, y) || holes(x, y)) out(x, y) = std::max(r_o(x, y), 0.0f);
  normalize_by_max(out);
  return out;
}

inline AnomalyMap finalize_rgb_anomalies(const AnomalyMap& r_o, const DrivableMask& mask) {
  return finalize_rgb_anomalies(r_o, mask, find_holes(mask));
}

}  // namespace sslg
