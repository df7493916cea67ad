#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sslg/image.hpp"

namespace sslg {

enum class Border {
  Reflect,  // dcba|abcd|dcba
  Zero,
};

/// Maps an out-of-range index back into [0, n) by mirror reflection,
/// repeating as often as needed for kernels wider than the image.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

/// Odd window length covering 3 sigma, rounded up to the next odd integer.
inline int gaussian_window(double sigma) {
  int size = static_cast<int>(std::ceil(3.0 * sigma - 1e-9));
  if (size < 1) size = 1;
  if (size % 2 == 0) ++size;
  return size;
}

/// Normalized sampled Gaussian over [-radius, radius].
inline std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw Error("gaussian sigma must be positive");
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& w : k) w /= sum;
  return k;
}

/// First (order 1) or second (order 2) derivative of the normalized Gaussian.
/// The second-derivative kernel is corrected to sum to zero so constant input
/// yields exactly zero.
inline std::vector<double> gaussian_derivative_kernel(int order, double sigma,
                                                      int radius) {
  const auto g = gaussian_kernel(sigma, radius);
  std::vector<double> k(g.size());
  const double s2 = sigma * sigma;
  for (int i = -radius; i <= radius; ++i) {
    const double x = i;
    k[i + radius] = order == 1 ? -x / s2 * g[i + radius]
                               : (x * x / (s2 * s2) - 1.0 / s2) * g[i + radius];
  }
  if (order == 2) {
    double sum = 0.0;
    for (double w : k) sum += w;
    for (std::size_t i = 0; i < k.size(); ++i) k[i] -= sum * g[i];
  }
  return k;
}

namespace detail {

template <typename T>
void convolve_rows(const Image<T>& src, std::span<const double> kernel,
                   Border border, Image<double>& dst) {
  const int w = src.width();
  const int r = static_cast<int>(kernel.size()) / 2;
  std::vector<double> padded(w + 2 * r);
  for (int y = 0; y < src.height(); ++y) {
    auto in = src.row(y);
    for (int i = -r; i < w + r; ++i) {
      if (i >= 0 && i < w)
        padded[i + r] = static_cast<double>(in[i]);
      else
        padded[i + r] = border == Border::Zero
                            ? 0.0
                            : static_cast<double>(in[reflect_index(i, w)]);
    }
    auto out = dst.row(y);
    std::fill(out.begin(), out.end(), 0.0);
    // Correlation: out[x] = sum_k kernel[k] * in[x + k - r].
    for (int k = 0; k <= 2 * r; ++k) {
      const double wk = kernel[k];
      const double* p = padded.data() + k;
      double* o = out.data();
      for (int x = 0; x < w; ++x) o[x] += wk * p[x];
    }
  }
}

inline void convolve_cols(const Image<double>& src, std::span<const double> kernel,
                          Border border, Image<double>& dst) {
  const int w = src.width();
  const int h = src.height();
  const int r = static_cast<int>(kernel.size()) / 2;
  for (int y = 0; y < h; ++y) {
    auto out = dst.row(y);
    std::fill(out.begin(), out.end(), 0.0);
    double* o = out.data();
    for (int k = -r; k <= r; ++k) {
      int sy = y + k;
      if (sy < 0 || sy >= h) {
        if (border == Border::Zero) continue;
        sy = reflect_index(sy, h);
      }
      const double wk = kernel[k + r];
      const double* p = src.row(sy).data();
      for (int x = 0; x < w; ++x) o[x] += wk * p[x];
    }
  }
}

}  // namespace detail

/// Separable correlation: `kx` along rows, then `ky` along columns. Both
/// kernels must have odd length.
template <typename T>
Image<double> separable_filter(const Image<T>& src, std::span<const double> kx,
                               std::span<const double> ky, Border border) {
  if (kx.size() % 2 == 0 || ky.size() % 2 == 0)
    throw Error("separable_filter needs odd-length kernels");
  Image<double> tmp(src.width(), src.height());
  Image<double> out(src.width(), src.height());
  if (src.empty()) return out;
  detail::convolve_rows(src, kx, border, tmp);
  detail::convolve_cols(tmp, ky, border, out);
  return out;
}

/// Gaussian blur with a 3-sigma odd window and reflect padding.
template <typename T>
Image<double> gaussian_blur(const Image<T>& src, double sigma) {
  const int radius = gaussian_window(sigma) / 2;
  const auto k = gaussian_kernel(sigma, radius);
  return separable_filter(src, k, k, Border::Reflect);
}

}  // namespace sslg
