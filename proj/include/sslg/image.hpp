#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sslg {

/// Base exception for every failure the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major 2-D grid. All per-pixel maps in the pipeline are one of
/// these; width is the column count, height the row count.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error("negative image dimensions");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  bool same_shape(const auto& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(std::string("dimension mismatch: ") + what + " (" +
                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                " vs " + std::to_string(b.width()) + "x" +
                std::to_string(b.height()) + ")");
}

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

using RgbImage = Image<Rgb>;

/// Depth in meters along the optical axis. A stored value of 0 marks an
/// invalid pixel; every valid pixel lies in (0, max_range].
class DepthImage {
 public:
  DepthImage() = default;
  DepthImage(int width, int height, float max_range = 10.0f)
      : depths_(width, height, 0.0f), max_range_(max_range) {
    if (!(max_range > 0.0f)) throw Error("max_range must be positive");
  }

  int width() const { return depths_.width(); }
  int height() const { return depths_.height(); }
  float max_range() const { return max_range_; }

  float operator()(int x, int y) const { return depths_(x, y); }
  bool valid(int x, int y) const { return depths_(x, y) > 0.0f; }

  /// Stores `meters`, invalidating it when it is non-positive, non-finite
  /// or beyond the range cap.
  void set(int x, int y, float meters) {
    depths_(x, y) = (meters > 0.0f && meters <= max_range_) ? meters : 0.0f;
  }
  void invalidate(int x, int y) { depths_(x, y) = 0.0f; }

  const Image<float>& raw() const { return depths_; }

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count_if(
        depths_.pixels().begin(), depths_.pixels().end(),
        [](float d) { return d > 0.0f; }));
  }

 private:
  Image<float> depths_;
  float max_range_ = 10.0f;
};

enum class LabelClass : std::uint8_t { Unknown = 0, Drivable = 1, Anomaly = 2 };
inline constexpr int kNumClasses = 3;

using LabelImage = Image<std::uint8_t>;
using NormalizedDepthImage = Image<std::uint8_t>;
using Mask = Image<std::uint8_t>;  // 0 / 1
using AnomalyMap = Image<float>;   // values in [0, 1] unless stated otherwise

inline std::uint8_t to_u8(LabelClass c) { return static_cast<std::uint8_t>(c); }

inline std::size_t count_nonzero(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(
      m.pixels().begin(), m.pixels().end(),
      [](std::uint8_t v) { return v != 0; }));
}

inline float max_value(const Image<float>& img) {
  float m = 0.0f;
  for (float v : img.pixels()) m = std::max(m, v);
  return m;
}

/// Divides by the map maximum when it is positive; all-zero maps stay zero.
inline void normalize_by_max(Image<float>& img) {
  const float m = max_value(img);
  if (m <= 0.0f) return;
  for (float& v : img.pixels()) v /= m;
}

}  // namespace sslg
