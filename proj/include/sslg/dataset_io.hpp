#pragma once

// Dataset file conventions:
//   rgb/<name>.png    3-channel 8-bit
//   depth/<name>.png  1-channel 16-bit, millimeters, 0 = no return
//   label/<name>.png  1-channel 8-bit, raw class index {0,1,2}

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "sslg/image.hpp"

namespace sslg {

namespace fs = std::filesystem;

class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline cv::Mat read_png(const fs::path& path) {
  cv::Mat m;
  try {
    m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw IoError("unreadable file " + path.string() + ": " + e.what());
  }
  if (m.empty()) throw IoError("unreadable file " + path.string());
  return m;
}

inline void write_png(const fs::path& path, const cv::Mat& m) {
  bool ok = false;
  try {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    ok = cv::imwrite(path.string(), m);
  } catch (const std::exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

inline std::string describe_type(const cv::Mat& m) {
  return std::to_string(m.elemSize1() * 8) + "-bit, " +
         std::to_string(m.channels()) + " channel(s)";
}

template <typename T>
Image<T> from_mat(const cv::Mat& m) {
  Image<T> out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const T* src = m.ptr<T>(y);
    std::copy(src, src + m.cols, out.row(y).begin());
  }
  return out;
}

template <typename T>
cv::Mat to_mat(const Image<T>& img, int type) {
  cv::Mat m(img.height(), img.width(), type);
  for (int y = 0; y < img.height(); ++y)
    std::copy(img.row(y).begin(), img.row(y).end(), m.ptr<T>(y));
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RGB

inline RgbImage read_rgb(const fs::path& path) {
  const cv::Mat m = detail::read_png(path);
  if (m.depth() != CV_8U || (m.channels() != 3 && m.channels() != 4))
    throw IoError("unsupported bit depth in " + path.string() + " (" +
                  detail::describe_type(m) + "); expected 8-bit RGB");
  RgbImage out(m.cols, m.rows);
  const int ch = m.channels();
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* p = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x, p += ch) out(x, y) = {p[2], p[1], p[0]};
  }
  return out;
}

inline void write_rgb(const RgbImage& img, const fs::path& path) {
  cv::Mat m(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    std::uint8_t* p = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width(); ++x, p += 3) {
      const Rgb c = img(x, y);
      p[0] = c.b;
      p[1] = c.g;
      p[2] = c.r;
    }
  }
  detail::write_png(path, m);
}

// ---------------------------------------------------------------------------
// Depth

/// Converts raw sensor millimeters to a DepthImage; 0 and anything beyond
/// `max_range` meters become invalid.
inline DepthImage depth_from_millimeters(const Image<std::uint16_t>& raw,
                                         float max_range) {
  DepthImage d(raw.width(), raw.height(), max_range);
  for (int y = 0; y < raw.height(); ++y)
    for (int x = 0; x < raw.width(); ++x)
      d.set(x, y, static_cast<float>(raw(x, y)) * 0.001f);
  return d;
}

inline Image<std::uint16_t> depth_to_millimeters(const DepthImage& d) {
  Image<std::uint16_t> raw(d.width(), d.height());
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      const double mm = std::round(static_cast<double>(d(x, y)) * 1000.0);
      raw(x, y) = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
    }
  return raw;
}

inline DepthImage read_depth(const fs::path& path, float max_range) {
  const cv::Mat m = detail::read_png(path);
  if (m.type() != CV_16UC1)
    throw IoError("unsupported bit depth in " + path.string() + " (" +
                  detail::describe_type(m) + "); expected 16-bit single channel");
  return depth_from_millimeters(detail::from_mat<std::uint16_t>(m), max_range);
}

inline void write_depth(const DepthImage& d, const fs::path& path) {
  detail::write_png(path, detail::to_mat(depth_to_millimeters(d), CV_16UC1));
}

inline std::pair<RgbImage, DepthImage> load_rgbd_pair(const fs::path& rgb_path,
                                                      const fs::path& depth_path,
                                                      float max_range) {
  RgbImage rgb = read_rgb(rgb_path);
  DepthImage depth = read_depth(depth_path, max_range);
  if (rgb.width() != depth.width() || rgb.height() != depth.height())
    throw IoError("dimension mismatch between " + rgb_path.string() + " (" +
                  std::to_string(rgb.width()) + "x" + std::to_string(rgb.height()) +
                  ") and " + depth_path.string() + " (" +
                  std::to_string(depth.width()) + "x" +
                  std::to_string(depth.height()) + ")");
  return {std::move(rgb), std::move(depth)};
}

/// Maps valid depths linearly from (0, max_range] onto [1, 255]; 0 is
/// reserved for invalid pixels.
inline NormalizedDepthImage normalize_depth(const DepthImage& d) {
  NormalizedDepthImage out(d.width(), d.height(), 0);
  const double scale = 254.0 / d.max_range();
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      if (!d.valid(x, y)) continue;
      const double v = std::round(1.0 + scale * d(x, y));
      out(x, y) = static_cast<std::uint8_t>(std::clamp(v, 1.0, 255.0));
    }
  return out;
}

// ---------------------------------------------------------------------------
// 8-bit single-channel maps (labels, normalized depth, debug dumps)

inline void write_gray8(const Image<std::uint8_t>& img, const fs::path& path) {
  detail::write_png(path, detail::to_mat(img, CV_8UC1));
}

inline Image<std::uint8_t> read_gray8(const fs::path& path) {
  const cv::Mat m = detail::read_png(path);
  if (m.type() != CV_8UC1)
    throw IoError("unsupported bit depth in " + path.string() + " (" +
                  detail::describe_type(m) + "); expected 8-bit single channel");
  return detail::from_mat<std::uint8_t>(m);
}

inline void write_label(const LabelImage& label, const fs::path& path) {
  write_gray8(label, path);
}

inline LabelImage read_label(const fs::path& path) {
  LabelImage l = read_gray8(path);
  for (std::uint8_t v : l.pixels())
    if (v >= kNumClasses)
      throw IoError("label file " + path.string() + " holds class value " +
                    std::to_string(v));
  return l;
}

/// Scales a [0, 1] map to 0..255 for inspection.
inline void write_unit_map(const Image<float>& map, const fs::path& path) {
  Image<std::uint8_t> out(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      out(x, y) = static_cast<std::uint8_t>(
          std::lround(std::clamp(map(x, y), 0.0f, 1.0f) * 255.0f));
  write_gray8(out, path);
}

inline void write_mask(const Mask& mask, const fs::path& path) {
  Image<std::uint8_t> out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out(x, y) = mask(x, y) ? 255 : 0;
  write_gray8(out, path);
}

/// Blue unknown, green drivable, red anomaly.
inline RgbImage colorize_label(const LabelImage& label) {
  static constexpr std::array<Rgb, kNumClasses> palette = {
      Rgb{0, 0, 255}, Rgb{0, 255, 0}, Rgb{255, 0, 0}};
  RgbImage out(label.width(), label.height());
  for (int y = 0; y < label.height(); ++y)
    for (int x = 0; x < label.width(); ++x)
      out(x, y) = palette[std::min<int>(label(x, y), kNumClasses - 1)];
  return out;
}

// ---------------------------------------------------------------------------
// Directory layout

struct FramePaths {
  std::string name;  // basename without extension
  fs::path rgb;
  fs::path depth;
};

/// Pairs `rgb/*.png` with `depth/*.png` by basename, sorted by name. Frames
/// that lack a counterpart are returned in `orphans`.
struct FrameListing {
  std::vector<FramePaths> frames;
  std::vector<std::string> orphans;
};

inline std::vector<std::string> png_basenames(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) return names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

inline FrameListing list_frames(const fs::path& input_dir) {
  const fs::path rgb_dir = input_dir / "rgb";
  const fs::path depth_dir = input_dir / "depth";
  if (!fs::is_directory(rgb_dir) || !fs::is_directory(depth_dir))
    throw IoError("input directory " + input_dir.string() +
                  " must contain rgb/ and depth/");
  const auto rgb = png_basenames(rgb_dir);
  const auto depth = png_basenames(depth_dir);
  FrameListing out;
  std::set_symmetric_difference(rgb.begin(), rgb.end(), depth.begin(),
                                depth.end(), std::back_inserter(out.orphans));
  std::vector<std::string> both;
  std::set_intersection(rgb.begin(), rgb.end(), depth.begin(), depth.end(),
                        std::back_inserter(both));
  for (const auto& n : both)
    out.frames.push_back({n, rgb_dir / (n + ".png"), depth_dir / (n + ".png")});
  return out;
}

}  // namespace sslg
