#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "sslg/sslg.hpp"

namespace sslg::fixtures {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "sslg") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

/// Half-resolution rig (640x360) used by most tests to keep them fast.
inline SceneSpec half_res_scene(double pitch = 0.0, double camera_height = 1.0) {
  SceneSpec s;
  s.width = 640;
  s.height = 360;
  s.cam = CameraModel{320.0, 0.05, pitch, 320.0, 180.0};
  s.ground = SyntheticPlane::horizontal(camera_height);
  return s;
}

inline PipelineConfig config_for(const SceneSpec& s) {
  PipelineConfig cfg;
  cfg.camera = s.cam;
  cfg.max_range = s.max_range;
  return cfg;
}

/// Ground, backdrop wall, one >= 15 cm anomaly and two 5-15 cm anomalies.
inline SceneSpec three_box_scene() {
  SceneSpec s;
  s.cam = CameraModel{640.0, 0.05, 0.05, 640.0, 360.0};
  s.ground = SyntheticPlane::horizontal(1.0);
  s.backdrop_distance = 9.0;
  s.boxes = {{-0.4, 3.0, 0.4, 3.3, 0.30, {210, 40, 40}},
             {0.9, 4.5, 1.2, 4.8, 0.10, {40, 60, 200}},
             {-1.6, 5.0, -1.2, 5.3, 0.12, {230, 200, 30}}};
  return s;
}

/// 4-connected components of pixels where `pred(x, y)` holds; -1 elsewhere.
template <typename Pred>
Image<int> label_components(int w, int h, Pred pred, int* count = nullptr) {
  Image<int> lab(w, h, -1);
  int n = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!pred(x, y) || lab(x, y) >= 0) continue;
      stack.assign(1, {x, y});
      lab(x, y) = n;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (!pred(nx, ny) || lab(nx, ny) >= 0) continue;
          lab(nx, ny) = n;
          stack.emplace_back(nx, ny);
        }
      }
      ++n;
    }
  if (count) *count = n;
  return lab;
}

struct RegionMatch {
  int component = -1;
  double iou = 0.0;
};

/// For box `index` of a rendered scene, the component of `components` with
/// the largest overlap with the box's visible pixels, and their IoU.
inline RegionMatch match_box(const RenderedScene& r, int index, const Image<int>& components) {
  std::map<int, long> overlap;
  std::map<int, long> area;
  long box_area = 0;
  for (int y = 0; y < components.height(); ++y)
    for (int x = 0; x < components.width(); ++x) {
      const int c = components(x, y);
      if (c >= 0) ++area[c];
      if (r.surface(x, y) == kFirstBoxSurface + index) {
        ++box_area;
        if (c >= 0) ++overlap[c];
      }
    }
  RegionMatch m;
  long best = 0;
  for (const auto& [c, o] : overlap)
    if (o > best) {
      best = o;
      m.component = c;
    }
  if (m.component >= 0)
    m.iou = static_cast<double>(best) / static_cast<double>(box_area + area[m.component] - best);
  return m;
}

/// Reference 2-D correlation with an explicit square kernel and mirror
/// padding computed by repeated folding; independent of gaussian.hpp.
inline double mirror(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
  return i;
}

inline Image<double> dense_gaussian_blur(const Image<double>& src, double sigma, int window) {
  const int r = window / 2;
  std::vector<double> k(static_cast<std::size_t>(window) * window);
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k[(dy + r) * window + (dx + r)] = v;
      sum += v;
    }
  Image<double> out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          acc += k[(dy + r) * window + (dx + r)] *
                 src(static_cast<int>(mirror(x + dx, src.width())),
                     static_cast<int>(mirror(y + dy, src.height())));
      out(x, y) = acc / sum;
    }
  return out;
}

inline double class_iou(const LabelImage& truth, const LabelImage& pred, LabelClass c) {
  const auto m = metrics(confusion(truth, pred));
  return m.per_class[static_cast<int>(c)].iou.value_or(0.0) / 100.0;
}

}  // namespace sslg::fixtures
