#pragma once

// Synthetic RGB-D scenes: a ground plane, optional far backdrop wall and
// axis-aligned boxes, ray cast through the pitched pinhole model in
// camera.hpp. Ground-truth labels are computed before noise and dropout.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sslg/camera.hpp"
#include "sslg/config.hpp"
#include "sslg/image.hpp"

namespace sslg {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Plane normal . P = offset in world coordinates (Y down).
struct SyntheticPlane {
  enum class Kind { Horizontal, Vertical, General };
  Kind kind = Kind::Horizontal;
  Vec3 normal{0, 1, 0};
  double offset = 1.0;

  /// Y = m; m > 0 puts the camera above the plane.
  static SyntheticPlane horizontal(double m) { return {Kind::Horizontal, {0, 1, 0}, m}; }
  /// Z = n.
  static SyntheticPlane vertical(double n) { return {Kind::Vertical, {0, 0, 1}, n}; }
  static SyntheticPlane general(Vec3 normal, double offset) {
    const double len = std::sqrt(dot(normal, normal));
    if (!(len > 0.0)) throw Error("plane normal must be non-zero");
    return {Kind::General, {normal.x / len, normal.y / len, normal.z / len}, offset / len};
  }
};

struct SyntheticBox {
  double x0 = -0.2, z0 = 3.0, x1 = 0.2, z1 = 3.3;  // footprint, meters
  double height = 0.2;
  Rgb color{200, 30, 30};
};

inline constexpr double kAnomalyMinHeight = 0.05;

struct SceneSpec {
  CameraModel cam;
  int width = 1280;
  int height = 720;
  SyntheticPlane ground = SyntheticPlane::horizontal(1.0);
  std::optional<double> backdrop_distance;  // vertical wall Z = n
  double backdrop_height = 1.5;             // wall height above the ground
  std::vector<SyntheticBox> boxes;
  Rgb ground_color{120, 120, 120};
  Rgb backdrop_color{150, 125, 100};
  Rgb sky_color{140, 150, 165};
  double color_jitter = 0.0;  // per-channel std, 8-bit units
  double noise = 0.0;         // depth noise std, meters
  double dropout = 0.0;       // invalid-pixel probability
  double max_range = 10.0;

  void validate() const {
    cam.validate();
    if (width < 1 || height < 1) throw Error("scene: image size must be positive");
    if (!(ground.offset > 0.0))
      throw Error("scene: camera must be above the ground plane");
    if (!(noise >= 0.0)) throw Error("scene: noise must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("scene: dropout must lie in [0, 1)");
    if (!(max_range > 0.0)) throw Error("scene: max_range must be positive");
    if (backdrop_distance && !(*backdrop_distance > 0.0))
      throw Error("scene: backdrop distance must be positive");
    if (!boxes.empty() && ground.kind != SyntheticPlane::Kind::Horizontal)
      throw Error("scene: boxes need a horizontal ground plane");
    for (const auto& b : boxes) {
      if (!(b.height > 0.0)) throw Error("scene: box height must be positive");
      if (!(b.x0 < b.x1 && b.z0 < b.z1)) throw Error("scene: box footprint is empty");
      if (!(b.z0 > 0.0)) throw Error("scene: box must lie in front of the camera");
      if (!(b.height < ground.offset)) throw Error("scene: box taller than camera height");
    }
  }
};

struct RenderedScene {
  RgbImage rgb;
  DepthImage depth;
  LabelImage truth;
  /// Height above the ground of the surface hit (meters); NaN where nothing
  /// within range was hit.
  Image<float> surface_height;
  /// Which surface each pixel sees: kNoSurface, kGroundSurface,
  /// kBackdropSurface, or kFirstBoxSurface + box index.
  Image<std::int16_t> surface;
};

inline constexpr std::int16_t kNoSurface = 0;
inline constexpr std::int16_t kGroundSurface = 1;
inline constexpr std::int16_t kBackdropSurface = 2;
inline constexpr std::int16_t kFirstBoxSurface = 3;

namespace detail {

inline Vec3 pixel_ray(const CameraModel& cam, double u, double v) {
  const double su = (u - cam.u0) / cam.f;
  const double sv = (v - cam.v0) / cam.f;
  const double c = std::cos(cam.theta), s = std::sin(cam.theta);
  // Scaled so the camera-frame z component is 1: t along this ray is depth.
  return {su, sv * c + s, -sv * s + c};
}

inline double hit_plane(const SyntheticPlane& p, const Vec3& dir) {
  const double denom = dot(p.normal, dir);
  if (std::abs(denom) < 1e-12) return std::numeric_limits<double>::infinity();
  const double t = p.offset / denom;
  return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

inline double hit_box(const SyntheticBox& b, double ground_y, const Vec3& dir) {
  double t_near = 0.0, t_far = std::numeric_limits<double>::infinity();
  const std::array<std::array<double, 3>, 3> slabs = {{
      {dir.x, b.x0, b.x1},
      {dir.y, ground_y - b.height, ground_y},
      {dir.z, b.z0, b.z1},
  }};
  for (const auto& [d, lo, hi] : slabs) {
    if (std::abs(d) < 1e-12) {
      if (0.0 < lo || 0.0 > hi) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = lo / d, t1 = hi / d;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::numeric_limits<double>::infinity();
  }
  return t_near > 0.0 ? t_near : std::numeric_limits<double>::infinity();
}

inline std::uint8_t jittered(std::uint8_t c, double delta) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(c + delta), 0L, 255L));
}

}  // namespace detail

inline RenderedScene render(const SceneSpec& spec, std::uint64_t seed = 0) {
  spec.validate();
  const int w = spec.width, h = spec.height;
  RenderedScene out{RgbImage(w, h), DepthImage(w, h, static_cast<float>(spec.max_range)),
                    LabelImage(w, h, to_u8(LabelClass::Unknown)),
                    Image<float>(w, h, std::numeric_limits<float>::quiet_NaN()),
                    Image<std::int16_t>(w, h, kNoSurface)};
  const double ground_y = spec.ground.offset;
  const std::optional<SyntheticPlane> backdrop =
      spec.backdrop_distance ? std::optional(SyntheticPlane::vertical(*spec.backdrop_distance))
                             : std::nullopt;

  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const Vec3 dir = detail::pixel_ray(spec.cam, u, v);
      enum class Surface { None, Ground, Backdrop, Box } surface = Surface::None;
      double t = std::numeric_limits<double>::infinity();
      const SyntheticBox* box = nullptr;

      if (const double tg = detail::hit_plane(spec.ground, dir); tg < t) {
        t = tg;
        surface = Surface::Ground;
      }
      if (backdrop) {
        const double tb = detail::hit_plane(*backdrop, dir);
        // The wall stands on the ground and is backdrop_height tall.
        if (tb < t && dir.y * tb >= ground_y - spec.backdrop_height) {
          t = tb;
          surface = Surface::Backdrop;
        }
      }
      for (const auto& b : spec.boxes)
        if (const double tb = detail::hit_box(b, ground_y, dir); tb < t) {
          t = tb;
          surface = Surface::Box;
          box = &b;
        }
      if (surface == Surface::None || !(t <= spec.max_range)) {
        out.rgb(u, v) = spec.sky_color;
        continue;
      }
      out.depth.set(u, v, static_cast<float>(t));
      switch (surface) {
        case Surface::Ground:
          out.rgb(u, v) = spec.ground_color;
          out.truth(u, v) = to_u8(LabelClass::Drivable);
          out.surface_height(u, v) = 0.0f;
          out.surface(u, v) = kGroundSurface;
          break;
        case Surface::Backdrop:
          out.rgb(u, v) = spec.backdrop_color;
          out.surface_height(u, v) = static_cast<float>(ground_y - dir.y * t);
          out.surface(u, v) = kBackdropSurface;
          break;
        case Surface::Box: {
          out.rgb(u, v) = box->color;
          const double above = ground_y - dir.y * t;
          out.surface_height(u, v) = static_cast<float>(above);
          out.surface(u, v) =
              static_cast<std::int16_t>(kFirstBoxSurface + (box - spec.boxes.data()));
          out.truth(u, v) = to_u8(box->height >= kAnomalyMinHeight ? LabelClass::Anomaly
                                                                    : LabelClass::Drivable);
          break;
        }
        case Surface::None: break;
      }
    }

  std::mt19937_64 rng(seed);
  if (spec.color_jitter > 0.0) {
    std::normal_distribution<double> jitter(0.0, spec.color_jitter);
    for (auto& px : out.rgb.pixels()) {
      px.r = detail::jittered(px.r, jitter(rng));
      px.g = detail::jittered(px.g, jitter(rng));
      px.b = detail::jittered(px.b, jitter(rng));
    }
  }
  if (spec.noise > 0.0 || spec.dropout > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise > 0.0 ? spec.noise : 1.0);
    std::bernoulli_distribution drop(spec.dropout);
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u) {
        if (!out.depth.valid(u, v)) continue;
        if (spec.noise > 0.0)
          out.depth.set(u, v, static_cast<float>(out.depth(u, v) + noise(rng)));
        if (spec.dropout > 0.0 && drop(rng)) out.depth.invalidate(u, v);
      }
  }
  return out;
}

/// Closed-form v-disparity line of a horizontal or vertical plane:
/// disparity = slope * V + intercept with V = v - v0.
struct AnalyticLine {
  double slope = 0.0;      // disparity per row
  double intercept = 0.0;  // disparity at V = 0

  double disparity_at_row(const CameraModel& cam, double v) const {
    return slope * (v - cam.v0) + intercept;
  }
  /// Same line in map coordinates, bins as a function of image row.
  std::pair<double, double> in_bins(const CameraModel& cam, double bin_width) const {
    return {(intercept - slope * cam.v0) / bin_width, slope / bin_width};
  }
};

inline AnalyticLine expected_vdisparity_line(const SyntheticPlane& plane,
                                             const CameraModel& cam) {
  const double c = std::cos(cam.theta), s = std::sin(cam.theta);
  switch (plane.kind) {
    case SyntheticPlane::Kind::Horizontal:  // disparity * m / b = V cos + f sin
      return {cam.b * c / plane.offset, cam.b * cam.f * s / plane.offset};
    case SyntheticPlane::Kind::Vertical:  // disparity * n / b = f cos - V sin
      return {-cam.b * s / plane.offset, cam.b * cam.f * c / plane.offset};
    default:
      throw Error("expected_vdisparity_line: only horizontal and vertical planes");
  }
}

// ---------------------------------------------------------------------------
// Random layouts

struct RandomBoxOptions {
  int count = 0;
  double min_height = 0.1, max_height = 0.4;
  double min_distance = 2.0, max_distance = 6.0;  // box front face Z
  double min_width = 0.3, max_width = 0.8;
  double depth = 0.3;  // footprint extent along Z
};

/// Places `opt.count` non-overlapping, fully visible boxes with saturated
/// colors, drawn from `seed`.
inline std::vector<SyntheticBox> random_boxes(const SceneSpec& spec,
                                              const RandomBoxOptions& opt,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  static constexpr std::array<Rgb, 6> palette = {Rgb{210, 40, 40}, Rgb{40, 60, 200},
                                                 Rgb{230, 200, 30}, Rgb{40, 170, 60},
                                                 Rgb{200, 60, 190}, Rgb{240, 130, 20}};
  std::vector<SyntheticBox> boxes;
  for (int attempt = 0; attempt < 500 && static_cast<int>(boxes.size()) < opt.count;
       ++attempt) {
    SyntheticBox b;
    b.height = uniform(opt.min_height, opt.max_height);
    const double width = uniform(opt.min_width, opt.max_width);
    b.z0 = uniform(opt.min_distance, opt.max_distance);
    b.z1 = b.z0 + opt.depth;
    // Keep the footprint inside the central 70% of the horizontal field.
    const double half_fov = 0.7 * std::min(spec.cam.u0, spec.width - spec.cam.u0) / spec.cam.f;
    const double limit = b.z0 * half_fov - width / 2;
    if (limit <= 0.0) continue;
    const double cx = uniform(-limit, limit);
    b.x0 = cx - width / 2;
    b.x1 = cx + width / 2;
    b.color = palette[rng() % palette.size()];
    const double gap = 0.3;
    const bool overlaps = std::any_of(boxes.begin(), boxes.end(), [&](const SyntheticBox& o) {
      return b.x0 < o.x1 + gap && o.x0 < b.x1 + gap && b.z0 < o.z1 + gap && o.z0 < b.z1 + gap;
    });
    if (!overlaps) boxes.push_back(b);
  }
  return boxes;
}

// ---------------------------------------------------------------------------
// Scene files: key = value, with repeatable `box = x0 z0 x1 z1 height r g b`.

struct SceneFile {
  SceneSpec spec;
  RandomBoxOptions random;
};

namespace detail {

inline std::vector<double> parse_numbers(const KeyValue& kv, std::size_t expected) {
  std::istringstream in(kv.value);
  std::vector<double> values;
  std::string token;
  while (in >> token) values.push_back(parse_number<double>({kv.key, token, kv.line}));
  if (values.size() != expected)
    throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.key + "' expects " +
                      std::to_string(expected) + " numbers");
  return values;
}

inline Rgb parse_color(const KeyValue& kv) {
  const auto v = parse_numbers(kv, 3);
  for (double c : v)
    if (c < 0 || c > 255)
      throw ConfigError("line " + std::to_string(kv.line) + ": color out of range");
  return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]),
          static_cast<std::uint8_t>(v[2])};
}

}  // namespace detail

inline SceneFile parse_scene(const std::vector<KeyValue>& kvs) {
  SceneFile out;
  SceneSpec& s = out.spec;
  std::optional<double> u0, v0;
  for (const auto& kv : kvs) {
    const std::string& k = kv.key;
    if (k == "width") s.width = parse_number<int>(kv);
    else if (k == "height") s.height = parse_number<int>(kv);
    else if (k == "focal_length") s.cam.f = parse_number<double>(kv);
    else if (k == "baseline") s.cam.b = parse_number<double>(kv);
    else if (k == "pitch") s.cam.theta = parse_number<double>(kv);
    else if (k == "u0") u0 = parse_number<double>(kv);
    else if (k == "v0") v0 = parse_number<double>(kv);
    else if (k == "ground_height") s.ground = SyntheticPlane::horizontal(parse_number<double>(kv));
    else if (k == "backdrop_distance") s.backdrop_distance = parse_number<double>(kv);
    else if (k == "backdrop_height") s.backdrop_height = parse_number<double>(kv);
    else if (k == "ground_color") s.ground_color = detail::parse_color(kv);
    else if (k == "backdrop_color") s.backdrop_color = detail::parse_color(kv);
    else if (k == "sky_color") s.sky_color = detail::parse_color(kv);
    else if (k == "color_jitter") s.color_jitter = parse_number<double>(kv);
    else if (k == "depth_noise") s.noise = parse_number<double>(kv);
    else if (k == "dropout") s.dropout = parse_number<double>(kv);
    else if (k == "max_range") s.max_range = parse_number<double>(kv);
    else if (k == "box") {
      const auto v = detail::parse_numbers(kv, 8);
      for (int c = 5; c < 8; ++c)
        if (v[c] < 0 || v[c] > 255)
          throw ConfigError("line " + std::to_string(kv.line) + ": color out of range");
      s.boxes.push_back({v[0], v[1], v[2], v[3], v[4],
                         Rgb{static_cast<std::uint8_t>(v[5]), static_cast<std::uint8_t>(v[6]),
                             static_cast<std::uint8_t>(v[7])}});
    } else if (k == "random_boxes") out.random.count = parse_number<int>(kv);
    else if (k == "random_box_height") {
      const auto v = detail::parse_numbers(kv, 2);
      out.random.min_height = v[0];
      out.random.max_height = v[1];
    } else if (k == "random_box_distance") {
      const auto v = detail::parse_numbers(kv, 2);
      out.random.min_distance = v[0];
      out.random.max_distance = v[1];
    } else if (k == "random_box_width") {
      const auto v = detail::parse_numbers(kv, 2);
      out.random.min_width = v[0];
      out.random.max_width = v[1];
    } else
      throw ConfigError("line " + std::to_string(kv.line) + ": unknown scene key '" + k + "'");
  }
  s.cam.u0 = u0.value_or(s.width / 2.0);
  s.cam.v0 = v0.value_or(s.height / 2.0);
  if (out.random.count < 0) throw ConfigError("random_boxes must be non-negative");
  s.validate();
  return out;
}

inline SceneFile load_scene(const std::filesystem::path& path) {
  try {
    return parse_scene(read_key_value_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// Scene for frame `index` of a synth batch: fixed boxes plus, when
/// requested, a random layout drawn from (seed, index).
inline SceneSpec scene_for_frame(const SceneFile& file, std::uint64_t seed, int index) {
  SceneSpec s = file.spec;
  if (file.random.count > 0) {
    auto extra = random_boxes(s, file.random, seed * 1000003ULL + index);
    s.boxes.insert(s.boxes.end(), extra.begin(), extra.end());
  }
  return s;
}

}  // namespace sslg
