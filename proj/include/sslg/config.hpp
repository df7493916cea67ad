#pragma once

// Plain-text key/value configuration.
//
//   # comment
//   key = value
//
// Keys are case-sensitive; blank lines and text after '#' are ignored.
// Repeated keys are allowed by the reader and resolved by the consumer.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sslg/camera.hpp"
#include "sslg/image.hpp"
#include "sslg/rgb_pipeline.hpp"
#include "sslg/vdisparity.hpp"

namespace sslg {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<KeyValue> parse_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    KeyValue kv{trim(std::string_view(body).substr(0, eq)),
                trim(std::string_view(body).substr(eq + 1)), number};
    if (kv.key.empty())
      throw ConfigError("line " + std::to_string(number) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

inline std::vector<KeyValue> read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_key_values(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

template <typename T>
T parse_number(const KeyValue& kv) {
  T value{};
  const char* first = kv.value.data();
  const char* last = first + kv.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.key +
                      "' expects a number, got '" + kv.value + "'");
  return value;
}

inline bool parse_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
  throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.key +
                    "' expects true/false, got '" + kv.value + "'");
}

/// Every tunable of the labeling pipeline. Defaults are the reference
/// operating point (alpha 0.5, kappa 0.3, sigma_s 12, 10 m range cap).
struct PipelineConfig {
  CameraModel camera;
  double max_range = 10.0;   // meters
  double min_depth = 1.0;    // meters; sets the top of the disparity range
  int bins = 256;
  double tol = 2.0;          // bins
  RidgeFilterParams ridge;
  HoughParams hough;
  double min_anomaly_height = 0.05;  // meters
  int min_hole_pixels = 16;
  RgbAnomalyConfig rgb;

  void validate() const {
    camera.validate();
    rgb.validate();
    if (!(max_range > 0.0)) throw ConfigError("max_range must be positive");
    if (!(min_depth > 0.0 && min_depth < max_range))
      throw ConfigError("min_depth must lie in (0, max_range)");
    if (bins < 2) throw ConfigError("bins must be at least 2");
    if (!(tol >= 0.0)) throw ConfigError("tol must be non-negative");
    if (!(ridge.sigma > 0.0)) throw ConfigError("ridge_sigma must be positive");
    if (!(hough.angle_step_deg > 0.0)) throw ConfigError("hough_angle_step must be positive");
    if (!(hough.max_angle_deg > 0.0 && hough.max_angle_deg < 90.0))
      throw ConfigError("hough_max_angle must lie in (0, 90)");
    if (!(hough.rho_step > 0.0)) throw ConfigError("hough_rho_step must be positive");
    if (hough.min_votes < 1) throw ConfigError("hough_min_votes must be at least 1");
    if (hough.max_lines < 1) throw ConfigError("hough_max_lines must be at least 1");
    if (!(min_anomaly_height >= 0.0))
      throw ConfigError("min_anomaly_height must be non-negative");
    if (min_hole_pixels < 1) throw ConfigError("min_hole_pixels must be at least 1");
  }

  double max_disparity() const { return max_disparity_for(camera, min_depth); }

  /// Applies one key; returns false for keys this struct does not know.
  bool apply(const KeyValue& kv) {
    const std::string& k = kv.key;
    if (k == "focal_length") camera.f = parse_number<double>(kv);
    else if (k == "baseline") camera.b = parse_number<double>(kv);
    else if (k == "pitch") camera.theta = parse_number<double>(kv);
    else if (k == "u0") camera.u0 = parse_number<double>(kv);
    else if (k == "v0") camera.v0 = parse_number<double>(kv);
    else if (k == "max_range") max_range = parse_number<double>(kv);
    else if (k == "min_depth") min_depth = parse_number<double>(kv);
    else if (k == "bins") bins = parse_number<int>(kv);
    else if (k == "tol") tol = parse_number<double>(kv);
    else if (k == "ridge_sigma") ridge.sigma = parse_number<double>(kv);
    else if (k == "ridge_log_compress") ridge.log_compress = parse_bool(kv);
    else if (k == "hough_angle_step") hough.angle_step_deg = parse_number<double>(kv);
    else if (k == "hough_max_angle") hough.max_angle_deg = parse_number<double>(kv);
    else if (k == "hough_rho_step") hough.rho_step = parse_number<double>(kv);
    else if (k == "hough_response_floor") hough.response_floor = parse_number<float>(kv);
    else if (k == "hough_min_votes") hough.min_votes = parse_number<int>(kv);
    else if (k == "hough_inlier_distance") hough.inlier_distance = parse_number<double>(kv);
    else if (k == "hough_max_row_gap") hough.max_row_gap = parse_number<int>(kv);
    else if (k == "hough_max_lines") hough.max_lines = parse_number<int>(kv);
    else if (k == "min_anomaly_height") min_anomaly_height = parse_number<double>(kv);
    else if (k == "min_hole_pixels") min_hole_pixels = parse_number<int>(kv);
    else if (k == "sigma_s") rgb.sigma_s = parse_number<double>(kv);
    else if (k == "alpha") rgb.alpha = parse_number<double>(kv);
    else if (k == "kappa") rgb.kappa = parse_number<double>(kv);
    else return false;
    return true;
  }

  /// Ordered key/value snapshot; feeding it back through apply() reproduces
  /// this configuration.
  std::vector<std::pair<std::string, std::string>> entries() const {
    auto num = [](double v) {
      std::ostringstream os;
      os.precision(17);
      os << v;
      return os.str();
    };
    return {
        {"focal_length", num(camera.f)},
        {"baseline", num(camera.b)},
        {"pitch", num(camera.theta)},
        {"u0", num(camera.u0)},
        {"v0", num(camera.v0)},
        {"max_range", num(max_range)},
        {"min_depth", num(min_depth)},
        {"bins", std::to_string(bins)},
        {"tol", num(tol)},
        {"ridge_sigma", num(ridge.sigma)},
        {"ridge_log_compress", ridge.log_compress ? "true" : "false"},
        {"hough_angle_step", num(hough.angle_step_deg)},
        {"hough_max_angle", num(hough.max_angle_deg)},
        {"hough_rho_step", num(hough.rho_step)},
        {"hough_response_floor", num(hough.response_floor)},
        {"hough_min_votes", std::to_string(hough.min_votes)},
        {"hough_inlier_distance", num(hough.inlier_distance)},
        {"hough_max_row_gap", std::to_string(hough.max_row_gap)},
        {"hough_max_lines", std::to_string(hough.max_lines)},
        {"min_anomaly_height", num(min_anomaly_height)},
        {"min_hole_pixels", std::to_string(min_hole_pixels)},
        {"sigma_s", num(rgb.sigma_s)},
        {"alpha", num(rgb.alpha)},
        {"kappa", num(rgb.kappa)},
    };
  }
};

inline PipelineConfig parse_pipeline_config(const std::vector<KeyValue>& kvs) {
  PipelineConfig cfg;
  for (const auto& kv : kvs) {
    if (kv.key == "config_version") {
      if (parse_number<int>(kv) != 1)
        throw ConfigError("unsupported config_version " + kv.value);
      continue;
    }
    if (!cfg.apply(kv))
      throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  try {
    return parse_pipeline_config(read_key_value_file(path));
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + msg);
  }
}

inline std::string to_config_text(const PipelineConfig& cfg) {
  std::string out = "config_version = 1\n";
  for (const auto& [k, v] : cfg.entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace sslg
