#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslg/dataset_io.hpp"
#include "sslg/image.hpp"

namespace sslg {

/// counts[gt][pred] over classes {unknown, drivable, anomaly}.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts)
      for (auto c : row) t += c;
    return t;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (int i = 0; i < kNumClasses; ++i)
      for (int j = 0; j < kNumClasses; ++j) counts[i][j] += o.counts[i][j];
    return *this;
  }

  ConfusionMatrix transposed() const {
    ConfusionMatrix t;
    for (int i = 0; i < kNumClasses; ++i)
      for (int j = 0; j < kNumClasses; ++j) t.counts[j][i] = counts[i][j];
    return t;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(const LabelImage& gt, const LabelImage& pred) {
  require_same_shape(gt, pred, "ground truth vs prediction");
  ConfusionMatrix cm;
  auto g = gt.pixels();
  auto p = pred.pixels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] >= kNumClasses || p[i] >= kNumClasses)
      throw Error("label value outside {0, 1, 2}");
    ++cm.counts[g[i]][p[i]];
  }
  return cm;
}

/// Percentages; a metric whose denominator is zero is left empty.
struct ClassMetrics {
  std::optional<double> precision, recall, iou;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumClasses> per_class;
  ClassMetrics mean;
};

inline const std::array<const char*, kNumClasses> kClassNames = {"unknown", "drivable",
                                                                 "anomaly"};

namespace detail {

inline std::optional<double> percent(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

inline std::optional<double> mean_of_defined(const std::array<std::optional<double>, kNumClasses>& v) {
  double sum = 0.0;
  int n = 0;
  for (const auto& x : v)
    if (x) {
      sum += *x;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

inline void fill_mean(MetricsReport& r) {
  std::array<std::optional<double>, kNumClasses> p, rc, iou;
  for (int c = 0; c < kNumClasses; ++c) {
    p[c] = r.per_class[c].precision;
    rc[c] = r.per_class[c].recall;
    iou[c] = r.per_class[c].iou;
  }
  r.mean = {mean_of_defined(p), mean_of_defined(rc), mean_of_defined(iou)};
}

}  // namespace detail

inline MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  for (int c = 0; c < kNumClasses; ++c) {
    const std::uint64_t tp = cm.counts[c][c];
    std::uint64_t fp = 0, fn = 0;
    for (int k = 0; k < kNumClasses; ++k) {
      if (k == c) continue;
      fp += cm.counts[k][c];
      fn += cm.counts[c][k];
    }
    r.per_class[c] = {detail::percent(tp, tp + fp), detail::percent(tp, tp + fn),
                      detail::percent(tp, tp + fp + fn)};
  }
  detail::fill_mean(r);
  return r;
}

// ---------------------------------------------------------------------------
// Dataset evaluation

/// How per-image results combine into the dataset score.
enum class Aggregation {
  Global,    // sum confusions over all pixels, then compute metrics
  PerImage,  // compute metrics per image, average defined values
};

struct ImageEvaluation {
  std::string name;
  ConfusionMatrix confusion;
  MetricsReport report;
};

struct DatasetEvaluation {
  MetricsReport report;
  ConfusionMatrix total;
  std::vector<ImageEvaluation> images;
  std::vector<std::string> missing;  // basenames lacking a counterpart
  std::vector<std::string> errors;   // "name: message" for unreadable pairs
};

/// Uses `dir/label` when it exists so dataset roots can be passed directly.
inline fs::path label_dir(const fs::path& dir) {
  const fs::path sub = dir / "label";
  return fs::is_directory(sub) ? sub : dir;
}

inline DatasetEvaluation evaluate_dataset(const fs::path& gt_dir, const fs::path& pred_dir,
                                          Aggregation aggregation = Aggregation::Global) {
  const fs::path gdir = label_dir(gt_dir), pdir = label_dir(pred_dir);
  if (!fs::is_directory(gdir)) throw IoError("not a directory: " + gt_dir.string());
  if (!fs::is_directory(pdir)) throw IoError("not a directory: " + pred_dir.string());
  const auto gt = png_basenames(gdir);
  const auto pred = png_basenames(pdir);

  DatasetEvaluation out;
  std::set_symmetric_difference(gt.begin(), gt.end(), pred.begin(), pred.end(),
                                std::back_inserter(out.missing));
  std::vector<std::string> both;
  std::set_intersection(gt.begin(), gt.end(), pred.begin(), pred.end(),
                        std::back_inserter(both));
  for (const auto& name : both) {
    try {
      const auto g = read_label(gdir / (name + ".png"));
      const auto p = read_label(pdir / (name + ".png"));
      ImageEvaluation e{name, confusion(g, p), {}};
      e.report = metrics(e.confusion);
      out.total += e.confusion;
      out.images.push_back(std::move(e));
    } catch (const Error& err) {
      out.errors.push_back(name + ": " + err.what());
    }
  }

  if (aggregation == Aggregation::Global) {
    out.report = metrics(out.total);
  } else {
    for (int c = 0; c < kNumClasses; ++c) {
      auto average = [&](auto field) {
        double sum = 0.0;
        int n = 0;
        for (const auto& img : out.images)
          if (const auto& v = img.report.per_class[c].*field) {
            sum += *v;
            ++n;
          }
        return n ? std::optional<double>(sum / n) : std::nullopt;
      };
      out.report.per_class[c] = {average(&ClassMetrics::precision),
                                 average(&ClassMetrics::recall), average(&ClassMetrics::iou)};
    }
    detail::fill_mean(out.report);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report formats

/// One row in the column layout Unknown | Drivable | Anomalies | All, each
/// with Pre Rec IoU.
inline std::string format_report_table(const MetricsReport& r, const std::string& label = "SSLG") {
  std::ostringstream os;
  auto cell = [&](const std::optional<double>& v) {
    os << std::setw(8);
    if (v)
      os << std::fixed << std::setprecision(2) << *v;
    else
      os << "n/a";
  };
  os << std::left << std::setw(12) << "" << std::right
     << "  Unknown Area              Drivable Area             Road Anomalies            All\n";
  os << std::left << std::setw(12) << "Approach" << std::right;
  for (int i = 0; i < 4; ++i) os << "  " << std::setw(8) << "Pre" << std::setw(8) << "Rec" << std::setw(8) << "IoU" << " ";
  os << "\n" << std::left << std::setw(12) << label << std::right;
  for (int c = 0; c <= kNumClasses; ++c) {
    const ClassMetrics& m = c < kNumClasses ? r.per_class[c] : r.mean;
    os << "  ";
    cell(m.precision);
    cell(m.recall);
    cell(m.iou);
    os << " ";
  }
  os << "\n";
  return os.str();
}

inline nlohmann::json to_json(const ClassMetrics& m) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"precision", opt(m.precision)}, {"recall", opt(m.recall)}, {"iou", opt(m.iou)}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  for (int c = 0; c < kNumClasses; ++c) j[kClassNames[c]] = to_json(r.per_class[c]);
  j["mean"] = to_json(r.mean);
  return j;
}

inline nlohmann::json to_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : cm.counts) rows.push_back(row);
  return rows;
}

inline nlohmann::json to_json(const DatasetEvaluation& e, Aggregation aggregation) {
  nlohmann::json j;
  j["aggregation"] = aggregation == Aggregation::Global ? "global" : "per_image";
  j["metrics"] = to_json(e.report);
  j["confusion"] = to_json(e.total);
  j["missing"] = e.missing;
  j["errors"] = e.errors;
  nlohmann::json images = nlohmann::json::array();
  for (const auto& img : e.images)
    images.push_back({{"name", img.name},
                      {"confusion", to_json(img.confusion)},
                      {"metrics", to_json(img.report)}});
  j["images"] = std::move(images);
  return j;
}

}  // namespace sslg
