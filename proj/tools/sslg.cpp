// sslg: self-supervised drivable-area / road-anomaly label generation.
//
//   sslg label --input DIR --output DIR --config FILE [--jobs N] [dump flags]
//   sslg eval  --gt DIR --pred DIR --report FILE [--per-image]
//   sslg synth --scene FILE --output DIR [--count N] [--seed S]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sslg/batch.hpp"

namespace {

struct Overrides {
  std::optional<double> alpha, kappa, sigma_s, tol, max_range;
  std::optional<int> bins;

  void apply(sslg::PipelineConfig& cfg) const {
    if (alpha) cfg.rgb.alpha = *alpha;
    if (kappa) cfg.rgb.kappa = *kappa;
    if (sigma_s) cfg.rgb.sigma_s = *sigma_s;
    if (tol) cfg.tol = *tol;
    if (bins) cfg.bins = *bins;
    if (max_range) cfg.max_range = *max_range;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised RGB-D label generator"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  sslg::LabelOptions label;
  auto* label_cmd = app.add_subcommand("label", "Generate labels for rgb/ + depth/ pairs");
  label_cmd->add_option("--input,-i", label.input, "Dataset directory with rgb/ and depth/")
      ->required();
  label_cmd->add_option("--output,-o", label.output, "Output directory")->required();
  label_cmd->add_option("--config,-c", config_path, "Pipeline config file")->required();
  label_cmd->add_option("--jobs,-j", label.jobs, "Worker threads (default: logical CPUs)")
      ->check(CLI::PositiveNumber);
  label_cmd->add_flag("--dump-vdisp", label.dump_vdisp, "Write v-disparity maps with lines");
  label_cmd->add_flag("--dump-depth-maps", label.dump_depth_maps, "Write M_D, D_o, D_f");
  label_cmd->add_flag("--dump-rgb-maps", label.dump_rgb_maps, "Write R_o, R_f");
  label_cmd->add_flag("--dump-viz", label.dump_viz, "Write color-coded labels");
  label_cmd->add_option("--alpha", overrides.alpha, "RGB weight in the fused anomaly map");
  label_cmd->add_option("--kappa", overrides.kappa, "Anomaly threshold");
  label_cmd->add_option("--sigma-s", overrides.sigma_s, "Blur scale divisor");
  label_cmd->add_option("--tol", overrides.tol, "Line membership tolerance, bins");
  label_cmd->add_option("--bins", overrides.bins, "Disparity bins");
  label_cmd->add_option("--max-range", overrides.max_range, "Depth cap, meters");

  std::string gt_dir, pred_dir, report;
  bool per_image = false;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted labels against ground truth");
  eval_cmd->add_option("--gt", gt_dir, "Ground-truth label directory")->required();
  eval_cmd->add_option("--pred", pred_dir, "Predicted label directory")->required();
  eval_cmd->add_option("--report", report, "Text report path; JSON goes next to it")
      ->required();
  eval_cmd->add_flag("--per-image", per_image, "Average per-image metrics instead of pooling pixels");

  std::string scene_path, synth_out;
  int count = 1;
  std::uint64_t seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Render synthetic rgb/depth/label triplets");
  synth_cmd->add_option("--scene", scene_path, "Scene spec file")->required();
  synth_cmd->add_option("--output,-o", synth_out, "Output directory")->required();
  synth_cmd->add_option("--count,-n", count, "Number of frames")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sslg::kExitOk : sslg::kExitUsage;
  }

  if (*label_cmd) {
    try {
      label.config = sslg::load_pipeline_config(config_path);
      overrides.apply(label.config);
      label.config.validate();
    } catch (const std::exception& e) {
      std::cerr << "sslg label: " << e.what() << "\n";
      return sslg::kExitUsage;
    }
    sslg::RunManifest manifest;
    const int code = sslg::cmd_label(label, &manifest);
    if (code != sslg::kExitUsage)
      std::cout << "labeled " << manifest.count(sslg::FrameStatus::Ok) << " ok, "
                << manifest.count(sslg::FrameStatus::Warning) << " warning, "
                << manifest.count(sslg::FrameStatus::Error) << " error\n";
    return code;
  }
  if (*eval_cmd)
    return sslg::cmd_eval(gt_dir, pred_dir, report,
                          per_image ? sslg::Aggregation::PerImage : sslg::Aggregation::Global);
  return sslg::cmd_synth(scene_path, synth_out, count, seed);
}
