// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ictm/app/app.hpp"
#include "ictm/metrics.hpp"

namespace {

using namespace ictm;
using namespace ictm::app;

int score_command(const std::string& pred_path, const std::string& truth_path) {
  const LabelField probe_pred = load_label_map(pred_path);
  const LabelField probe_truth = load_label_map(truth_path);
  const int n = std::max(probe_pred.num_phases(), probe_truth.num_phases());
  const LabelField pred = load_label_map(pred_path, n);
  const LabelField truth = load_label_map(truth_path, n);
  if (!(pred.grid() == truth.grid())) {
    throw UserError("prediction " + pred_path + " and truth " + truth_path + " differ in size");
  }
  const SegScore s = jaccard(pred, truth);
  nlohmann::ordered_json out;
  out["n_phases"] = n;
  out["jaccard_per_phase"] = s.per_phase;
  out["jaccard_mean"] = s.mean;
  out["pixel_accuracy"] = s.pixel_accuracy;
  out["phase_map"] = s.phase_map;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Iterative convolution-thresholding image segmentation"};
  cli.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run_cmd = cli.add_subcommand("run", "Segment an image described by a config file");
  run_cmd->add_option("config", config_path, "Config file (key = value lines)")->required();
  run_cmd->add_option("--set", overrides, "Override a config key: key=value")->take_all();

  std::string kind;
  std::string out_dir;
  StarParams star;
  TwoLevelParams two;
  int levels = 5;
  double max_bias = 0.5;
  auto* synth_cmd = cli.add_subcommand("synth", "Generate a synthetic image with ground truth");
  synth_cmd->add_option("kind", kind, "star | star-series | two-level")->required();
  synth_cmd->add_option("--out", out_dir, "Output directory")->required();
  synth_cmd->add_option("--size", star.size, "Star image side length in pixels");
  synth_cmd->add_option("--arms", star.arms, "Number of star arms");
  synth_cmd->add_option("--bias", star.bias, "Multiplicative bias strength in [0, 1)");
  synth_cmd->add_option("--noise", star.noise, "Additive Gaussian noise std-dev");
  synth_cmd->add_option("--seed", star.seed, "Noise seed");
  synth_cmd->add_option("--levels", levels, "star-series: number of bias levels");
  synth_cmd->add_option("--max-bias", max_bias, "star-series: strongest bias level");
  synth_cmd->add_option("--width", two.width, "two-level: width in pixels");
  synth_cmd->add_option("--height", two.height, "two-level: height in pixels");
  synth_cmd->add_option("--shape", two.shape, "two-level: split | disk");

  std::string pred_path;
  std::string truth_path;
  auto* score_cmd = cli.add_subcommand("score", "Jaccard similarity between two label maps");
  score_cmd->add_option("--pred", pred_path, "Predicted label map")->required();
  score_cmd->add_option("--truth", truth_path, "Ground-truth label map")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : kError;
  }

  try {
    if (*run_cmd) return run(load_config(config_path, overrides));
    if (*synth_cmd) {
      if (kind == "star") {
        write_synthetic(out_dir, synth_star(star));
      } else if (kind == "star-series") {
        for (int i = 0; i < levels; ++i) {
          StarParams level = star;
          level.bias = bias_level(i, levels, max_bias);
          write_synthetic(std::filesystem::path(out_dir) / ("level_" + std::to_string(i)),
                          synth_star(level));
        }
      } else if (kind == "two-level") {
        two.noise = star.noise;
        two.seed = star.seed;
        write_synthetic(out_dir, synth_two_level(two));
      } else {
        throw UserError("unknown synth kind '" + kind + "' (expected star, star-series, two-level)");
      }
      return 0;
    }
    if (*score_cmd) return score_command(pred_path, truth_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
