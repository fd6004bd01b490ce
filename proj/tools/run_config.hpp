#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wsail::cli {

/// Flat INI-backed run configuration. Every field has a materialized
/// default so the saved snapshot always reproduces the run.
struct RunConfig {
  // [synth]
  int synth_classes = 5;
  int synth_train = 100;
  int synth_test = 50;
  int synth_scenes = 8;
  double synth_clip_seconds = 10.0;
  std::uint64_t synth_seed = 0;
  bool synth_visual = true;
  int synth_visual_dim = 64;

  // [nmf]
  int nmf_k = 20;
  int nmf_iterations = 200;
  std::uint64_t nmf_seed = 0;

  // [model]
  double learning_rate = 1e-5;
  int epochs = 10;
  std::uint64_t model_seed = 0;
  bool use_visual = false;

  // [proposals]
  bool tsp = true;
  bool ncp = false;

  // [enhance]
  std::optional<double> tau;
  std::string enhance_mode = "label-unknown";  // or "label-known"
  int enhance_class = -1;

  // [eval]
  std::vector<double> snr_levels = {0.0, -10.0, -20.0};
  std::uint64_t eval_seed = 0;

  // [run]
  int jobs = 1;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

}  // namespace wsail::cli
