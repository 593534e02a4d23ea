#pragma once

#include <string>
#include <vector>

#include "nmps/envs.hpp"
#include "nmps/pipeline.hpp"

namespace nmps {

// Harness-level run description. Every field has a documented default and a
// flat dotted config key; unknown keys are rejected by name.
struct RunConfig {
  std::string variant = "NMPS_X_sep^ex";  // variant name, APS, or DIAYN
  std::string env = "fourrooms";          // fourrooms | fourrooms5 | pointmass
  std::string task = "reach_ne";          // none | reach_ne | reach_sw
  std::vector<double> rho_list = {0.01};
  std::vector<uint64_t> seeds = {1};
  long steps = 100000;
  long finetune_steps = 20000;  // 0 disables fine-tuning
  std::string out_dir = "out";
  bool out_dir_explicit = false;
  int workers = 1;
  int horizon = 0;  // 0 -> per-environment default

  long snapshot_step = 0;
  int train_every = 2;
  size_t warmup = 1000;
  double starting_mode_fraction = 0.05;
  int explore_duration = 100;
  long task_resample_steps = 0;
  int skill_resample_steps = 50;
  int promise_k = 10;
  bool exploit_only = false;
  long entropy_window = 10000;

  double gamma = 0.99;
  double lr_tabular = 0.1;
  double lr_linear = 0.01;
  double lr_feature = 0.01;
  double lr_discriminator = 0.1;
  double tau_exploit = 0.1;
  double tau_explor = 0.3;
  std::string exploit_policy = "boltzmann";  // boltzmann | eps_greedy
  double exploit_epsilon = 0.1;

  int knn_k = 12;
  int knn_norm_exponent = 2;
  bool knn_average_top_k = true;
  bool log1p_exploration = false;

  size_t capacity = 100000;
  size_t batch_size = 64;

  int baseline_skill_dim = 16;

  double ridge_lambda = 1e-6;
  long w_refresh_steps = 500;
  long eval_interval = 1000;
  int eval_episodes = 5;
  double finetune_epsilon = 0.1;
};

// Applies "key = value" lines; origin names the source in error messages.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);
RunConfig parse_config_file(const std::string& path);

// Full resolved key set in fixed order; parsing the echo reproduces the
// configuration exactly.
std::string render_config(const RunConfig& cfg);

EnvSpec env_spec_of(const RunConfig& cfg);
PretrainSettings pretrain_settings_of(const RunConfig& cfg, double rho, uint64_t seed);
FinetuneSettings finetune_settings_of(const RunConfig& cfg, uint64_t seed);

bool is_baseline_name(const std::string& name);
BaselineKind baseline_kind_of(const std::string& name);

}  // namespace nmps
