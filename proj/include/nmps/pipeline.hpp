#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

#include "nmps/controller.hpp"
#include "nmps/envs.hpp"
#include "nmps/explorer.hpp"
#include "nmps/features.hpp"
#include "nmps/intrinsic.hpp"
#include "nmps/replay.hpp"
#include "nmps/sf_agent.hpp"
#include "nmps/snapshot.hpp"
#include "nmps/variant.hpp"

namespace nmps {

enum class RewardSource { Exploitation, Exploration, Combined };

struct StepLogRow {
  long step = 0;
  int mode = -1;  // 0 exploit, 1 explor, -1 no controller (baselines)
  RewardSource reward_source = RewardSource::Exploitation;
  double r_exploit = 0.0;
  double r_explor = 0.0;
  double promise = std::numeric_limits<double>::quiet_NaN();
  long coverage = 0;
};

struct PretrainSettings {
  long total_steps = 100000;
  double rho = 0.01;
  uint64_t seed = 1;
  long snapshot_step = 0;  // 0 -> total_steps / 2

  int train_every = 2;
  size_t batch_size = 64;
  size_t capacity = 100000;
  size_t warmup = 1000;  // effective warmup is min(warmup, total_steps / 10)

  KnnConfig knn;
  bool log1p_exploration = false;

  double gamma = 0.99;
  double lr_tabular = 0.1;
  double lr_linear = 0.01;
  double lr_feature = 0.01;
  double lr_discriminator = 0.1;
  double tau_exploit = 0.1;
  double tau_explor = 0.3;
  PolicyConfig::Kind exploit_policy = PolicyConfig::Kind::Boltzmann;
  double exploit_epsilon = 0.1;  // EpsGreedy only

  int promise_k = 10;
  int explore_duration = 100;
  double starting_mode_fraction = 0.05;
  long task_resample_steps = 0;  // 0 -> once per episode
  int skill_resample_steps = 50;

  bool exploit_only = false;   // ablation: the explorer is never consulted
  int baseline_skill_dim = 16; // DiaynStandalone
  long entropy_window = 10000;
};

struct PretrainResult {
  Snapshot snapshot;  // taken at snapshot_step
  std::vector<StepLogRow> log;
  std::vector<Mode> modes;  // one per step; empty for baselines

  long coverage = 0;
  double exploit_entropy = 0.0;  // action entropy over the final window
  double explor_entropy = 0.0;

  FeatureMap exploit_feature;  // final parameters (the snapshot holds mid-run)
  SuccessorTable exploit_table;
  ExplorerAgent explorer;
  bool has_explorer = false;

  // Sampled-batch accounting: [role][buffer] item counts, indexed by
  // Actor/BufferId enum order.
  long provenance[2][2] = {{0, 0}, {0, 0}};
};

// The pre-training loop: starting mode, homeostatic mode switching on the
// exploit agent's value promise discrepancy, per-variant replay sharing and
// reward routing, training both agents at the configured cadence.
PretrainResult pretrain(const VariantConfig& variant, const EnvSpec& env,
                        const PretrainSettings& s);

enum class BaselineKind { ApsMonolithic, DiaynStandalone };

// ApsMonolithic: one agent trained on the combined reward, no controller.
// DiaynStandalone: skill agent plus discriminator only. Snapshots share the
// NMPS format.
PretrainResult run_baseline(BaselineKind kind, const EnvSpec& env,
                            const PretrainSettings& s);

// Ridge regression min_w ||Phi w - r||^2 + lambda ||w||^2. lambda == 0
// requires full column rank and throws otherwise.
TaskVector solve_w(const Eigen::MatrixXd& features, const Eigen::VectorXd& rewards,
                   double lambda);

struct FinetuneSettings {
  long budget_steps = 20000;
  uint64_t seed = 1;
  double ridge_lambda = 1e-6;
  long w_refresh_steps = 500;
  long eval_interval = 1000;
  int eval_episodes = 5;
  double epsilon = 0.1;
  int train_every = 2;
  size_t batch_size = 64;
  size_t capacity = 100000;
};

struct EvalPoint {
  long step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
};

struct FinetuneResult {
  std::vector<EvalPoint> curve;
  TaskVector w;
  SuccessorTable table;
  double final_return = 0.0;
};

// Task inference then exploitation: extrinsic rewards are regressed onto
// encoded next states (refreshed every w_refresh_steps), the successor table
// keeps training against the regressed task vector under epsilon-greedy
// acting, and frozen greedy evaluation episodes trace the learning curve.
// The feature map is frozen throughout.
FinetuneResult finetune(const Snapshot& snap, const EnvSpec& env,
                        const FinetuneSettings& s);

const char* reward_source_name(RewardSource source);

}  // namespace nmps
