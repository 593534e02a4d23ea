#pragma once

#include <Eigen/Core>
#include <vector>

#include "nmps/features.hpp"
#include "nmps/replay.hpp"
#include "nmps/rng.hpp"
#include "nmps/sf_agent.hpp"

namespace nmps {

// Linear softmax classifier over raw observations; rows of the output always
// form a probability distribution.
struct SkillDiscriminator {
  Eigen::MatrixXd weights;  // num_skills x obs_dim
  double learning_rate = 0.1;
  int num_skills() const { return static_cast<int>(weights.rows()); }
  int obs_dim() const { return static_cast<int>(weights.cols()); }
};

SkillDiscriminator make_discriminator(int num_skills, int obs_dim,
                                      double learning_rate = 0.1);
Eigen::VectorXd skill_probs(const SkillDiscriminator& disc,
                            const Eigen::VectorXd& obs);

struct DiscBatchItem {
  Eigen::VectorXd observation;
  int skill = 0;
};

struct DiscUpdateResult {
  SkillDiscriminator disc;
  double mean_cross_entropy = 0.0;  // before the step
};

// One gradient step on the mean cross-entropy of the batch.
DiscUpdateResult discriminator_update(const SkillDiscriminator& disc,
                                      const std::vector<DiscBatchItem>& batch);

enum class ExplorerKind { ApsExplor, Diayn };

// The exploration agent. Action values live in a SuccessorTable whose feature
// axis serves as reward channels: one channel for the particle-entropy
// explorer, one channel per skill for the skill explorer. Scalar TD runs per
// channel; Q(s,a) for channel c is psi(s,a)[c].
struct ExplorerAgent {
  ExplorerKind kind = ExplorerKind::ApsExplor;
  SuccessorTable values;
  FeatureMap feature;               // ApsExplor: encoder behind its reward
  SkillDiscriminator discriminator; // Diayn
  bool feature_or_skill_trainable = true;
  int skill_dim = 0;                // Diayn only, >= 2
};

ExplorerAgent make_aps_explorer(const SuccessorTable& values, const FeatureMap& feature,
                                bool feature_trainable);
ExplorerAgent make_diayn_explorer(const SuccessorTable& values,
                                  const SkillDiscriminator& disc, int skill_dim,
                                  bool skill_trainable);

// Boltzmann sample over the explorer's action values for the active channel
// (0 for ApsExplor, the skill index for Diayn).
int explorer_act(const ExplorerAgent& agent, int state_id, const Eigen::VectorXd& obs,
                 int channel, const PolicyConfig& cfg, Rng& rng);

struct ExplorerRewards {
  ExplorerKind kind;
  std::vector<double> values;
};

struct ExplorerUpdateResult {
  bool representation_updated = false;  // feature/discriminator step applied
  double mean_reward = 0.0;
};

// One training step: the feature (ApsExplor) or discriminator (Diayn) is
// updated first when feature_or_skill_trainable, then one scalar TD step per
// batch element against the given rewards. Rewards must match the agent kind.
ExplorerUpdateResult explorer_update(ExplorerAgent& agent,
                                     const std::vector<Transition>& batch,
                                     const ExplorerRewards& rewards);

// Uniform categorical skill draw.
int skill_prior_sample(int num_skills, Rng& rng);

// Holds a skill fixed for resample_period consecutive steps.
struct SkillSchedule {
  int num_skills = 2;
  int resample_period = 50;
  int current = -1;
  int age = 0;
  int next(Rng& rng);
  void reset();
};

}  // namespace nmps
