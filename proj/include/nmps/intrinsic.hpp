#pragma once

#include <Eigen/Core>
#include <vector>

namespace nmps {

struct SkillDiscriminator;

// k-NN particle settings for the exploration reward. norm_exponent is the
// exponent n of the ||.||_n^n distance; average_top_k=false uses only the
// k-th neighbor distance instead of the top-k mean.
struct KnnConfig {
  int k = 12;
  int norm_exponent = 2;
  bool average_top_k = true;
};

// Exploitation reward: dot product of two unit vectors, in [-1, 1].
double visr_reward(const Eigen::VectorXd& phi_s, const Eigen::VectorXd& w);

// Exploration reward: log(1 + mean distance to the k nearest memory points),
// always >= 0. A memory smaller than k falls back to all available points
// with the mean renormalized by the actual count.
double apt_reward(const Eigen::VectorXd& h,
                  const std::vector<Eigen::VectorXd>& memory,
                  const KnnConfig& cfg);

// Monolithic combined reward: exploitation + exploration.
double aps_combined(const Eigen::VectorXd& phi_s, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& h,
                    const std::vector<Eigen::VectorXd>& memory,
                    const KnnConfig& cfg);

// Skill reward log q(skill|s) - log p(skill) under a uniform prior.
// Log-probabilities are floored at -30.
double diayn_reward(const SkillDiscriminator& disc,
                    const Eigen::VectorXd& observation, int skill_index);

}  // namespace nmps
