#include "nmps/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmps/explorer.hpp"

namespace nmps {

double visr_reward(const Eigen::VectorXd& phi_s, const Eigen::VectorXd& w) {
  if (phi_s.size() != w.size())
    throw std::invalid_argument("visr_reward: dimension mismatch");
  return phi_s.dot(w);
}

double apt_reward(const Eigen::VectorXd& h,
                  const std::vector<Eigen::VectorXd>& memory,
                  const KnnConfig& cfg) {
  if (cfg.k < 1 || cfg.norm_exponent < 1)
    throw std::invalid_argument("apt_reward: k and norm_exponent must be >= 1");
  if (memory.empty()) return 0.0;

  std::vector<double> dists;
  dists.reserve(memory.size());
  for (const auto& p : memory) {
    if (p.size() != h.size())
      throw std::invalid_argument("apt_reward: memory dimension mismatch");
    double d = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      const double diff = std::abs(h[i] - p[i]);
      double term = diff;
      for (int e = 1; e < cfg.norm_exponent; ++e) term *= diff;
      d += term;
    }
    dists.push_back(d);
  }

  const size_t kk = std::min(static_cast<size_t>(cfg.k), dists.size());
  std::nth_element(dists.begin(), dists.begin() + (kk - 1), dists.end());
  if (!cfg.average_top_k) return std::log1p(dists[kk - 1]);
  double sum = 0.0;
  for (size_t i = 0; i < kk; ++i) sum += dists[i];
  return std::log1p(sum / static_cast<double>(kk));
}

double aps_combined(const Eigen::VectorXd& phi_s, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& h,
                    const std::vector<Eigen::VectorXd>& memory,
                    const KnnConfig& cfg) {
  return visr_reward(phi_s, w) + apt_reward(h, memory, cfg);
}

double diayn_reward(const SkillDiscriminator& disc,
                    const Eigen::VectorXd& observation, int skill_index) {
  const int n = disc.num_skills();
  if (skill_index < 0 || skill_index >= n)
    throw std::invalid_argument("diayn_reward: skill index out of range");
  const Eigen::VectorXd probs = skill_probs(disc, observation);
  const double log_q = std::max(std::log(probs[skill_index]), -30.0);
  const double log_prior = std::max(std::log(1.0 / n), -30.0);
  return log_q - log_prior;
}

}  // namespace nmps
