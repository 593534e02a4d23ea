#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmps::oracle {

double brute_force_apt(const Eigen::VectorXd& h,
                       const std::vector<Eigen::VectorXd>& memory, int k,
                       int norm_exponent, bool average_top_k) {
  if (memory.empty()) return 0.0;
  std::vector<double> dists;
  for (const auto& p : memory) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i)
      d += std::pow(std::abs(h[i] - p[i]), norm_exponent);
    dists.push_back(d);
  }
  std::sort(dists.begin(), dists.end());
  const size_t kk = std::min(static_cast<size_t>(k), dists.size());
  if (!average_top_k) return std::log(1.0 + dists[kk - 1]);
  double sum = 0.0;
  for (size_t i = 0; i < kk; ++i) sum += dists[i];
  return std::log(1.0 + sum / static_cast<double>(kk));
}

Eigen::MatrixXd dp_uniform_successor_features(const EnvSpec& spec,
                                              const FeatureMap& map, double gamma) {
  const int S = num_states(spec);
  const int A = spec.num_actions();
  const int d = map.feature_dim();
  const int n = S * A;

  // next(s,a) under the deterministic grid dynamics.
  std::vector<int> next_state(static_cast<size_t>(n));
  Eigen::MatrixXd phi_next(n, d);
  for (int s = 0; s < S; ++s) {
    auto [r, c] = cell_of(spec, s);
    EnvState state;
    state.observation = observe_cell(spec, r, c);
    state.step_index = 0;
    state.state_id = s;
    for (int a = 0; a < A; ++a) {
      const StepResult sr = step(spec, state, a);
      next_state[static_cast<size_t>(s * A + a)] = sr.next.state_id;
      phi_next.row(s * A + a) = encode(map, sr.next.observation).transpose();
    }
  }

  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const int row = s * A + a;
      const int ns = next_state[static_cast<size_t>(row)];
      for (int a2 = 0; a2 < A; ++a2) system(row, ns * A + a2) -= gamma / A;
    }
  return system.partialPivLu().solve(phi_next);
}

Eigen::MatrixXd value_iteration_q(
    const EnvSpec& spec, const std::function<double(int, int, int)>& reward,
    double gamma, int iterations) {
  const EnvSpec continuing = strip_rewards(spec);
  const int S = num_states(continuing);
  const int A = continuing.num_actions();

  std::vector<int> next_state(static_cast<size_t>(S * A));
  for (int s = 0; s < S; ++s) {
    auto [r, c] = cell_of(continuing, s);
    EnvState state;
    state.observation = observe_cell(continuing, r, c);
    state.state_id = s;
    for (int a = 0; a < A; ++a)
      next_state[static_cast<size_t>(s * A + a)] = step(continuing, state, a).next.state_id;
  }

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(S, A);
  for (int it = 0; it < iterations; ++it) {
    Eigen::MatrixXd next_q(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const int ns = next_state[static_cast<size_t>(s * A + a)];
        next_q(s, a) = reward(s, a, ns) + gamma * q.row(ns).maxCoeff();
      }
    if ((next_q - q).cwiseAbs().maxCoeff() < 1e-12) return next_q;
    q = next_q;
  }
  return q;
}

Eigen::MatrixXd logistic_oracle_fit(const std::vector<Eigen::VectorXd>& xs,
                                    const std::vector<int>& labels, int num_classes,
                                    double lr, int steps) {
  const int dim = static_cast<int>(xs.front().size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(num_classes, dim);
  const double n = static_cast<double>(xs.size());
  for (int it = 0; it < steps; ++it) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(num_classes, dim);
    for (size_t i = 0; i < xs.size(); ++i) {
      Eigen::VectorXd logits = w * xs[i];
      Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
      p /= p.sum();
      p[labels[i]] -= 1.0;
      grad += p * xs[i].transpose();
    }
    w -= lr * grad / n;
  }
  return w;
}

double classification_accuracy(const Eigen::MatrixXd& weights,
                               const std::vector<Eigen::VectorXd>& xs,
                               const std::vector<int>& labels) {
  int correct = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    Eigen::Index best = 0;
    (weights * xs[i]).maxCoeff(&best);
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(xs.size());
}

}  // namespace nmps::oracle
