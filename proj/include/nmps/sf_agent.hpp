#pragma once

#include <Eigen/Core>
#include <deque>
#include <optional>
#include <vector>

#include "nmps/replay.hpp"
#include "nmps/rng.hpp"

namespace nmps {

enum class TableRepr { Tabular, Linear };

// Q-values of the exploit agent are psi(s,a)^T w. Tabular mode stores one
// vector per (state, action); linear mode maps the observation through a
// per-action matrix.
struct SuccessorTable {
  TableRepr repr = TableRepr::Tabular;
  double gamma = 0.99;
  double learning_rate = 0.1;
  int feature_dim = 0;
  int num_actions = 0;
  int num_states = 0;                  // tabular
  std::vector<Eigen::VectorXd> psi;    // tabular: [state * num_actions + action]
  int obs_dim = 0;                     // linear
  std::vector<Eigen::MatrixXd> linear; // linear: one feature_dim x obs_dim map per action
};

SuccessorTable make_tabular_table(int num_states, int num_actions, int feature_dim,
                                  double gamma = 0.99, double learning_rate = 0.1);
SuccessorTable make_linear_table(int obs_dim, int num_actions, int feature_dim,
                                 double gamma = 0.99, double learning_rate = 0.01);

Eigen::VectorXd psi_value(const SuccessorTable& t, int state_id,
                          const Eigen::VectorXd& obs, int action);
double q_value(const SuccessorTable& t, int state_id, const Eigen::VectorXd& obs,
               int action, const Eigen::VectorXd& w);
Eigen::VectorXd q_values(const SuccessorTable& t, int state_id,
                         const Eigen::VectorXd& obs, const Eigen::VectorXd& w);
// Ties break toward the lowest action index.
int greedy_action(const SuccessorTable& t, int state_id, const Eigen::VectorXd& obs,
                  const Eigen::VectorXd& w);

// Bootstrap policy for the TD target. Greedy maximizes psi^T w over next
// actions; UniformExpected averages psi over next actions (policy evaluation
// of the uniform behavior policy, used by the DP-equivalence checks).
enum class Bootstrap { Greedy, UniformExpected };

// psi(s,a) += lr * (phi_next + gamma * psi(s', a') - psi(s,a)); the bootstrap
// term is dropped on done transitions. Linear mode applies the same target
// through the per-action map.
void td_update(SuccessorTable& t, const Transition& tr,
               const Eigen::VectorXd& phi_next, const Eigen::VectorXd& w,
               Bootstrap bootstrap = Bootstrap::Greedy);

struct PolicyConfig {
  enum class Kind { Boltzmann, EpsGreedy };
  Kind kind = Kind::Boltzmann;
  double temperature = 0.1;
  double epsilon = 0.1;
};

Eigen::VectorXd boltzmann_probs(const Eigen::VectorXd& qs, double temperature);
int boltzmann_sample(const Eigen::VectorXd& qs, double temperature, Rng& rng);
int act(const SuccessorTable& t, int state_id, const Eigen::VectorXd& obs,
        const Eigen::VectorXd& w, const PolicyConfig& cfg, Rng& rng);

// Sliding history backing the value promise discrepancy: k+1 state values and
// the k rewards between them.
struct PromiseWindow {
  explicit PromiseWindow(int k_steps = 10);
  int k;
  std::deque<double> values;   // at most k+1
  std::deque<double> rewards;  // at most k
  void push_value(double v);
  void push_reward(double r);
  void clear();
  bool full() const;
};

// |V(s_{t-k}) - sum_i gamma^i R_{t-k+1+i} - gamma^k V(s_t)|; zero on
// Bellman-consistent histories. nullopt while the window is not yet full
// (callers treat the missing signal as exploit mode).
std::optional<double> value_promise(const PromiseWindow& window, double gamma);

}  // namespace nmps
