#include "nmps/sf_agent.hpp"

#include <cmath>
#include <stdexcept>

namespace nmps {

SuccessorTable make_tabular_table(int num_states, int num_actions, int feature_dim,
                                  double gamma, double learning_rate) {
  if (num_states < 1 || num_actions < 1 || feature_dim < 1)
    throw std::invalid_argument("make_tabular_table: dimensions must be positive");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw std::invalid_argument("make_tabular_table: gamma must be in (0,1)");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("make_tabular_table: learning rate must be positive");
  SuccessorTable t;
  t.repr = TableRepr::Tabular;
  t.gamma = gamma;
  t.learning_rate = learning_rate;
  t.feature_dim = feature_dim;
  t.num_actions = num_actions;
  t.num_states = num_states;
  t.psi.assign(static_cast<size_t>(num_states) * num_actions,
               Eigen::VectorXd::Zero(feature_dim));
  return t;
}

SuccessorTable make_linear_table(int obs_dim, int num_actions, int feature_dim,
                                 double gamma, double learning_rate) {
  if (obs_dim < 1 || num_actions < 1 || feature_dim < 1)
    throw std::invalid_argument("make_linear_table: dimensions must be positive");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw std::invalid_argument("make_linear_table: gamma must be in (0,1)");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("make_linear_table: learning rate must be positive");
  SuccessorTable t;
  t.repr = TableRepr::Linear;
  t.gamma = gamma;
  t.learning_rate = learning_rate;
  t.feature_dim = feature_dim;
  t.num_actions = num_actions;
  t.obs_dim = obs_dim;
  t.linear.assign(static_cast<size_t>(num_actions),
                  Eigen::MatrixXd::Zero(feature_dim, obs_dim));
  return t;
}

namespace {

size_t tabular_slot(const SuccessorTable& t, int state_id, int action) {
  if (state_id < 0 || state_id >= t.num_states)
    throw std::invalid_argument("successor table: state id out of range");
  if (action < 0 || action >= t.num_actions)
    throw std::invalid_argument("successor table: action out of range");
  return static_cast<size_t>(state_id) * t.num_actions + action;
}

}  // namespace

Eigen::VectorXd psi_value(const SuccessorTable& t, int state_id,
                          const Eigen::VectorXd& obs, int action) {
  if (t.repr == TableRepr::Tabular) return t.psi[tabular_slot(t, state_id, action)];
  if (action < 0 || action >= t.num_actions)
    throw std::invalid_argument("successor table: action out of range");
  if (obs.size() != t.obs_dim)
    throw std::invalid_argument("successor table: observation dimension mismatch");
  return t.linear[static_cast<size_t>(action)] * obs;
}

double q_value(const SuccessorTable& t, int state_id, const Eigen::VectorXd& obs,
               int action, const Eigen::VectorXd& w) {
  if (w.size() != t.feature_dim)
    throw std::invalid_argument("q_value: task vector dimension mismatch");
  return psi_value(t, state_id, obs, action).dot(w);
}

Eigen::VectorXd q_values(const SuccessorTable& t, int state_id,
                         const Eigen::VectorXd& obs, const Eigen::VectorXd& w) {
  Eigen::VectorXd qs(t.num_actions);
  for (int a = 0; a < t.num_actions; ++a) qs[a] = q_value(t, state_id, obs, a, w);
  return qs;
}

int greedy_action(const SuccessorTable& t, int state_id, const Eigen::VectorXd& obs,
                  const Eigen::VectorXd& w) {
  const Eigen::VectorXd qs = q_values(t, state_id, obs, w);
  int best = 0;
  for (int a = 1; a < t.num_actions; ++a)
    if (qs[a] > qs[best]) best = a;
  return best;
}

void td_update(SuccessorTable& t, const Transition& tr,
               const Eigen::VectorXd& phi_next, const Eigen::VectorXd& w,
               Bootstrap bootstrap) {
  if (phi_next.size() != t.feature_dim)
    throw std::invalid_argument("td_update: feature dimension mismatch");
  Eigen::VectorXd target = phi_next;
  if (!tr.done) {
    Eigen::VectorXd boot;
    if (bootstrap == Bootstrap::Greedy) {
      const int a_star = greedy_action(t, tr.next_state_id, tr.next_state, w);
      boot = psi_value(t, tr.next_state_id, tr.next_state, a_star);
    } else {
      boot = Eigen::VectorXd::Zero(t.feature_dim);
      for (int a = 0; a < t.num_actions; ++a)
        boot += psi_value(t, tr.next_state_id, tr.next_state, a);
      boot /= t.num_actions;
    }
    target += t.gamma * boot;
  }
  if (t.repr == TableRepr::Tabular) {
    Eigen::VectorXd& cell = t.psi[tabular_slot(t, tr.state_id, tr.action)];
    cell += t.learning_rate * (target - cell);
  } else {
    const Eigen::VectorXd current = psi_value(t, tr.state_id, tr.state, tr.action);
    t.linear[static_cast<size_t>(tr.action)].noalias() +=
        t.learning_rate * (target - current) * tr.state.transpose();
  }
}

Eigen::VectorXd boltzmann_probs(const Eigen::VectorXd& qs, double temperature) {
  if (temperature <= 0.0)
    throw std::invalid_argument("boltzmann_probs: temperature must be positive");
  const Eigen::VectorXd scaled = (qs.array() - qs.maxCoeff()) / temperature;
  Eigen::VectorXd p = scaled.array().exp();
  return p / p.sum();
}

int boltzmann_sample(const Eigen::VectorXd& qs, double temperature, Rng& rng) {
  const Eigen::VectorXd p = boltzmann_probs(qs, temperature);
  double u = rng.uniform01();
  for (Eigen::Index a = 0; a + 1 < p.size(); ++a) {
    u -= p[a];
    if (u < 0.0) return static_cast<int>(a);
  }
  return static_cast<int>(p.size() - 1);
}

int act(const SuccessorTable& t, int state_id, const Eigen::VectorXd& obs,
        const Eigen::VectorXd& w, const PolicyConfig& cfg, Rng& rng) {
  if (cfg.kind == PolicyConfig::Kind::Boltzmann)
    return boltzmann_sample(q_values(t, state_id, obs, w), cfg.temperature, rng);
  if (cfg.epsilon < 0.0 || cfg.epsilon > 1.0)
    throw std::invalid_argument("act: epsilon must be in [0,1]");
  if (rng.bernoulli(cfg.epsilon))
    return static_cast<int>(rng.uniform_int(static_cast<uint64_t>(t.num_actions)));
  return greedy_action(t, state_id, obs, w);
}

PromiseWindow::PromiseWindow(int k_steps) : k(k_steps) {
  if (k_steps < 1)
    throw std::invalid_argument("PromiseWindow: k must be positive");
}

void PromiseWindow::push_value(double v) {
  values.push_back(v);
  if (values.size() > static_cast<size_t>(k) + 1) values.pop_front();
}

void PromiseWindow::push_reward(double r) {
  rewards.push_back(r);
  if (rewards.size() > static_cast<size_t>(k)) rewards.pop_front();
}

void PromiseWindow::clear() {
  values.clear();
  rewards.clear();
}

bool PromiseWindow::full() const {
  return values.size() == static_cast<size_t>(k) + 1 &&
         rewards.size() == static_cast<size_t>(k);
}

std::optional<double> value_promise(const PromiseWindow& window, double gamma) {
  if (!window.full()) return std::nullopt;
  double promised = window.values.front();
  double discount = 1.0;
  for (double r : window.rewards) {
    promised -= discount * r;
    discount *= gamma;
  }
  promised -= discount * window.values.back();  // discount == gamma^k here
  return std::abs(promised);
}

}  // namespace nmps
