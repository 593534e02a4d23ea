#include "nmps/explorer.hpp"

#include <cmath>
#include <stdexcept>

namespace nmps {

SkillDiscriminator make_discriminator(int num_skills, int obs_dim,
                                      double learning_rate) {
  if (num_skills < 2)
    throw std::invalid_argument("make_discriminator: need at least 2 skills");
  if (obs_dim < 1)
    throw std::invalid_argument("make_discriminator: obs_dim must be positive");
  SkillDiscriminator disc;
  disc.weights = Eigen::MatrixXd::Zero(num_skills, obs_dim);  // uniform start
  disc.learning_rate = learning_rate;
  return disc;
}

Eigen::VectorXd skill_probs(const SkillDiscriminator& disc,
                            const Eigen::VectorXd& obs) {
  if (obs.size() != disc.obs_dim())
    throw std::invalid_argument("skill_probs: observation dimension mismatch");
  const Eigen::VectorXd logits = disc.weights * obs;
  const Eigen::VectorXd shifted = (logits.array() - logits.maxCoeff()).exp();
  return shifted / shifted.sum();
}

DiscUpdateResult discriminator_update(const SkillDiscriminator& disc,
                                      const std::vector<DiscBatchItem>& batch) {
  if (batch.empty())
    throw std::invalid_argument("discriminator_update: batch must be nonempty");
  DiscUpdateResult result;
  result.disc = disc;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(disc.num_skills(), disc.obs_dim());
  double ce = 0.0;
  for (const auto& item : batch) {
    if (item.skill < 0 || item.skill >= disc.num_skills())
      throw std::invalid_argument("discriminator_update: skill label out of range");
    const Eigen::VectorXd p = skill_probs(disc, item.observation);
    ce -= std::max(std::log(p[item.skill]), -30.0);
    Eigen::VectorXd err = p;
    err[item.skill] -= 1.0;
    grad.noalias() += err * item.observation.transpose();
  }
  const double n = static_cast<double>(batch.size());
  result.mean_cross_entropy = ce / n;
  result.disc.weights -= disc.learning_rate * grad / n;
  return result;
}

ExplorerAgent make_aps_explorer(const SuccessorTable& values, const FeatureMap& feature,
                                bool feature_trainable) {
  if (values.feature_dim != 1)
    throw std::invalid_argument("make_aps_explorer: value table must have one channel");
  ExplorerAgent agent;
  agent.kind = ExplorerKind::ApsExplor;
  agent.values = values;
  agent.feature = feature;
  agent.feature.trainable = feature_trainable;
  agent.feature_or_skill_trainable = feature_trainable;
  return agent;
}

ExplorerAgent make_diayn_explorer(const SuccessorTable& values,
                                  const SkillDiscriminator& disc, int skill_dim,
                                  bool skill_trainable) {
  if (skill_dim < 2)
    throw std::invalid_argument("make_diayn_explorer: skill_dim must be >= 2");
  if (values.feature_dim != skill_dim)
    throw std::invalid_argument("make_diayn_explorer: value channels must equal skill_dim");
  if (disc.num_skills() != skill_dim)
    throw std::invalid_argument("make_diayn_explorer: discriminator size mismatch");
  ExplorerAgent agent;
  agent.kind = ExplorerKind::Diayn;
  agent.values = values;
  agent.discriminator = disc;
  agent.skill_dim = skill_dim;
  agent.feature_or_skill_trainable = skill_trainable;
  return agent;
}

namespace {

int channel_of(const ExplorerAgent& agent, int channel) {
  if (agent.kind == ExplorerKind::ApsExplor) return 0;
  if (channel < 0 || channel >= agent.skill_dim)
    throw std::invalid_argument("explorer: skill channel out of range");
  return channel;
}

Eigen::VectorXd channel_basis(const ExplorerAgent& agent, int channel) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(agent.values.feature_dim);
  e[channel] = 1.0;
  return e;
}

}  // namespace

int explorer_act(const ExplorerAgent& agent, int state_id, const Eigen::VectorXd& obs,
                 int channel, const PolicyConfig& cfg, Rng& rng) {
  const int ch = channel_of(agent, channel);
  return act(agent.values, state_id, obs, channel_basis(agent, ch), cfg, rng);
}

ExplorerUpdateResult explorer_update(ExplorerAgent& agent,
                                     const std::vector<Transition>& batch,
                                     const ExplorerRewards& rewards) {
  if (rewards.kind != agent.kind)
    throw std::invalid_argument("explorer_update: reward kind does not match agent kind");
  if (rewards.values.size() != batch.size())
    throw std::invalid_argument("explorer_update: reward count does not match batch");

  ExplorerUpdateResult result;

  if (agent.feature_or_skill_trainable) {
    if (agent.kind == ExplorerKind::ApsExplor) {
      std::vector<FeatureBatchItem> items;
      items.reserve(batch.size());
      for (const auto& tr : batch) items.push_back({tr.next_state, tr.task_w});
      auto trained = train_feature(agent.feature, items);
      agent.feature = trained.map;
      result.representation_updated = !trained.was_noop;
    } else {
      std::vector<DiscBatchItem> items;
      items.reserve(batch.size());
      for (const auto& tr : batch) items.push_back({tr.next_state, tr.skill_index});
      agent.discriminator = discriminator_update(agent.discriminator, items).disc;
      result.representation_updated = true;
    }
  }

  const double lr = agent.values.learning_rate;
  const double gamma = agent.values.gamma;
  double total = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const Transition& tr = batch[i];
    const double r = rewards.values[i];
    total += r;
    const int ch = channel_of(agent, agent.kind == ExplorerKind::Diayn ? tr.skill_index : 0);
    const Eigen::VectorXd e = channel_basis(agent, ch);
    double target = r;
    if (!tr.done) {
      const int a_star = greedy_action(agent.values, tr.next_state_id, tr.next_state, e);
      target += gamma * q_value(agent.values, tr.next_state_id, tr.next_state, a_star, e);
    }
    if (agent.values.repr == TableRepr::Tabular) {
      if (tr.state_id < 0 || tr.state_id >= agent.values.num_states ||
          tr.action < 0 || tr.action >= agent.values.num_actions)
        throw std::invalid_argument("explorer_update: transition outside table");
      const size_t slot = static_cast<size_t>(tr.state_id) * agent.values.num_actions + tr.action;
      double& q = agent.values.psi[slot][ch];
      q += lr * (target - q);
    } else {
      const double q = q_value(agent.values, tr.state_id, tr.state, tr.action, e);
      agent.values.linear[static_cast<size_t>(tr.action)].row(ch) +=
          lr * (target - q) * tr.state.transpose();
    }
  }
  result.mean_reward = batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
  return result;
}

int skill_prior_sample(int num_skills, Rng& rng) {
  if (num_skills < 2)
    throw std::invalid_argument("skill_prior_sample: need at least 2 skills");
  return static_cast<int>(rng.uniform_int(static_cast<uint64_t>(num_skills)));
}

int SkillSchedule::next(Rng& rng) {
  if (current < 0 || age >= resample_period) {
    current = skill_prior_sample(num_skills, rng);
    age = 0;
  }
  ++age;
  return current;
}

void SkillSchedule::reset() {
  current = -1;
  age = 0;
}

}  // namespace nmps
