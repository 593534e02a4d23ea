#include "nmps/pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace nmps {

namespace {

constexpr size_t kDiagMemory = 64;  // sliding feature memory for logged rewards

uint64_t episode_seed(uint64_t run_seed, long episode) {
  return splitmix64(run_seed ^ splitmix64(0x51ed0a1ULL + static_cast<uint64_t>(episode)));
}

size_t effective_warmup(const PretrainSettings& s) {
  return std::min<size_t>(s.warmup, static_cast<size_t>(s.total_steps / 10));
}

long resolved_snapshot_step(const PretrainSettings& s) {
  const long step = s.snapshot_step > 0 ? s.snapshot_step : s.total_steps / 2;
  return std::max<long>(1, std::min(step, s.total_steps));
}

// Unique-cell count for grids, occupancy-grid bin count for continuous
// observations (20 x 20 over [-1,1]^2 positions).
class CoverageTracker {
 public:
  explicit CoverageTracker(const EnvSpec& spec) {
    if (spec.kind == EnvKind::FourRooms)
      seen_.assign(static_cast<size_t>(num_states(spec)), 0);
    else
      seen_.assign(400, 0);
    grid_ = spec.kind == EnvKind::FourRooms;
  }

  void visit(const EnvState& state) {
    size_t idx;
    if (grid_) {
      idx = static_cast<size_t>(state.state_id);
    } else {
      const auto bin = [](double x) {
        int b = static_cast<int>((x + 1.0) / 2.0 * 20.0);
        return std::clamp(b, 0, 19);
      };
      idx = static_cast<size_t>(bin(state.observation[0]) * 20 + bin(state.observation[1]));
    }
    if (!seen_[idx]) {
      seen_[idx] = 1;
      ++count_;
    }
  }

  long count() const { return count_; }

 private:
  std::vector<char> seen_;
  bool grid_ = true;
  long count_ = 0;
};

class EntropyCounter {
 public:
  EntropyCounter(int num_actions, long window, long total)
      : counts_(2, std::vector<long>(static_cast<size_t>(num_actions), 0)),
        first_counted_(std::max<long>(0, total - window)) {}

  void record(long step, Mode mode, int action) {
    if (step < first_counted_) return;
    counts_[mode == Mode::Exploit ? 0 : 1][static_cast<size_t>(action)] += 1;
  }

  double entropy(Mode mode) const {
    const auto& c = counts_[mode == Mode::Exploit ? 0 : 1];
    long total = 0;
    for (long n : c) total += n;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (long n : c) {
      if (n == 0) continue;
      const double p = static_cast<double>(n) / static_cast<double>(total);
      h -= p * std::log(p);
    }
    return h;
  }

 private:
  std::vector<std::vector<long>> counts_;
  long first_counted_ = 0;
};

SuccessorTable make_value_table(const EnvSpec& spec, int channels, double gamma,
                                double lr_tabular, double lr_linear) {
  if (spec.kind == EnvKind::FourRooms)
    return make_tabular_table(num_states(spec), spec.num_actions(), channels, gamma,
                              lr_tabular);
  return make_linear_table(spec.obs_dim(), spec.num_actions(), channels, gamma, lr_linear);
}

// Batch exploration rewards for the particle-entropy explorer: each element's
// memory is the rest of the batch, encoded with the explorer's own map.
std::vector<double> apt_batch_rewards(const FeatureMap& map,
                                      const std::vector<Transition>& batch,
                                      const KnnConfig& knn, bool log1p_transform) {
  std::vector<Eigen::VectorXd> feats;
  feats.reserve(batch.size());
  for (const auto& tr : batch) feats.push_back(encode(map, tr.next_state));
  std::vector<double> rewards(batch.size(), 0.0);
  std::vector<Eigen::VectorXd> memory(feats.size() > 0 ? feats.size() - 1
                                                       : 0,
                                      Eigen::VectorXd());
  for (size_t j = 0; j < feats.size(); ++j) {
    size_t m = 0;
    for (size_t i = 0; i < feats.size(); ++i)
      if (i != j) memory[m++] = feats[i];
    double r = apt_reward(feats[j], memory, knn);
    if (log1p_transform) r = std::log1p(r);
    rewards[j] = r;
  }
  return rewards;
}

struct DiagMemory {
  std::deque<Eigen::VectorXd> next_observations;

  void push(const Eigen::VectorXd& obs) {
    next_observations.push_back(obs);
    if (next_observations.size() > kDiagMemory) next_observations.pop_front();
  }

  double apt_of(const FeatureMap& map, const Eigen::VectorXd& next_obs,
                const KnnConfig& knn) const {
    if (next_observations.empty()) return 0.0;
    std::vector<Eigen::VectorXd> mem;
    mem.reserve(next_observations.size());
    for (const auto& o : next_observations) mem.push_back(encode(map, o));
    return apt_reward(encode(map, next_obs), mem, knn);
  }
};

void validate_settings(const EnvSpec& env, const PretrainSettings& s) {
  if (s.total_steps < 1) throw std::invalid_argument("pretrain: total_steps must be positive");
  if (s.train_every < 1) throw std::invalid_argument("pretrain: train_every must be positive");
  if (s.explore_duration < 1)
    throw std::invalid_argument("pretrain: explore_duration must be positive");
  if (s.starting_mode_fraction < 0.0 || s.starting_mode_fraction > 1.0)
    throw std::invalid_argument("pretrain: starting_mode_fraction must be in [0,1]");
  if (s.batch_size < 1) throw std::invalid_argument("pretrain: batch_size must be positive");
  if (s.capacity < s.batch_size)
    throw std::invalid_argument("pretrain: capacity must be >= batch_size");
  const long starting = static_cast<long>(s.starting_mode_fraction * s.total_steps);
  if (starting + static_cast<long>(effective_warmup(s)) > s.total_steps)
    throw std::invalid_argument(
        "pretrain: total_steps must cover the starting-mode window plus warmup");
  if (env.effective_horizon() < 1)
    throw std::invalid_argument("pretrain: horizon must be >= 1");
}

Snapshot take_snapshot(const std::string& variant_name, const EnvSpec& env,
                       const PretrainSettings& s, long step, const FeatureMap& feature,
                       const SuccessorTable& table) {
  Snapshot snap;
  snap.meta.variant = variant_name;
  snap.meta.env = env_code(env);
  snap.meta.rho = s.rho;
  snap.meta.seed = s.seed;
  snap.meta.step = step;
  snap.feature = feature;
  snap.table = table;
  return snap;
}

}  // namespace

const char* reward_source_name(RewardSource source) {
  switch (source) {
    case RewardSource::Exploitation: return "exploitation";
    case RewardSource::Exploration: return "exploration";
    case RewardSource::Combined: return "combined";
  }
  return "?";
}

PretrainResult pretrain(const VariantConfig& variant, const EnvSpec& env,
                        const PretrainSettings& s) {
  validate_settings(env, s);
  const EnvSpec spec = strip_rewards(env);  // rewards hidden from pre-training
  const bool diayn = variant.explorer_reward == ExplorerKind::Diayn;
  if (variant.action_source == ActionSource::AlwaysExplorer && !diayn)
    throw std::invalid_argument("pretrain: AlwaysExplorer requires the skill explorer");

  Rng init_exploit(s.seed, Stream::InitExploit);
  Rng init_explor(s.seed, Stream::InitExplor);
  Rng task_rng(s.seed, Stream::TaskSample);
  Rng act_exploit_rng(s.seed, Stream::ExploitAction);
  Rng act_explor_rng(s.seed, Stream::ExplorAction);
  Rng controller_rng(s.seed, Stream::Controller);
  Rng replay_rng(s.seed, Stream::Replay);
  Rng skill_rng(s.seed, Stream::SkillPrior);

  FeatureMap exploit_feature =
      make_feature_map(variant.feature_dim, spec.obs_dim(), init_exploit, true, s.lr_feature);
  SuccessorTable exploit_table =
      make_value_table(spec, variant.feature_dim, s.gamma, s.lr_tabular, s.lr_linear);

  ExplorerAgent explorer;
  if (diayn) {
    explorer = make_diayn_explorer(
        make_value_table(spec, variant.skill_dim, s.gamma, s.lr_tabular, s.lr_linear),
        make_discriminator(variant.skill_dim, spec.obs_dim(), s.lr_discriminator),
        variant.skill_dim, variant.explorer_feature_trainable);
  } else {
    explorer = make_aps_explorer(
        make_value_table(spec, 1, s.gamma, s.lr_tabular, s.lr_linear),
        make_feature_map(variant.feature_dim, spec.obs_dim(), init_explor, true, s.lr_feature),
        variant.explorer_feature_trainable);
  }

  ReplayBuffers buffers({s.capacity, variant.buffer_sharing, s.batch_size});
  HomeoState homeo = make_homeo(s.rho);
  SwitchState sw;
  sw.explore_duration = s.explore_duration;
  sw.starting_mode_steps =
      s.exploit_only ? 0 : static_cast<long>(s.starting_mode_fraction * s.total_steps);
  PromiseWindow window(s.promise_k);
  SkillSchedule skills{diayn ? variant.skill_dim : 2, s.skill_resample_steps, -1, 0};

  const PolicyConfig exploit_policy{s.exploit_policy, s.tau_exploit, s.exploit_epsilon};
  const PolicyConfig explor_policy{PolicyConfig::Kind::Boltzmann, s.tau_explor, 0.0};

  CoverageTracker coverage(spec);
  EntropyCounter entropy(spec.num_actions(), s.entropy_window, s.total_steps);
  DiagMemory diag;

  PretrainResult result;
  result.log.reserve(static_cast<size_t>(s.total_steps));
  result.modes.reserve(static_cast<size_t>(s.total_steps));

  const size_t warmup = effective_warmup(s);
  const long snapshot_step = resolved_snapshot_step(s);
  bool snapshot_taken = false;

  long episode = 0;
  EnvState state = reset(spec, episode_seed(s.seed, episode));
  coverage.visit(state);
  TaskVector task = sample_task(variant.feature_dim, task_rng);

  for (long t = 0; t < s.total_steps; ++t) {
    if (state.episode_done) {
      ++episode;
      state = reset(spec, episode_seed(s.seed, episode));
      coverage.visit(state);
      window.clear();
      if (s.task_resample_steps == 0) task = sample_task(variant.feature_dim, task_rng);
    }
    if (s.task_resample_steps > 0 && t % s.task_resample_steps == 0)
      task = sample_task(variant.feature_dim, task_rng);

    const int skill = diayn ? skills.next(skill_rng) : -1;

    window.push_value(
        q_values(exploit_table, state.state_id, state.observation, task.w).maxCoeff());
    const std::optional<double> promise = value_promise(window, s.gamma);

    Mode mode;
    if (s.exploit_only) {
      mode = Mode::Exploit;
    } else if (variant.action_source == ActionSource::AlwaysExplorer) {
      mode = Mode::Explor;
    } else {
      ModeDecision decision = select_mode(sw, homeo, promise, t, controller_rng);
      sw = decision.sw;
      homeo = decision.homeo;
      mode = decision.mode;
    }

    int action;
    if (mode == Mode::Exploit) {
      action = act(exploit_table, state.state_id, state.observation, task.w,
                   exploit_policy, act_exploit_rng);
    } else {
      action = explorer_act(explorer, state.state_id, state.observation,
                            diayn ? skill : 0, explor_policy, act_explor_rng);
    }

    const StepResult sr = step(spec, state, action);

    Transition tr;
    tr.state = state.observation;
    tr.action = action;
    tr.next_state = sr.next.observation;
    tr.task_w = task.w;
    tr.skill_index = skill;
    tr.actor = mode == Mode::Exploit ? Actor::Exploit : Actor::Explor;
    tr.done = sr.done;
    tr.step = t;
    tr.state_id = state.state_id;
    tr.next_state_id = sr.next.state_id;
    buffers.push(tr);

    const double r_exploit_diag =
        visr_reward(encode(exploit_feature, sr.next.observation), task.w);
    double r_explor_diag;
    if (diayn) {
      r_explor_diag = diayn_reward(explorer.discriminator, sr.next.observation, skill);
    } else {
      r_explor_diag = diag.apt_of(explorer.feature, sr.next.observation, s.knn);
      if (s.log1p_exploration) r_explor_diag = std::log1p(r_explor_diag);
    }
    window.push_reward(r_exploit_diag);  // promise runs on the exploitation reward
    diag.push(sr.next.observation);
    coverage.visit(sr.next);
    entropy.record(t, mode, action);

    StepLogRow row;
    row.step = t;
    row.mode = mode == Mode::Exploit ? 0 : 1;
    row.reward_source =
        mode == Mode::Exploit ? RewardSource::Exploitation : RewardSource::Exploration;
    row.r_exploit = r_exploit_diag;
    row.r_explor = r_explor_diag;
    if (promise.has_value()) row.promise = *promise;
    row.coverage = coverage.count();
    result.log.push_back(row);
    result.modes.push_back(mode);

    if (t >= static_cast<long>(warmup) && t % s.train_every == 0) {
      if (auto batch = buffers.sample_for(Actor::Exploit, replay_rng)) {
        for (BufferId id : batch->provenance)
          result.provenance[0][id == BufferId::Exploit ? 0 : 1] += 1;
        std::vector<FeatureBatchItem> items;
        items.reserve(batch->items.size());
        for (const auto& b : batch->items) items.push_back({b.next_state, b.task_w});
        exploit_feature = train_feature(exploit_feature, items).map;
        for (const auto& b : batch->items)
          td_update(exploit_table, b, encode(exploit_feature, b.next_state), b.task_w);
      }
      if (!s.exploit_only) {
        if (auto batch = buffers.sample_for(Actor::Explor, replay_rng)) {
          for (BufferId id : batch->provenance)
            result.provenance[1][id == BufferId::Exploit ? 0 : 1] += 1;
          ExplorerRewards rewards;
          rewards.kind = explorer.kind;
          if (diayn) {
            rewards.values.reserve(batch->items.size());
            for (const auto& b : batch->items)
              rewards.values.push_back(
                  diayn_reward(explorer.discriminator, b.next_state, b.skill_index));
          } else {
            rewards.values =
                apt_batch_rewards(explorer.feature, batch->items, s.knn, s.log1p_exploration);
          }
          explorer_update(explorer, batch->items, rewards);
        }
      }
    }

    if (!snapshot_taken && t + 1 == snapshot_step) {
      result.snapshot =
          take_snapshot(variant.name, env, s, snapshot_step, exploit_feature, exploit_table);
      snapshot_taken = true;
    }

    state = sr.next;
  }

  result.coverage = coverage.count();
  result.exploit_entropy = entropy.entropy(Mode::Exploit);
  result.explor_entropy = entropy.entropy(Mode::Explor);
  result.exploit_feature = exploit_feature;
  result.exploit_table = exploit_table;
  result.explorer = explorer;
  result.has_explorer = !s.exploit_only;
  return result;
}

PretrainResult run_baseline(BaselineKind kind, const EnvSpec& env,
                            const PretrainSettings& s) {
  validate_settings(env, s);
  const EnvSpec spec = strip_rewards(env);

  Rng init_rng(s.seed, Stream::InitExploit);
  Rng task_rng(s.seed, Stream::TaskSample);
  Rng act_rng(s.seed, Stream::ExploitAction);
  Rng replay_rng(s.seed, Stream::Replay);
  Rng skill_rng(s.seed, Stream::SkillPrior);

  const int feature_dim = 10;
  FeatureMap feature =
      make_feature_map(feature_dim, spec.obs_dim(), init_rng, true, s.lr_feature);

  PretrainResult result;
  result.log.reserve(static_cast<size_t>(s.total_steps));
  CoverageTracker coverage(spec);
  EntropyCounter entropy(spec.num_actions(), s.entropy_window, s.total_steps);
  DiagMemory diag;

  const size_t warmup = effective_warmup(s);
  const long snapshot_step = resolved_snapshot_step(s);
  bool snapshot_taken = false;

  if (kind == BaselineKind::ApsMonolithic) {
    SuccessorTable table = make_value_table(spec, feature_dim, s.gamma, s.lr_tabular, s.lr_linear);
    ReplayBuffers buffers({s.capacity, Sharing::ExploitCommon, s.batch_size});
    const PolicyConfig policy{s.exploit_policy, s.tau_exploit, s.exploit_epsilon};

    long episode = 0;
    EnvState state = reset(spec, episode_seed(s.seed, episode));
    coverage.visit(state);
    TaskVector task = sample_task(feature_dim, task_rng);

    for (long t = 0; t < s.total_steps; ++t) {
      if (state.episode_done) {
        ++episode;
        state = reset(spec, episode_seed(s.seed, episode));
        coverage.visit(state);
        if (s.task_resample_steps == 0) task = sample_task(feature_dim, task_rng);
      }
      if (s.task_resample_steps > 0 && t % s.task_resample_steps == 0)
        task = sample_task(feature_dim, task_rng);

      const int action =
          act(table, state.state_id, state.observation, task.w, policy, act_rng);
      const StepResult sr = step(spec, state, action);

      Transition tr;
      tr.state = state.observation;
      tr.action = action;
      tr.next_state = sr.next.observation;
      tr.task_w = task.w;
      tr.actor = Actor::Exploit;
      tr.done = sr.done;
      tr.step = t;
      tr.state_id = state.state_id;
      tr.next_state_id = sr.next.state_id;
      buffers.push(tr);

      const double r_exploit_diag = visr_reward(encode(feature, sr.next.observation), task.w);
      double r_explor_diag = diag.apt_of(feature, sr.next.observation, s.knn);
      if (s.log1p_exploration) r_explor_diag = std::log1p(r_explor_diag);
      diag.push(sr.next.observation);
      coverage.visit(sr.next);
      entropy.record(t, Mode::Exploit, action);

      StepLogRow row;
      row.step = t;
      row.mode = -1;  // no mode-switching controller
      row.reward_source = RewardSource::Combined;
      row.r_exploit = r_exploit_diag;
      row.r_explor = r_explor_diag;
      row.coverage = coverage.count();
      result.log.push_back(row);

      if (t >= static_cast<long>(warmup) && t % s.train_every == 0) {
        if (auto batch = buffers.sample_for(Actor::Exploit, replay_rng)) {
          for (BufferId id : batch->provenance)
            result.provenance[0][id == BufferId::Exploit ? 0 : 1] += 1;
          std::vector<FeatureBatchItem> items;
          items.reserve(batch->items.size());
          for (const auto& b : batch->items) items.push_back({b.next_state, b.task_w});
          feature = train_feature(feature, items).map;

          // Combined-reward TD on Q = psi^T w: the scalar error moves psi
          // along w, which couples the exploration term into the successor
          // estimate (the monolithic design this baseline reproduces).
          std::vector<double> apt = apt_batch_rewards(feature, batch->items, s.knn,
                                                      s.log1p_exploration);
          for (size_t i = 0; i < batch->items.size(); ++i) {
            const Transition& b = batch->items[i];
            const double r =
                visr_reward(encode(feature, b.next_state), b.task_w) + apt[i];
            double target = r;
            if (!b.done) {
              const int a_star = greedy_action(table, b.next_state_id, b.next_state, b.task_w);
              target += s.gamma * q_value(table, b.next_state_id, b.next_state, a_star, b.task_w);
            }
            const double delta =
                target - q_value(table, b.state_id, b.state, b.action, b.task_w);
            if (table.repr == TableRepr::Tabular) {
              Eigen::VectorXd& cell =
                  table.psi[static_cast<size_t>(b.state_id) * table.num_actions + b.action];
              cell += table.learning_rate * delta * b.task_w;
            } else {
              table.linear[static_cast<size_t>(b.action)].noalias() +=
                  table.learning_rate * delta * b.task_w * b.state.transpose();
            }
          }
        }
      }

      if (!snapshot_taken && t + 1 == snapshot_step) {
        result.snapshot = take_snapshot("APS", env, s, snapshot_step, feature, table);
        snapshot_taken = true;
      }
      state = sr.next;
    }

    result.coverage = coverage.count();
    result.exploit_entropy = entropy.entropy(Mode::Exploit);
    result.exploit_feature = feature;
    result.exploit_table = table;
    result.has_explorer = false;
    return result;
  }

  // DiaynStandalone: skill agent + discriminator; the snapshot carries the
  // untouched feature map and a zero table so fine-tuning starts from scratch.
  const int skill_dim = s.baseline_skill_dim;
  ExplorerAgent agent = make_diayn_explorer(
      make_value_table(spec, skill_dim, s.gamma, s.lr_tabular, s.lr_linear),
      make_discriminator(skill_dim, spec.obs_dim(), s.lr_discriminator), skill_dim, true);
  SuccessorTable table = make_value_table(spec, feature_dim, s.gamma, s.lr_tabular, s.lr_linear);
  ReplayBuffers buffers({s.capacity, Sharing::ExplorCommon, s.batch_size});
  const PolicyConfig policy{PolicyConfig::Kind::Boltzmann, s.tau_explor, 0.0};
  SkillSchedule skills{skill_dim, s.skill_resample_steps, -1, 0};

  long episode = 0;
  EnvState state = reset(spec, episode_seed(s.seed, episode));
  coverage.visit(state);

  for (long t = 0; t < s.total_steps; ++t) {
    if (state.episode_done) {
      ++episode;
      state = reset(spec, episode_seed(s.seed, episode));
      coverage.visit(state);
    }
    const int skill = skills.next(skill_rng);
    const int action = explorer_act(agent, state.state_id, state.observation, skill,
                                    policy, act_rng);
    const StepResult sr = step(spec, state, action);

    Transition tr;
    tr.state = state.observation;
    tr.action = action;
    tr.next_state = sr.next.observation;
    tr.task_w = Eigen::VectorXd::Zero(feature_dim);
    tr.skill_index = skill;
    tr.actor = Actor::Explor;
    tr.done = sr.done;
    tr.step = t;
    tr.state_id = state.state_id;
    tr.next_state_id = sr.next.state_id;
    buffers.push(tr);

    const double r_diag = diayn_reward(agent.discriminator, sr.next.observation, skill);
    coverage.visit(sr.next);
    entropy.record(t, Mode::Explor, action);

    StepLogRow row;
    row.step = t;
    row.mode = -1;
    row.reward_source = RewardSource::Exploration;
    row.r_explor = r_diag;
    row.coverage = coverage.count();
    result.log.push_back(row);

    if (t >= static_cast<long>(warmup) && t % s.train_every == 0) {
      if (auto batch = buffers.sample_for(Actor::Explor, replay_rng)) {
        for (BufferId id : batch->provenance)
          result.provenance[1][id == BufferId::Exploit ? 0 : 1] += 1;
        ExplorerRewards rewards;
        rewards.kind = ExplorerKind::Diayn;
        rewards.values.reserve(batch->items.size());
        for (const auto& b : batch->items)
          rewards.values.push_back(
              diayn_reward(agent.discriminator, b.next_state, b.skill_index));
        explorer_update(agent, batch->items, rewards);
      }
    }

    if (!snapshot_taken && t + 1 == snapshot_step) {
      result.snapshot = take_snapshot("DIAYN", env, s, snapshot_step, feature, table);
      snapshot_taken = true;
    }
    state = sr.next;
  }

  result.coverage = coverage.count();
  result.explor_entropy = entropy.entropy(Mode::Explor);
  result.exploit_feature = feature;
  result.exploit_table = table;
  result.explorer = agent;
  result.has_explorer = true;
  return result;
}

TaskVector solve_w(const Eigen::MatrixXd& features, const Eigen::VectorXd& rewards,
                   double lambda) {
  if (features.rows() != rewards.size())
    throw std::invalid_argument("solve_w: sample count mismatch");
  if (features.rows() < features.cols())
    throw std::invalid_argument("solve_w: need at least feature_dim samples");
  if (lambda < 0.0) throw std::invalid_argument("solve_w: lambda must be >= 0");

  TaskVector task;
  task.origin = TaskOrigin::Regressed;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(features);
    if (qr.rank() < features.cols())
      throw std::invalid_argument(
          "solve_w: feature matrix is rank deficient; set lambda > 0");
    task.w = qr.solve(rewards);
    return task;
  }
  const Eigen::MatrixXd gram =
      features.transpose() * features +
      lambda * Eigen::MatrixXd::Identity(features.cols(), features.cols());
  task.w = gram.ldlt().solve(features.transpose() * rewards);
  return task;
}

namespace {

EvalPoint evaluate_policy(const EnvSpec& env, const SuccessorTable& table,
                          const Eigen::VectorXd& w, int episodes, long at_step,
                          uint64_t seed) {
  std::vector<double> returns;
  returns.reserve(static_cast<size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    EnvState state = reset(env, episode_seed(seed, 1000000 + e));
    double total = 0.0;
    while (!state.episode_done) {
      const int action = greedy_action(table, state.state_id, state.observation, w);
      StepResult sr = step(env, state, action);
      total += sr.reward;
      state = sr.next;
    }
    returns.push_back(total);
  }
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= returns.empty() ? 1.0 : static_cast<double>(returns.size());
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  if (returns.size() > 1) var /= static_cast<double>(returns.size() - 1);
  EvalPoint point;
  point.step = at_step;
  point.mean_return = mean;
  point.std_return = std::sqrt(var);
  return point;
}

}  // namespace

FinetuneResult finetune(const Snapshot& snap, const EnvSpec& env,
                        const FinetuneSettings& s) {
  if (snap.meta.env != env_code(env))
    throw std::invalid_argument("finetune: snapshot was trained on environment '" +
                                snap.meta.env + "', got '" + env_code(env) + "'");
  if (snap.feature.obs_dim() != env.obs_dim())
    throw std::invalid_argument("finetune: snapshot observation dimension mismatch");
  if (s.budget_steps < 1)
    throw std::invalid_argument("finetune: budget_steps must be positive");

  FeatureMap feature = snap.feature;
  feature.trainable = false;  // frozen during fine-tuning
  SuccessorTable table = snap.table;
  const int feature_dim = feature.feature_dim();

  Rng act_rng(s.seed, Stream::Finetune);
  Rng replay_rng(s.seed, Stream::Replay);
  const uint64_t eval_seed = splitmix64(s.seed ^ static_cast<uint64_t>(Stream::Eval));

  ReplayBuffers buffers({s.capacity, Sharing::ExploitCommon, s.batch_size});
  std::vector<Eigen::VectorXd> phi_rows;
  std::vector<double> reward_rows;

  TaskVector w;
  w.w = Eigen::VectorXd::Zero(feature_dim);
  w.origin = TaskOrigin::Regressed;
  bool have_w = false;
  const long min_fit = std::max<long>(feature_dim, 32);

  FinetuneResult result;
  result.curve.push_back(evaluate_policy(env, table, w.w, s.eval_episodes, 0, eval_seed));

  long episode = 0;
  EnvState state = reset(env, episode_seed(s.seed, episode));

  for (long t = 0; t < s.budget_steps; ++t) {
    if (state.episode_done) {
      ++episode;
      state = reset(env, episode_seed(s.seed, episode));
    }

    int action;
    if (!have_w) {
      action = static_cast<int>(act_rng.uniform_int(env.num_actions()));
    } else if (act_rng.bernoulli(s.epsilon)) {
      action = static_cast<int>(act_rng.uniform_int(env.num_actions()));
    } else {
      action = greedy_action(table, state.state_id, state.observation, w.w);
    }
    const StepResult sr = step(env, state, action);

    Transition tr;
    tr.state = state.observation;
    tr.action = action;
    tr.next_state = sr.next.observation;
    tr.task_w = w.w;
    tr.reward = sr.reward;
    tr.actor = Actor::Exploit;
    tr.done = sr.done;
    tr.step = t;
    tr.state_id = state.state_id;
    tr.next_state_id = sr.next.state_id;
    buffers.push(tr);

    phi_rows.push_back(encode(feature, sr.next.observation));
    reward_rows.push_back(sr.reward);

    if (!have_w && (t + 1) % s.w_refresh_steps == 0 &&
        static_cast<long>(phi_rows.size()) >= min_fit) {
      Eigen::MatrixXd phi(static_cast<Eigen::Index>(phi_rows.size()), feature_dim);
      Eigen::VectorXd r(static_cast<Eigen::Index>(reward_rows.size()));
      for (size_t i = 0; i < phi_rows.size(); ++i) {
        phi.row(static_cast<Eigen::Index>(i)) = phi_rows[i].transpose();
        r[static_cast<Eigen::Index>(i)] = reward_rows[i];
      }
      w = solve_w(phi, r, s.ridge_lambda);
      // Collection stays random until the regression carries any signal; an
      // all-zero reward history pins w at zero and exploiting it would freeze
      // the policy before the task is ever discovered. Greedy behavior only
      // depends on the task direction, so the inferred vector is normalized
      // once inference succeeds and then held fixed through phase 2.
      if (w.w.lpNorm<Eigen::Infinity>() > 0.0) {
        w.w.normalize();
        have_w = true;
        // Rescale the warm start so zero-shot values live on the task's
        // return scale. Positive scaling leaves the greedy policy untouched
        // but keeps stale optimistic entries from dominating learned values.
        double max_q = 0.0;
        if (table.repr == TableRepr::Tabular) {
          for (const auto& cell : table.psi) max_q = std::max(max_q, std::abs(cell.dot(w.w)));
        } else {
          // |Q| <= ||W_a^T w||_1 for observations bounded by 1.
          for (int a = 0; a < table.num_actions; ++a)
            max_q = std::max(max_q,
                             (table.linear[static_cast<size_t>(a)].transpose() * w.w)
                                 .lpNorm<1>());
        }
        const double scale = 1.0 / std::max(1.0, max_q);
        if (table.repr == TableRepr::Tabular) {
          for (auto& cell : table.psi) cell *= scale;
        } else {
          for (auto& m : table.linear) m *= scale;
        }
      }
    }

    if (have_w && t % s.train_every == 0) {
      if (auto batch = buffers.sample_for(Actor::Exploit, replay_rng)) {
        // Critic-style update on the true task reward: Q = psi^T w moves
        // along the regressed task vector, the pre-trained psi serving as
        // the warm start. The step is normalized so Q changes by lr * delta.
        const double w_sq = std::max(w.w.squaredNorm(), 1e-12);
        for (const auto& b : batch->items) {
          double target = b.reward;
          if (!b.done) {
            const int a_star = greedy_action(table, b.next_state_id, b.next_state, w.w);
            target += table.gamma * q_value(table, b.next_state_id, b.next_state, a_star, w.w);
          }
          const double delta = target - q_value(table, b.state_id, b.state, b.action, w.w);
          if (table.repr == TableRepr::Tabular) {
            table.psi[static_cast<size_t>(b.state_id) * table.num_actions + b.action] +=
                table.learning_rate * delta * w.w / w_sq;
          } else {
            table.linear[static_cast<size_t>(b.action)].noalias() +=
                table.learning_rate * delta * (w.w / w_sq) * b.state.transpose();
          }
        }
      }
    }

    if ((t + 1) % s.eval_interval == 0 || t + 1 == s.budget_steps) {
      result.curve.push_back(
          evaluate_policy(env, table, w.w, s.eval_episodes, t + 1, eval_seed));
    }
    state = sr.next;
  }

  result.w = w;
  result.table = table;
  result.final_return = result.curve.back().mean_return;
  return result;
}

}  // namespace nmps
