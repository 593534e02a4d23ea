#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "nmps/rng.hpp"

namespace nmps {

enum class Actor { Exploit, Explor };

// One environment interaction. Raw observations are stored; agents re-encode
// them with their own feature map at sample time.
struct Transition {
  Eigen::VectorXd state;
  int action = 0;
  Eigen::VectorXd next_state;
  Eigen::VectorXd task_w;
  int skill_index = -1;  // set for skill-conditioned runs
  double reward = 0.0;   // extrinsic; zero during reward-free pre-training
  Actor actor = Actor::Exploit;
  bool done = false;
  long step = 0;
  int state_id = -1;       // grid cell ids, -1 for continuous
  int next_state_id = -1;
};

enum class Sharing { Separate, ExploitCommon, ExplorCommon };

struct ReplayConfig {
  size_t capacity = 100000;
  Sharing sharing = Sharing::Separate;
  size_t batch_size = 64;
};

enum class BufferId { Exploit, Explor };

struct Batch {
  BufferId source;
  std::vector<Transition> items;
  std::vector<BufferId> provenance;  // one tag per item
};

// Per-variant replay storage. Separate mode keeps one FIFO ring per actor;
// the common modes keep a single shared ring that every transition enters and
// both agents sample from.
class ReplayBuffers {
 public:
  explicit ReplayBuffers(const ReplayConfig& cfg);

  void push(const Transition& tr);

  // Uniform sample with replacement from the buffer this variant assigns to
  // the given role; nullopt while that buffer holds fewer than batch_size
  // transitions (training step is skipped).
  std::optional<Batch> sample_for(Actor role, Rng& rng) const;

  bool ready_for(Actor role) const;
  BufferId source_for(Actor role) const;
  size_t size(BufferId id) const;
  const std::deque<Transition>& storage(BufferId id) const;
  const ReplayConfig& config() const { return cfg_; }

 private:
  const std::deque<Transition>& ring(BufferId id) const;
  std::deque<Transition>& ring(BufferId id);

  ReplayConfig cfg_;
  std::deque<Transition> exploit_;
  std::deque<Transition> explor_;
};

}  // namespace nmps
