#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nmps/rng.hpp"

namespace nmps {

enum class EnvKind { FourRooms, PointMass2D };
enum class RoomLayout { Classic11, Open5 };
enum class TaskId { None, ReachNE, ReachSW };

// Small deterministic MDPs. FourRooms is an 11x11 grid split into four rooms
// connected by doorways (104 open cells), with an open 5x5 variant used by
// exact dynamic-programming checks. PointMass2D is a velocity-integrator on
// [-1,1]^2 with 8 unit-direction thrusts.
struct EnvSpec {
  EnvKind kind = EnvKind::FourRooms;
  RoomLayout layout = RoomLayout::Classic11;  // FourRooms only
  int horizon = 0;                            // 0 -> per-kind default
  TaskId task = TaskId::None;

  int obs_dim() const;
  int num_actions() const;
  int effective_horizon() const;
};

struct EnvState {
  Eigen::VectorXd observation;
  int step_index = 0;
  bool episode_done = false;
  int state_id = -1;  // cell index for grid envs, -1 for continuous
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
};

EnvState reset(const EnvSpec& spec, uint64_t seed);

// Deterministic dynamics; calling on a finished episode or with an action
// outside the action set throws. Extrinsic reward is 1 exactly when a reach
// task's goal is entered (the episode then terminates), 0 otherwise.
StepResult step(const EnvSpec& spec, const EnvState& state, int action);

// Exhaustive duplicate-free observations of every reachable cell, ordered by
// cell index. Grid environments only; throws for continuous ones.
std::vector<Eigen::VectorXd> enumerate_states(const EnvSpec& spec);
int num_states(const EnvSpec& spec);

// Grid helpers shared by tabular agents and test oracles.
int grid_side(const EnvSpec& spec);
bool is_wall(const EnvSpec& spec, int row, int col);
int cell_index(const EnvSpec& spec, int row, int col);  // -1 for walls
std::pair<int, int> cell_of(const EnvSpec& spec, int state_id);
Eigen::VectorXd observe_cell(const EnvSpec& spec, int row, int col);
std::pair<int, int> start_cell(const EnvSpec& spec);
std::pair<int, int> goal_cell(const EnvSpec& spec);  // reach tasks only

// Reward-stripped copy handed to pre-training loops: no task, no goal
// absorption, extrinsic reward identically zero.
EnvSpec strip_rewards(const EnvSpec& spec);

// Short identifier used in snapshots and configs:
// fourrooms | fourrooms5 | pointmass.
std::string env_code(const EnvSpec& spec);

}  // namespace nmps
