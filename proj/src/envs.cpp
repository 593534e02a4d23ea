#include "nmps/envs.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace nmps {
namespace {

constexpr int kFourRoomsHorizon = 200;
constexpr int kPointMassHorizon = 100;

// Classic 11x11 four-rooms interior. Vertical wall at column 5 with doorways
// at rows 2 and 9; horizontal walls at row 5 (left, doorway col 1) and row 6
// (right, doorway col 8). 121 - 17 = 104 open cells.
bool classic11_wall(int row, int col) {
  if (col == 5 && row != 2 && row != 9) return true;
  if (row == 5 && (col == 0 || col == 2 || col == 3 || col == 4)) return true;
  if (row == 6 && (col == 6 || col == 7 || col == 9 || col == 10)) return true;
  return false;
}

struct GridTables {
  int side = 0;
  std::vector<int> index_of_cell;          // side*side, -1 for walls
  std::vector<std::pair<int, int>> cells;  // open cells by index
};

const GridTables& tables_for(RoomLayout layout) {
  static const GridTables classic = [] {
    GridTables t;
    t.side = 11;
    t.index_of_cell.assign(11 * 11, -1);
    for (int r = 0; r < 11; ++r)
      for (int c = 0; c < 11; ++c)
        if (!classic11_wall(r, c)) {
          t.index_of_cell[r * 11 + c] = static_cast<int>(t.cells.size());
          t.cells.emplace_back(r, c);
        }
    return t;
  }();
  static const GridTables open5 = [] {
    GridTables t;
    t.side = 5;
    t.index_of_cell.assign(5 * 5, -1);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        t.index_of_cell[r * 5 + c] = static_cast<int>(t.cells.size());
        t.cells.emplace_back(r, c);
      }
    return t;
  }();
  return layout == RoomLayout::Classic11 ? classic : open5;
}

void require_grid(const EnvSpec& spec, const char* op) {
  if (spec.kind != EnvKind::FourRooms)
    throw std::runtime_error(std::string(op) + ": unsupported for continuous environments");
}

EnvState make_grid_state(const EnvSpec& spec, int row, int col, int step_index) {
  EnvState s;
  s.observation = observe_cell(spec, row, col);
  s.step_index = step_index;
  s.episode_done = false;
  s.state_id = cell_index(spec, row, col);
  return s;
}

constexpr double kPmVelocityDecay = 0.9;
constexpr double kPmThrust = 0.05;
constexpr double kPmGoalRadius = 0.2;

std::pair<double, double> pm_goal(TaskId task) {
  return task == TaskId::ReachNE ? std::make_pair(0.6, 0.6) : std::make_pair(-0.6, -0.6);
}

}  // namespace

int EnvSpec::obs_dim() const { return kind == EnvKind::FourRooms ? 2 : 4; }

int EnvSpec::num_actions() const { return kind == EnvKind::FourRooms ? 4 : 8; }

int EnvSpec::effective_horizon() const {
  if (horizon > 0) return horizon;
  return kind == EnvKind::FourRooms ? kFourRoomsHorizon : kPointMassHorizon;
}

int grid_side(const EnvSpec& spec) {
  require_grid(spec, "grid_side");
  return tables_for(spec.layout).side;
}

bool is_wall(const EnvSpec& spec, int row, int col) {
  require_grid(spec, "is_wall");
  const auto& t = tables_for(spec.layout);
  if (row < 0 || col < 0 || row >= t.side || col >= t.side) return true;
  return t.index_of_cell[row * t.side + col] < 0;
}

int cell_index(const EnvSpec& spec, int row, int col) {
  require_grid(spec, "cell_index");
  const auto& t = tables_for(spec.layout);
  if (row < 0 || col < 0 || row >= t.side || col >= t.side) return -1;
  return t.index_of_cell[row * t.side + col];
}

std::pair<int, int> cell_of(const EnvSpec& spec, int state_id) {
  require_grid(spec, "cell_of");
  const auto& t = tables_for(spec.layout);
  if (state_id < 0 || state_id >= static_cast<int>(t.cells.size()))
    throw std::invalid_argument("cell_of: state id out of range");
  return t.cells[static_cast<size_t>(state_id)];
}

Eigen::VectorXd observe_cell(const EnvSpec& spec, int row, int col) {
  require_grid(spec, "observe_cell");
  const auto& t = tables_for(spec.layout);
  const double half = (t.side - 1) / 2.0;
  Eigen::VectorXd obs(2);
  obs << (col - half) / half, (half - row) / half;
  return obs;
}

std::pair<int, int> start_cell(const EnvSpec& spec) {
  require_grid(spec, "start_cell");
  return {0, 0};
}

std::pair<int, int> goal_cell(const EnvSpec& spec) {
  require_grid(spec, "goal_cell");
  if (spec.task == TaskId::None)
    throw std::invalid_argument("goal_cell: environment has no task");
  const int side = tables_for(spec.layout).side;
  return spec.task == TaskId::ReachNE ? std::make_pair(0, side - 1)
                                      : std::make_pair(side - 1, 0);
}

EnvState reset(const EnvSpec& spec, uint64_t seed) {
  if (spec.kind == EnvKind::FourRooms) {
    auto [r, c] = start_cell(spec);
    return make_grid_state(spec, r, c, 0);
  }
  Rng rng(seed, Stream::EnvReset);
  EnvState s;
  s.observation = Eigen::VectorXd::Zero(4);
  s.observation[0] = rng.uniform(-0.05, 0.05);
  s.observation[1] = rng.uniform(-0.05, 0.05);
  s.step_index = 0;
  s.episode_done = false;
  s.state_id = -1;
  return s;
}

StepResult step(const EnvSpec& spec, const EnvState& state, int action) {
  if (state.episode_done)
    throw std::invalid_argument("step: episode already finished");
  if (action < 0 || action >= spec.num_actions())
    throw std::invalid_argument("step: action outside action set");

  StepResult out;
  const int horizon = spec.effective_horizon();

  if (spec.kind == EnvKind::FourRooms) {
    auto [r, c] = cell_of(spec, state.state_id);
    static constexpr std::array<std::pair<int, int>, 4> kMoves = {
        {{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};  // up, down, left, right
    int nr = r + kMoves[static_cast<size_t>(action)].first;
    int nc = c + kMoves[static_cast<size_t>(action)].second;
    if (is_wall(spec, nr, nc)) {
      nr = r;
      nc = c;
    }
    out.next = make_grid_state(spec, nr, nc, state.step_index + 1);
    bool at_goal = false;
    if (spec.task != TaskId::None) {
      auto [gr, gc] = goal_cell(spec);
      at_goal = (nr == gr && nc == gc);
    }
    out.reward = at_goal ? 1.0 : 0.0;
    out.done = at_goal || out.next.step_index >= horizon;
    out.next.episode_done = out.done;
    return out;
  }

  const double px = state.observation[0], py = state.observation[1];
  const double vx = state.observation[2], vy = state.observation[3];
  constexpr double two_pi = 6.283185307179586476925286766559;
  const double angle = two_pi * action / 8.0;
  double nvx = kPmVelocityDecay * vx + kPmThrust * std::cos(angle);
  double nvy = kPmVelocityDecay * vy + kPmThrust * std::sin(angle);
  double npx = std::clamp(px + nvx, -1.0, 1.0);
  double npy = std::clamp(py + nvy, -1.0, 1.0);

  out.next.observation = Eigen::VectorXd(4);
  out.next.observation << npx, npy, nvx, nvy;
  out.next.step_index = state.step_index + 1;
  out.next.state_id = -1;
  bool at_goal = false;
  if (spec.task != TaskId::None) {
    auto [gx, gy] = pm_goal(spec.task);
    const double dx = npx - gx, dy = npy - gy;
    at_goal = dx * dx + dy * dy <= kPmGoalRadius * kPmGoalRadius;
  }
  out.reward = at_goal ? 1.0 : 0.0;
  out.done = at_goal || out.next.step_index >= horizon;
  out.next.episode_done = out.done;
  return out;
}

std::vector<Eigen::VectorXd> enumerate_states(const EnvSpec& spec) {
  require_grid(spec, "enumerate_states");
  const auto& t = tables_for(spec.layout);
  std::vector<Eigen::VectorXd> out;
  out.reserve(t.cells.size());
  for (const auto& [r, c] : t.cells) out.push_back(observe_cell(spec, r, c));
  return out;
}

int num_states(const EnvSpec& spec) {
  require_grid(spec, "num_states");
  return static_cast<int>(tables_for(spec.layout).cells.size());
}

EnvSpec strip_rewards(const EnvSpec& spec) {
  EnvSpec stripped = spec;
  stripped.task = TaskId::None;
  return stripped;
}

std::string env_code(const EnvSpec& spec) {
  if (spec.kind == EnvKind::PointMass2D) return "pointmass";
  return spec.layout == RoomLayout::Classic11 ? "fourrooms" : "fourrooms5";
}

}  // namespace nmps
