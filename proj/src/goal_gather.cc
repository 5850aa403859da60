// Copyright 2026 The Sparse Attack Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sparse_attack/goal_gather.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "sparse_attack/error.h"
#include "sparse_attack/rng.h"

namespace sparse_attack {

void GridTeamSpec::Validate() const {
  if (width < 1 || height < 1) Fail(ErrorCode::kInvalidArgument, "empty grid");
  if (n_agents < 1) Fail(ErrorCode::kInvalidArgument, "n_agents must be >= 1");
  if (n_goals != n_agents) {
    Fail(ErrorCode::kInvalidArgument, "n_goals must equal n_agents");
  }
  if (n_agents + n_goals > width * height) {
    Fail(ErrorCode::kInvalidArgument, "grid too small for distinct placements");
  }
  if (horizon < 1) Fail(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  if (obs_radius < 0) Fail(ErrorCode::kInvalidArgument, "obs_radius must be >= 0");
}

GoalGatherEnv::GoalGatherEnv(GridTeamSpec grid) : grid_(grid) {
  grid_.Validate();
  const int n = grid_.n_agents;
  spec_.n_agents = n;
  spec_.action_counts.assign(n, kGridActions);
  // own position (2), per goal (dx, dy, visible), per other agent (dx, dy, visible)
  spec_.obs_dims.assign(n, 2 + 3 * grid_.n_goals + 3 * (n - 1));
  // agent and goal coordinates, plus elapsed-time fraction
  spec_.state_dim = 2 * (n + grid_.n_goals) + 1;
  spec_.horizon = grid_.horizon;
  spec_.discount = 1.0;
  spec_.initial_distribution =
      "agents and goals on distinct uniformly drawn cells";
}

std::vector<Cell> GoalGatherEnv::AgentCells(const EnvState& state) const {
  std::vector<Cell> cells(grid_.n_agents);
  for (int i = 0; i < grid_.n_agents; ++i) {
    cells[i] = {state.internal[2 * i], state.internal[2 * i + 1]};
  }
  return cells;
}

std::vector<Cell> GoalGatherEnv::GoalCells(const EnvState& state) const {
  std::vector<Cell> cells(grid_.n_goals);
  const int base = 2 * grid_.n_agents;
  for (int g = 0; g < grid_.n_goals; ++g) {
    cells[g] = {state.internal[base + 2 * g], state.internal[base + 2 * g + 1]};
  }
  return cells;
}

int GoalGatherEnv::CoverageOf(const std::vector<Cell>& agents,
                              const std::vector<Cell>& goals) const {
  int covered = 0;
  for (const Cell& g : goals) {
    const auto on = std::count(agents.begin(), agents.end(), g);
    if (on == 1) ++covered;
  }
  return covered;
}

int GoalGatherEnv::Coverage(const EnvState& state) const {
  return CoverageOf(AgentCells(state), GoalCells(state));
}

double GoalGatherEnv::ReturnBound() const {
  return grid_.reward_win + grid_.horizon * std::abs(grid_.reward_step) +
         grid_.n_goals * std::abs(grid_.reward_progress);
}

EnvState GoalGatherEnv::Build(const std::vector<Cell>& agents,
                              const std::vector<Cell>& goals, int step,
                              int max_coverage,
                              std::vector<int> prev_actions) const {
  const int n = grid_.n_agents;
  const double sx = grid_.width > 1 ? 1.0 / (grid_.width - 1) : 1.0;
  const double sy = grid_.height > 1 ? 1.0 / (grid_.height - 1) : 1.0;

  EnvState s;
  s.step_index = step;
  s.prev_actions = std::move(prev_actions);
  s.internal.reserve(2 * (n + grid_.n_goals) + 1);
  for (const Cell& c : agents) {
    s.internal.push_back(c.x);
    s.internal.push_back(c.y);
  }
  for (const Cell& c : goals) {
    s.internal.push_back(c.x);
    s.internal.push_back(c.y);
  }
  s.internal.push_back(max_coverage);

  s.global_state.reserve(spec_.state_dim);
  for (const Cell& c : agents) {
    s.global_state.push_back(c.x * sx);
    s.global_state.push_back(c.y * sy);
  }
  for (const Cell& c : goals) {
    s.global_state.push_back(c.x * sx);
    s.global_state.push_back(c.y * sy);
  }
  s.global_state.push_back(static_cast<double>(step) / grid_.horizon);

  auto visible = [&](const Cell& from, const Cell& to) {
    if (grid_.obs_radius == 0) return true;
    return std::max(std::abs(from.x - to.x), std::abs(from.y - to.y)) <=
           grid_.obs_radius;
  };
  s.observations.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double>& o = s.observations[i];
    o.reserve(spec_.obs_dims[i]);
    const Cell& me = agents[i];
    o.push_back(me.x * sx);
    o.push_back(me.y * sy);
    auto push_relative = [&](const Cell& other) {
      if (visible(me, other)) {
        o.push_back((other.x - me.x) * sx);
        o.push_back((other.y - me.y) * sy);
        o.push_back(1.0);
      } else {
        o.insert(o.end(), {0.0, 0.0, 0.0});
      }
    };
    for (const Cell& g : goals) push_relative(g);
    for (int j = 0; j < n; ++j) {
      if (j != i) push_relative(agents[j]);
    }
  }

  const int coverage = CoverageOf(agents, goals);
  s.won = coverage == grid_.n_goals;
  s.terminal = s.won || step >= grid_.horizon;
  s.action_masks.assign(n, FullMask(kGridActions));
  return s;
}

EnvState GoalGatherEnv::MakeState(const std::vector<Cell>& agents,
                                  const std::vector<Cell>& goals) const {
  if (static_cast<int>(agents.size()) != grid_.n_agents ||
      static_cast<int>(goals.size()) != grid_.n_goals) {
    Fail(ErrorCode::kInvalidArgument, "placement arity mismatch");
  }
  for (const Cell& c : agents) {
    if (c.x < 0 || c.y < 0 || c.x >= grid_.width || c.y >= grid_.height) {
      Fail(ErrorCode::kInvalidArgument, "agent placed off grid");
    }
  }
  for (const Cell& c : goals) {
    if (c.x < 0 || c.y < 0 || c.x >= grid_.width || c.y >= grid_.height) {
      Fail(ErrorCode::kInvalidArgument, "goal placed off grid");
    }
  }
  EnvState s = Build(agents, goals, 0, 0, std::vector<int>(grid_.n_agents, -1));
  // A fresh state is always playable; coverage is scored by the first step.
  s.won = false;
  s.terminal = false;
  return s;
}

EnvState GoalGatherEnv::Reset(uint64_t seed) const {
  Rng rng(DeriveSeed(seed, 0x60a1));
  const int cells = grid_.width * grid_.height;
  const int needed = grid_.n_agents + grid_.n_goals;
  // Partial Fisher-Yates over the cell indices.
  std::vector<int> order(cells);
  for (int i = 0; i < cells; ++i) order[i] = i;
  for (int i = 0; i < needed; ++i) {
    const int j = i + rng.UniformInt(cells - i);
    std::swap(order[i], order[j]);
  }
  std::vector<Cell> agents(grid_.n_agents), goals(grid_.n_goals);
  for (int i = 0; i < grid_.n_agents; ++i) {
    agents[i] = {order[i] % grid_.width, order[i] / grid_.width};
  }
  for (int g = 0; g < grid_.n_goals; ++g) {
    const int c = order[grid_.n_agents + g];
    goals[g] = {c % grid_.width, c / grid_.width};
  }
  return Build(agents, goals, 0, 0, std::vector<int>(grid_.n_agents, -1));
}

StepResult GoalGatherEnv::Step(const EnvState& state,
                               const JointAction& action) const {
  CheckStepPreconditions(spec_, state, action);
  std::vector<Cell> agents = AgentCells(state);
  const std::vector<Cell> goals = GoalCells(state);
  for (int i = 0; i < grid_.n_agents; ++i) {
    Cell& c = agents[i];
    switch (action.actions[i]) {
      case kUp: c.y = std::max(0, c.y - 1); break;
      case kDown: c.y = std::min(grid_.height - 1, c.y + 1); break;
      case kLeft: c.x = std::max(0, c.x - 1); break;
      case kRight: c.x = std::min(grid_.width - 1, c.x + 1); break;
      default: break;
    }
  }
  const int max_before = state.internal.back();
  const int coverage = CoverageOf(agents, goals);
  const int max_after = std::max(max_before, coverage);

  StepResult r;
  r.reward = grid_.reward_step + grid_.reward_progress * (max_after - max_before);
  r.next = Build(agents, goals, state.step_index + 1, max_after, action.actions);
  if (r.next.won) r.reward += grid_.reward_win;
  return r;
}

std::string GoalGatherEnv::Fingerprint() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "goalgather:%dx%d:n%d:h%d:r%d:w%.17g:s%.17g:p%.17g",
                grid_.width, grid_.height, grid_.n_agents, grid_.horizon,
                grid_.obs_radius, grid_.reward_win, grid_.reward_step,
                grid_.reward_progress);
  return buf;
}

}  // namespace sparse_attack
