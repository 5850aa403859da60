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

#ifndef SPARSE_ATTACK_GOAL_GATHER_H_
#define SPARSE_ATTACK_GOAL_GATHER_H_

#include <string>
#include <utility>
#include <vector>

#include "sparse_attack/mmdp.h"

namespace sparse_attack {

// Cooperative gridworld: n agents must simultaneously occupy n goal cells,
// one agent per goal.
struct GridTeamSpec {
  int width = 5;
  int height = 5;
  int n_agents = 2;
  int n_goals = 2;
  int horizon = 40;
  int obs_radius = 0;  // Chebyshev radius; 0 = full observability
  double reward_win = 10.0;
  double reward_step = -0.1;
  double reward_progress = 0.5;

  void Validate() const;
};

enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
inline constexpr int kGridActions = 5;

struct Cell {
  int x = 0;
  int y = 0;

  bool operator==(const Cell&) const = default;
};

class GoalGatherEnv : public Environment {
 public:
  explicit GoalGatherEnv(GridTeamSpec grid);

  const MmdpSpec& spec() const override { return spec_; }
  EnvState Reset(uint64_t seed) const override;
  StepResult Step(const EnvState& state,
                  const JointAction& action) const override;
  bool HasWinCondition() const override { return true; }
  std::string Fingerprint() const override;

  const GridTeamSpec& grid() const { return grid_; }

  // Builds a step-0 state from explicit placements (cells need not be
  // distinct).
  EnvState MakeState(const std::vector<Cell>& agents,
                     const std::vector<Cell>& goals) const;

  std::vector<Cell> AgentCells(const EnvState& state) const;
  std::vector<Cell> GoalCells(const EnvState& state) const;
  // Number of goals holding exactly one agent.
  int Coverage(const EnvState& state) const;
  // Upper bound on the absolute episode return.
  double ReturnBound() const;

 private:
  EnvState Build(const std::vector<Cell>& agents, const std::vector<Cell>& goals,
                 int step, int max_coverage, std::vector<int> prev_actions) const;
  int CoverageOf(const std::vector<Cell>& agents,
                 const std::vector<Cell>& goals) const;

  GridTeamSpec grid_;
  MmdpSpec spec_;
};

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_GOAL_GATHER_H_
