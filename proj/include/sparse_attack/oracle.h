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

#ifndef SPARSE_ATTACK_ORACLE_H_
#define SPARSE_ATTACK_ORACLE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sparse_attack/tree_game.h"

namespace sparse_attack {

// Exact Q* of a tree game over its internal nodes (node ids as in
// TreeNodeId). Tree games are undiscounted.
class TreeQTable {
 public:
  TreeQTable(int branching, int depth);

  int branching() const { return branching_; }
  int depth() const { return depth_; }
  uint64_t num_internal() const { return num_internal_; }

  std::span<const double> Row(uint64_t node) const;
  std::span<double> MutableRow(uint64_t node);
  // Lowest-index argmax: the unattacked agent's action.
  int Greedy(uint64_t node) const;
  // Lowest-index argmin: the "lowest Q" replacement used by baselines.
  int Argmin(uint64_t node) const;

 private:
  int branching_;
  int depth_;
  uint64_t num_internal_;
  std::vector<double> q_;
};

TreeQTable ValueIteration(const TreeGameSpec& tree);

struct OracleResult {
  // Budget oracle: minimal team return. Regularized / timing oracles: the
  // attacker objective -return - cost * attack_count.
  double value = 0.0;
  double team_return = 0.0;
  int attack_count = 0;
  std::vector<PlanStep> witness;
};

// min team return over plans with at most `budget` deviations from the
// greedy action; ties prefer fewer deviations.
OracleResult OracleBudgetDp(const TreeGameSpec& tree, int budget);

// max over plans of (-return - lambda * deviations); ties prefer fewer
// deviations, then the greedy action, then the lowest action index.
OracleResult OracleRegDp(const TreeGameSpec& tree, double lambda);

// Timing-only attacker: at each node it may force the lowest-Q action at
// cost `cost`. Maximizes -return - cost * attacks.
OracleResult OracleForcedArgminDp(const TreeGameSpec& tree, double cost);

// Plays the greedy policy with the plan's forced actions substituted, using
// TreeGameEnv::Step. Returns the team return; `deviations` receives the number
// of steps where the played action differs from the greedy one.
double ReplayPlan(const TreeGameSpec& tree, const std::vector<PlanStep>& plan,
                  int* deviations = nullptr);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_ORACLE_H_
