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

#ifndef SPARSE_ATTACK_TREE_GAME_H_
#define SPARSE_ATTACK_TREE_GAME_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparse_attack/mmdp.h"

namespace sparse_attack {

enum class TreeKind { kCustom, kExample1, kExample2, kRandom };

// One forced action in an attack plan.
struct PlanStep {
  int step = 0;
  int agent = 0;
  int action = 0;

  bool operator==(const PlanStep&) const = default;
};

// How a constructed counterexample tree was built. All sequences are full
// length-T action sequences.
struct TreeConstruction {
  TreeKind kind = TreeKind::kCustom;
  int t = -1;  // second divergence step (first example only)
  int p = -1;  // first divergence step
  std::vector<int> optimal;        // leaf worth 50
  std::vector<int> decoy;          // leaf worth 49
  std::vector<int> worst;          // leaf worth -100
  std::vector<int> runner_up;      // leaf worth 48
  std::vector<PlanStep> attack;    // the two deviations that reach `worst`
};

// Deterministic single-agent game on a complete tree: the state is the
// action prefix and the only reward is paid on reaching a leaf at depth T.
struct TreeGameSpec {
  int branching = 2;
  int depth = 1;
  // Indexed by the leaf's action sequence read as a base-`branching` number
  // with the first action most significant.
  std::vector<double> leaf_rewards;
  std::optional<TreeConstruction> construction;

  uint64_t NumLeaves() const { return leaf_rewards.size(); }
  uint64_t LeafIndex(std::span<const int> sequence) const;
  std::vector<int> LeafSequence(uint64_t index) const;
  double LeafReward(std::span<const int> sequence) const;
  void Validate() const;
};

inline constexpr double kFillerMax = 47.0;

uint64_t IntPow(int base, int exponent);

// Binary counterexample: the optimal two-step attack deviates at step t
// (where the Q gap is smallest) and at the last step. Requires
// 0 <= p < t < T-1 and T >= 4.
TreeGameSpec BuildExample1(int T, int t, int p, uint64_t filler_seed);

// Ternary counterexample: the optimal deviation at step p is not the lowest-Q
// action. Requires 0 <= p < T-1 and T >= 3.
TreeGameSpec BuildExample2(int T, int p, uint64_t filler_seed);

// Leaves i.i.d. uniform integers in [-100, 50].
TreeGameSpec BuildRandomTree(int T, int branching, uint64_t seed);

// Node ids number the tree breadth-first from the root (id 0); the children
// of node n are n*b + 1 .. n*b + b.
uint64_t TreeNodeId(int branching, int depth, uint64_t prefix_code);

class TreeGameEnv : public Environment {
 public:
  explicit TreeGameEnv(TreeGameSpec tree);

  const MmdpSpec& spec() const override { return spec_; }
  EnvState Reset(uint64_t seed) const override;
  StepResult Step(const EnvState& state,
                  const JointAction& action) const override;
  std::string Fingerprint() const override;

  const TreeGameSpec& tree() const { return tree_; }

  // State reached after playing `prefix` from the root.
  EnvState StateAt(std::span<const int> prefix) const;
  static int Depth(const EnvState& state) { return state.internal[0]; }
  static uint64_t PrefixCode(const EnvState& state);

 private:
  EnvState MakeState(int depth, uint64_t code, int prev_action) const;

  TreeGameSpec tree_;
  MmdpSpec spec_;
};

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_TREE_GAME_H_
