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

#include "sparse_attack/tree_game.h"

#include <cmath>
#include <cstdio>

#include "sparse_attack/error.h"
#include "sparse_attack/rng.h"

namespace sparse_attack {
namespace {

constexpr uint64_t kMaxLeaves = uint64_t{1} << 20;

double FillerReward(uint64_t filler_seed, uint64_t leaf_index) {
  const uint64_t h = SplitMix64(DeriveSeed(filler_seed, 0xf111e7) ^ leaf_index);
  return static_cast<double>(h % 48);
}

std::vector<int> DrawSequence(Rng& rng, int length, int branching) {
  std::vector<int> seq(length);
  for (int& a : seq) a = rng.UniformInt(branching);
  return seq;
}

TreeGameSpec FillerTree(int T, int branching, uint64_t filler_seed) {
  TreeGameSpec tree;
  tree.branching = branching;
  tree.depth = T;
  tree.leaf_rewards.resize(IntPow(branching, T));
  for (uint64_t i = 0; i < tree.leaf_rewards.size(); ++i) {
    tree.leaf_rewards[i] = FillerReward(filler_seed, i);
  }
  return tree;
}

void SetLeaf(TreeGameSpec& tree, const std::vector<int>& seq, double reward) {
  tree.leaf_rewards[tree.LeafIndex(seq)] = reward;
}

}  // namespace

uint64_t IntPow(int base, int exponent) {
  uint64_t r = 1;
  for (int i = 0; i < exponent; ++i) r *= static_cast<uint64_t>(base);
  return r;
}

uint64_t TreeNodeId(int branching, int depth, uint64_t prefix_code) {
  // (b^d - 1) / (b - 1) nodes lie above depth d.
  const uint64_t above = (IntPow(branching, depth) - 1) / (branching - 1);
  return above + prefix_code;
}

uint64_t TreeGameSpec::LeafIndex(std::span<const int> sequence) const {
  if (static_cast<int>(sequence.size()) != depth) {
    Fail(ErrorCode::kInvalidArgument, "leaf sequence must have length T");
  }
  uint64_t index = 0;
  for (int a : sequence) {
    if (a < 0 || a >= branching) {
      Fail(ErrorCode::kInvalidArgument, "action out of range in leaf sequence");
    }
    index = index * branching + a;
  }
  return index;
}

std::vector<int> TreeGameSpec::LeafSequence(uint64_t index) const {
  std::vector<int> seq(depth);
  for (int i = depth - 1; i >= 0; --i) {
    seq[i] = static_cast<int>(index % branching);
    index /= branching;
  }
  return seq;
}

double TreeGameSpec::LeafReward(std::span<const int> sequence) const {
  return leaf_rewards[LeafIndex(sequence)];
}

void TreeGameSpec::Validate() const {
  if (branching < 2) Fail(ErrorCode::kInvalidArgument, "branching must be >= 2");
  if (depth < 1) Fail(ErrorCode::kInvalidArgument, "depth must be >= 1");
  if (std::log2(static_cast<double>(branching)) * depth > 20.0 + 1e-9) {
    Fail(ErrorCode::kTooLarge, "tree has more than 2^20 leaves");
  }
  if (leaf_rewards.size() != IntPow(branching, depth)) {
    Fail(ErrorCode::kInvalidArgument, "leaf_rewards must cover every leaf");
  }
  for (double r : leaf_rewards) {
    if (!std::isfinite(r)) Fail(ErrorCode::kNonFinite, "non-finite leaf reward");
  }
}

TreeGameSpec BuildExample1(int T, int t, int p, uint64_t filler_seed) {
  if (T < 4 || p < 0 || !(p < t) || !(t < T - 1)) {
    Fail(ErrorCode::kInvalidIndices, "example 1 needs 0 <= p < t < T-1, T >= 4");
  }
  TreeGameSpec tree = FillerTree(T, 2, filler_seed);
  Rng rng(DeriveSeed(filler_seed, 1));
  const std::vector<int> optimal = DrawSequence(rng, T, 2);
  const std::vector<int> prime = DrawSequence(rng, T - 2 - t, 2);
  const std::vector<int> double_prime = DrawSequence(rng, T - 1 - p, 2);

  TreeConstruction c;
  c.kind = TreeKind::kExample1;
  c.t = t;
  c.p = p;
  c.optimal = optimal;
  c.decoy.assign(optimal.begin(), optimal.begin() + t);
  c.decoy.push_back(1 - optimal[t]);
  c.decoy.insert(c.decoy.end(), prime.begin(), prime.end());
  c.worst = c.decoy;
  c.decoy.push_back(1);
  c.worst.push_back(0);
  c.runner_up.assign(optimal.begin(), optimal.begin() + p);
  c.runner_up.push_back(1 - optimal[p]);
  c.runner_up.insert(c.runner_up.end(), double_prime.begin(), double_prime.end());
  c.attack = {{t, 0, 1 - optimal[t]}, {T - 1, 0, 0}};

  SetLeaf(tree, c.optimal, 50.0);
  SetLeaf(tree, c.decoy, 49.0);
  SetLeaf(tree, c.worst, -100.0);
  SetLeaf(tree, c.runner_up, 48.0);
  tree.construction = std::move(c);
  return tree;
}

TreeGameSpec BuildExample2(int T, int p, uint64_t filler_seed) {
  if (T < 3 || p < 0 || !(p < T - 1)) {
    Fail(ErrorCode::kInvalidIndices, "example 2 needs 0 <= p < T-1, T >= 3");
  }
  TreeGameSpec tree = FillerTree(T, 3, filler_seed);
  Rng rng(DeriveSeed(filler_seed, 2));
  const std::vector<int> optimal = DrawSequence(rng, T, 3);
  const std::vector<int> prime = DrawSequence(rng, T - 2 - p, 3);
  const std::vector<int> double_prime = DrawSequence(rng, T - 1 - p, 3);

  TreeConstruction c;
  c.kind = TreeKind::kExample2;
  c.p = p;
  c.optimal = optimal;
  c.decoy.assign(optimal.begin(), optimal.begin() + p);
  c.decoy.push_back((optimal[p] + 1) % 3);
  c.decoy.insert(c.decoy.end(), prime.begin(), prime.end());
  c.worst = c.decoy;
  c.decoy.push_back(1);
  c.worst.push_back(0);
  c.runner_up.assign(optimal.begin(), optimal.begin() + p);
  c.runner_up.push_back((optimal[p] + 2) % 3);
  c.runner_up.insert(c.runner_up.end(), double_prime.begin(), double_prime.end());
  c.attack = {{p, 0, (optimal[p] + 1) % 3}, {T - 1, 0, 0}};

  SetLeaf(tree, c.optimal, 50.0);
  SetLeaf(tree, c.decoy, 49.0);
  SetLeaf(tree, c.worst, -100.0);
  SetLeaf(tree, c.runner_up, 48.0);
  tree.construction = std::move(c);
  return tree;
}

TreeGameSpec BuildRandomTree(int T, int branching, uint64_t seed) {
  if (T < 1 || branching < 2) {
    Fail(ErrorCode::kInvalidArgument, "random tree needs T >= 1, branching >= 2");
  }
  if (std::log2(static_cast<double>(branching)) * T > 20.0 + 1e-9) {
    Fail(ErrorCode::kTooLarge, "T * log2(branching) must not exceed 20");
  }
  TreeGameSpec tree;
  tree.branching = branching;
  tree.depth = T;
  tree.leaf_rewards.resize(IntPow(branching, T));
  Rng rng(DeriveSeed(seed, 3));
  for (double& r : tree.leaf_rewards) r = rng.UniformRange(-100, 50);
  TreeConstruction c;
  c.kind = TreeKind::kRandom;
  tree.construction = std::move(c);
  return tree;
}

TreeGameEnv::TreeGameEnv(TreeGameSpec tree) : tree_(std::move(tree)) {
  tree_.Validate();
  spec_.n_agents = 1;
  spec_.action_counts = {tree_.branching};
  spec_.obs_dims = {1};
  spec_.state_dim = 1;
  spec_.horizon = tree_.depth;
  spec_.discount = 1.0;
  spec_.initial_distribution = "single deterministic root";
}

EnvState TreeGameEnv::MakeState(int depth, uint64_t code, int prev_action) const {
  EnvState s;
  const double node = static_cast<double>(TreeNodeId(tree_.branching, depth, code));
  s.global_state = {node};
  s.observations = {{node}};
  s.step_index = depth;
  s.terminal = depth == tree_.depth;
  s.action_masks = {FullMask(tree_.branching)};
  s.prev_actions = {prev_action};
  s.internal = {depth, static_cast<int>(code)};
  return s;
}

EnvState TreeGameEnv::Reset(uint64_t /*seed*/) const { return MakeState(0, 0, -1); }

uint64_t TreeGameEnv::PrefixCode(const EnvState& state) {
  return static_cast<uint64_t>(state.internal[1]);
}

StepResult TreeGameEnv::Step(const EnvState& state, const JointAction& action) const {
  CheckStepPreconditions(spec_, state, action);
  const int a = action.actions[0];
  const int depth = Depth(state) + 1;
  const uint64_t code = PrefixCode(state) * tree_.branching + a;
  StepResult r;
  r.next = MakeState(depth, code, a);
  r.reward = depth == tree_.depth ? tree_.leaf_rewards[code] : 0.0;
  return r;
}

EnvState TreeGameEnv::StateAt(std::span<const int> prefix) const {
  EnvState s = Reset(0);
  for (int a : prefix) s = Step(s, JointAction{{a}}).next;
  return s;
}

std::string TreeGameEnv::Fingerprint() const {
  std::string bytes;
  bytes.reserve(tree_.leaf_rewards.size() * sizeof(double));
  for (double r : tree_.leaf_rewards) {
    bytes.append(reinterpret_cast<const char*>(&r), sizeof(double));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "tree:b%d:T%d:%016llx", tree_.branching,
                tree_.depth, static_cast<unsigned long long>(Fnv1a(bytes)));
  return buf;
}

}  // namespace sparse_attack
