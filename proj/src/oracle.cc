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

#include "sparse_attack/oracle.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sparse_attack/error.h"

namespace sparse_attack {
namespace {

// Value of a subtree under some plan: the accumulated objective and the
// number of attacks it uses.
struct Entry {
  double gain = 0.0;
  int count = 0;
};

uint64_t LevelOffset(int branching, int depth) {
  return (IntPow(branching, depth) - 1) / (branching - 1);
}

// Bottom-up DP tables over (depth, prefix code, resource slot); levels[d]
// holds b^d * slots entries.
struct TreeDp {
  int branching;
  int depth;
  int slots;
  std::vector<std::vector<Entry>> levels;
};

}  // namespace

TreeQTable::TreeQTable(int branching, int depth)
    : branching_(branching),
      depth_(depth),
      num_internal_(LevelOffset(branching, depth)),
      q_(num_internal_ * branching, 0.0) {}

std::span<const double> TreeQTable::Row(uint64_t node) const {
  if (node >= num_internal_) Fail(ErrorCode::kInvalidArgument, "node is not internal");
  return {q_.data() + node * branching_, static_cast<size_t>(branching_)};
}

std::span<double> TreeQTable::MutableRow(uint64_t node) {
  if (node >= num_internal_) Fail(ErrorCode::kInvalidArgument, "node is not internal");
  return {q_.data() + node * branching_, static_cast<size_t>(branching_)};
}

int TreeQTable::Greedy(uint64_t node) const {
  const auto row = Row(node);
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

int TreeQTable::Argmin(uint64_t node) const {
  const auto row = Row(node);
  return static_cast<int>(std::min_element(row.begin(), row.end()) - row.begin());
}

TreeQTable ValueIteration(const TreeGameSpec& tree) {
  tree.Validate();
  const int b = tree.branching;
  const int T = tree.depth;
  TreeQTable table(b, T);
  // values of the level below, indexed by prefix code
  std::vector<double> below = tree.leaf_rewards;
  for (int d = T - 1; d >= 0; --d) {
    const uint64_t width = IntPow(b, d);
    std::vector<double> here(width);
    for (uint64_t c = 0; c < width; ++c) {
      auto row = table.MutableRow(LevelOffset(b, d) + c);
      for (int a = 0; a < b; ++a) row[a] = below[c * b + a];
      here[c] = *std::max_element(row.begin(), row.end());
    }
    below = std::move(here);
  }
  return table;
}

namespace {

// Runs the DP. `better(x, y)` says whether candidate x beats y. The options
// at a node are described by `options(node, slot, emit)` which calls
// emit(action, child_slot, attacks) for each allowed move.
using Emit = std::function<void(int action, int child_slot, int attacks)>;
using Options = std::function<void(uint64_t node, int slot, const Emit& emit)>;
using Better = std::function<bool(const Entry&, const Entry&)>;

struct Choice {
  int action = -1;
  int child_slot = 0;
  int attacks = 0;
  Entry entry;
};

TreeDp SolveTree(const TreeGameSpec& tree, int slots, double leaf_sign,
                 const Options& options, const Better& better) {
  tree.Validate();
  const int b = tree.branching;
  TreeDp dp{b, tree.depth, slots, std::vector<std::vector<Entry>>(tree.depth + 1)};
  auto& leaves = dp.levels[tree.depth];
  leaves.resize(tree.NumLeaves() * slots);
  for (uint64_t c = 0; c < tree.NumLeaves(); ++c) {
    for (int s = 0; s < slots; ++s) leaves[c * slots + s] = {leaf_sign * tree.leaf_rewards[c], 0};
  }
  for (int d = tree.depth - 1; d >= 0; --d) {
    const uint64_t width = IntPow(b, d);
    auto& here = dp.levels[d];
    const auto& below = dp.levels[d + 1];
    here.resize(width * slots);
    for (uint64_t c = 0; c < width; ++c) {
      const uint64_t node = LevelOffset(b, d) + c;
      for (int s = 0; s < slots; ++s) {
        bool have = false;
        Entry best;
        options(node, s, [&](int a, int child_slot, int attacks) {
          const Entry& child = below[(c * b + a) * slots + child_slot];
          Entry cand{child.gain, child.count + attacks};
          if (!have || better(cand, best)) {
            best = cand;
            have = true;
          }
        });
        here[c * slots + s] = best;
      }
    }
  }
  return dp;
}

// Re-derives the chosen path from the root, producing the witness plan.
std::vector<PlanStep> ExtractPlan(const TreeGameSpec& tree, const TreeDp& dp, int root_slot,
                                  const TreeQTable& q, const Options& options,
                                  const Better& better) {
  std::vector<PlanStep> plan;
  const int b = tree.branching;
  uint64_t code = 0;
  int slot = root_slot;
  for (int d = 0; d < tree.depth; ++d) {
    const uint64_t node = LevelOffset(b, d) + code;
    const auto& below = dp.levels[d + 1];
    Choice best;
    bool have = false;
    options(node, slot, [&](int a, int child_slot, int attacks) {
      const Entry& child = below[(code * b + a) * dp.slots + child_slot];
      Entry cand{child.gain, child.count + attacks};
      if (!have || better(cand, best.entry)) {
        best = {a, child_slot, attacks, cand};
        have = true;
      }
    });
    if (best.action != q.Greedy(node)) plan.push_back({d, 0, best.action});
    code = code * b + best.action;
    slot = best.child_slot;
  }
  return plan;
}

}  // namespace

OracleResult OracleBudgetDp(const TreeGameSpec& tree, int budget) {
  if (budget < 0) Fail(ErrorCode::kInvalidArgument, "budget must be >= 0");
  const TreeQTable q = ValueIteration(tree);
  const int cap = std::min(budget, tree.depth);
  const int slots = cap + 1;  // remaining budget 0..cap
  // Gains are negated returns, so "better" = larger gain = lower return.
  const Options options = [&](uint64_t node, int remaining, const Emit& emit) {
    const int g = q.Greedy(node);
    emit(g, remaining, 0);
    if (remaining > 0) {
      for (int a = 0; a < tree.branching; ++a) {
        if (a != g) emit(a, remaining - 1, 1);
      }
    }
  };
  const Better better = [](const Entry& x, const Entry& y) {
    if (x.gain != y.gain) return x.gain > y.gain;
    return x.count < y.count;
  };
  const TreeDp dp = SolveTree(tree, slots, -1.0, options, better);
  OracleResult r;
  const Entry& root = dp.levels[0][cap];
  r.team_return = -root.gain;
  r.value = r.team_return;
  r.attack_count = root.count;
  r.witness = ExtractPlan(tree, dp, cap, q, options, better);
  return r;
}

OracleResult OracleRegDp(const TreeGameSpec& tree, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
  }
  const TreeQTable q = ValueIteration(tree);
  const Options options = [&](uint64_t node, int, const Emit& emit) {
    const int g = q.Greedy(node);
    emit(g, 0, 0);
    for (int a = 0; a < tree.branching; ++a) {
      if (a != g) emit(a, 0, 1);
    }
  };
  // Entries carry the raw negated return; the penalty is applied in the
  // comparison so that every plan's objective is evaluated as
  // gain - lambda * count with one rounding.
  const Better better = [lambda](const Entry& x, const Entry& y) {
    const double vx = x.gain - lambda * x.count;
    const double vy = y.gain - lambda * y.count;
    if (vx != vy) return vx > vy;
    return x.count < y.count;
  };
  const TreeDp dp = SolveTree(tree, 1, -1.0, options, better);
  OracleResult r;
  const Entry& root = dp.levels[0][0];
  r.team_return = -root.gain;
  r.attack_count = root.count;
  r.value = root.gain - lambda * root.count;
  r.witness = ExtractPlan(tree, dp, 0, q, options, better);
  return r;
}

OracleResult OracleForcedArgminDp(const TreeGameSpec& tree, double cost) {
  if (!std::isfinite(cost) || cost < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "attack cost must be finite and >= 0");
  }
  const TreeQTable q = ValueIteration(tree);
  const Options options = [&](uint64_t node, int, const Emit& emit) {
    emit(q.Greedy(node), 0, 0);
    emit(q.Argmin(node), 0, 1);
  };
  const Better better = [cost](const Entry& x, const Entry& y) {
    const double vx = x.gain - cost * x.count;
    const double vy = y.gain - cost * y.count;
    if (vx != vy) return vx > vy;
    return x.count < y.count;
  };
  const TreeDp dp = SolveTree(tree, 1, -1.0, options, better);
  OracleResult r;
  const Entry& root = dp.levels[0][0];
  r.team_return = -root.gain;
  r.attack_count = root.count;
  r.value = root.gain - cost * root.count;
  r.witness = ExtractPlan(tree, dp, 0, q, options, better);
  return r;
}

double ReplayPlan(const TreeGameSpec& tree, const std::vector<PlanStep>& plan,
                  int* deviations) {
  const TreeQTable q = ValueIteration(tree);
  TreeGameEnv env(tree);
  EnvState s = env.Reset(0);
  double ret = 0.0;
  int dev = 0;
  while (!s.terminal) {
    const uint64_t node = TreeNodeId(tree.branching, TreeGameEnv::Depth(s),
                                     TreeGameEnv::PrefixCode(s));
    const int greedy = q.Greedy(node);
    int action = greedy;
    for (const PlanStep& p : plan) {
      if (p.step == s.step_index) action = p.action;
    }
    if (action != greedy) ++dev;
    StepResult r = env.Step(s, JointAction{{action}});
    ret += r.reward;
    s = std::move(r.next);
  }
  if (deviations) *deviations = dev;
  return ret;
}

}  // namespace sparse_attack
