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

#ifndef SPARSE_ATTACK_TESTS_TEST_UTIL_H_
#define SPARSE_ATTACK_TESTS_TEST_UTIL_H_

// Brute-force references for the tree game, written without the library's
// dynamic programming so that they can check it.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "sparse_attack/error.h"

#include "sparse_attack/tree_game.h"

namespace sparse_attack::testing {

// No error raised.
inline constexpr ErrorCode kNoError = static_cast<ErrorCode>(0);

inline ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return kNoError;
}

// Optimal value below `prefix` by plain recursion.
inline double BestBelow(const TreeGameSpec& tree, std::vector<int>& prefix) {
  if (static_cast<int>(prefix.size()) == tree.depth) return tree.LeafReward(prefix);
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < tree.branching; ++a) {
    prefix.push_back(a);
    best = std::max(best, BestBelow(tree, prefix));
    prefix.pop_back();
  }
  return best;
}

// Q value of taking `a` after `prefix`.
inline double QAt(const TreeGameSpec& tree, std::vector<int> prefix, int a) {
  prefix.push_back(a);
  return BestBelow(tree, prefix);
}

// Greedy action after `prefix`, lowest index on ties.
inline int GreedyAt(const TreeGameSpec& tree, const std::vector<int>& prefix) {
  int best = 0;
  double best_q = QAt(tree, prefix, 0);
  for (int a = 1; a < tree.branching; ++a) {
    const double q = QAt(tree, prefix, a);
    if (q > best_q) {
      best_q = q;
      best = a;
    }
  }
  return best;
}

// Lowest-Q action after `prefix`, lowest index on ties.
inline int ArgminAt(const TreeGameSpec& tree, const std::vector<int>& prefix) {
  int best = 0;
  double best_q = QAt(tree, prefix, 0);
  for (int a = 1; a < tree.branching; ++a) {
    const double q = QAt(tree, prefix, a);
    if (q < best_q) {
      best_q = q;
      best = a;
    }
  }
  return best;
}

struct Path {
  std::vector<int> actions;
  double reward = 0.0;
  int deviations = 0;
};

// Every leaf with the number of steps that differ from the greedy action.
inline std::vector<Path> AllPaths(const TreeGameSpec& tree) {
  std::vector<Path> out;
  for (uint64_t leaf = 0; leaf < tree.NumLeaves(); ++leaf) {
    Path p;
    p.actions = tree.LeafSequence(leaf);
    p.reward = tree.leaf_rewards[leaf];
    std::vector<int> prefix;
    for (int a : p.actions) {
      if (a != GreedyAt(tree, prefix)) ++p.deviations;
      prefix.push_back(a);
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline double BruteBudget(const std::vector<Path>& paths, int budget) {
  double best = std::numeric_limits<double>::infinity();
  for (const Path& p : paths) {
    if (p.deviations <= budget) best = std::min(best, p.reward);
  }
  return best;
}

inline double BruteRegularized(const std::vector<Path>& paths, double lambda) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Path& p : paths) best = std::max(best, -p.reward - lambda * p.deviations);
  return best;
}

// Best -return - cost * attacks when each step either keeps the greedy
// action or forces the lowest-Q action.
inline double BruteForcedArgmin(const TreeGameSpec& tree, std::vector<int>& prefix, double cost) {
  if (static_cast<int>(prefix.size()) == tree.depth) return -tree.LeafReward(prefix);
  const int g = GreedyAt(tree, prefix);
  const int m = ArgminAt(tree, prefix);
  prefix.push_back(g);
  double best = BruteForcedArgmin(tree, prefix, cost);
  prefix.pop_back();
  prefix.push_back(m);
  best = std::max(best, BruteForcedArgmin(tree, prefix, cost) - cost);
  prefix.pop_back();
  return best;
}

}  // namespace sparse_attack::testing

#endif  // SPARSE_ATTACK_TESTS_TEST_UTIL_H_
