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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "sparse_attack/error.h"
#include "sparse_attack/goal_gather.h"
#include "sparse_attack/mmdp.h"
#include "sparse_attack/rng.h"
#include "sparse_attack/tree_game.h"

namespace sparse_attack {
namespace {

TEST_CASE("spec validation rejects inconsistent shapes") {
  MmdpSpec spec;
  spec.n_agents = 2;
  spec.action_counts = {2, 2};
  spec.obs_dims = {1, 1};
  spec.state_dim = 1;
  spec.horizon = 3;
  CHECK_NOTHROW(spec.Validate());
  spec.action_counts = {2};
  CHECK_THROWS_AS(spec.Validate(), Error);
  spec.action_counts = {2, 0};
  CHECK_THROWS_AS(spec.Validate(), Error);
  spec.action_counts = {2, 2};
  spec.discount = 1.5;
  CHECK_THROWS_AS(spec.Validate(), Error);
}

TEST_CASE("step preconditions") {
  const TreeGameEnv env(BuildRandomTree(3, 2, 0));
  EnvState s = env.Reset(0);
  auto code_of = [&](const EnvState& state, JointAction a) {
    try {
      env.Step(state, a);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  CHECK(code_of(s, JointAction{{5}}) == ErrorCode::kIllegalAction);
  CHECK(code_of(s, JointAction{{0, 0}}) == ErrorCode::kIllegalAction);
  s.action_masks[0][1] = 0;
  CHECK(code_of(s, JointAction{{1}}) == ErrorCode::kIllegalAction);
  EnvState done = env.StateAt(std::vector<int>{0, 0, 0});
  CHECK(done.terminal);
  CHECK(code_of(done, JointAction{{0}}) == ErrorCode::kSteppedTerminal);
}

TEST_CASE("episodes replay deterministically from the seed") {
  const GoalGatherEnv env(GridTeamSpec{});
  auto policy = [](const EnvState& s) {
    return JointAction{{s.step_index % 5, (s.step_index + 2) % 5}};
  };
  const Trajectory a = RunEpisode(env, 11, policy);
  const Trajectory b = RunEpisode(env, 11, policy);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].state == b.steps[i].state);
    CHECK(a.steps[i].reward == b.steps[i].reward);
  }
  CHECK(a.Return() == b.Return());
  CHECK(a.steps.front().state.prev_actions == std::vector<int>{-1, -1});
  if (a.steps.size() > 1) CHECK(a.steps[1].state.prev_actions == a.steps[0].action.actions);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(DeriveSeed(1, 0) != DeriveSeed(1, 1));
  CHECK(DeriveSeed(1, 0) != DeriveSeed(2, 0));
  CHECK(DeriveSeed(5, 7) == DeriveSeed(5, 7));
  CHECK(Fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("bounded draws are uniform") {
  Rng rng(3);
  const int n = 7, draws = 70000;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) {
    const uint64_t v = rng.UniformInt(n);
    REQUIRE(v < static_cast<uint64_t>(n));
    ++counts[v];
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  const double expected = static_cast<double>(draws) / n;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 22.46);

  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.01);
  for (int i = 0; i < 1000; ++i) {
    const int64_t r = rng.UniformRange(-3, 3);
    REQUIRE(r >= -3);
    REQUIRE(r <= 3);
  }
}

TEST_CASE("rng streams are reproducible") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.NextU64() == b.NextU64());
}

}  // namespace
}  // namespace sparse_attack
