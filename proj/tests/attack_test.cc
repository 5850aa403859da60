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

#include <memory>
#include <vector>

#include "sparse_attack/attack.h"
#include "sparse_attack/error.h"
#include "sparse_attack/goal_gather.h"
#include "sparse_attack/learners.h"
#include "sparse_attack/oracle.h"
#include "sparse_attack/rng.h"
#include "sparse_attack/tree_game.h"
#include "test_util.h"

namespace sparse_attack {
namespace {

using testing::CodeOf;
using testing::kNoError;

// Small untrained-but-deterministic team on a 4x4 grid, cheap enough for
// property tests that only need some fixed base behaviour.
struct GridFixture {
  std::shared_ptr<const Environment> env;
  std::shared_ptr<const QTeamPolicy> base;

  GridFixture() {
    GridTeamSpec g;
    g.width = 4;
    g.height = 4;
    g.horizon = 12;
    env = std::make_shared<GoalGatherEnv>(g);
    TrainConfig c;
    c.episodes = 3;
    c.batch_size = 4;
    c.hidden = 8;
    c.mixer_embed = 4;
    c.hyper_hidden = 8;
    c.seed = 5;
    base = std::make_shared<QTeamPolicy>(TrainDeep(*env, MixerKind::kQmix, c));
  }
};

struct TreeFixture {
  std::shared_ptr<const TreeGameEnv> env;
  std::shared_ptr<const QTeamPolicy> base;

  explicit TreeFixture(TreeGameSpec tree) {
    env = std::make_shared<TreeGameEnv>(std::move(tree));
    base = std::make_shared<QTeamPolicy>(SolveTreeByValueIteration(*env));
  }
};

// Plays a fixed attacker action sequence drawn from `rng`.
class RandomStrategy : public AttackStrategy {
 public:
  std::vector<int> Choose(const AttackContext& c) override {
    std::vector<int> out;
    for (int k : c.targets) {
      const ActionMask& mask = c.base_state.action_masks[k];
      int a;
      do {
        a = c.rng.UniformInt(static_cast<int>(mask.size()));
      } while (!mask[a]);
      out.push_back(a);
    }
    return out;
  }
};

TEST_CASE("adversarial step follows the transform") {
  GridFixture f;
  for (double lambda : {0.0, 0.5, 3.0}) {
    for (const std::vector<int>& targets : {std::vector<int>{0}, std::vector<int>{1},
                                            std::vector<int>{0, 1}}) {
      const AdversarialEnv adv(f.env, f.base, targets, lambda);
      Rng rng(DeriveSeed(7, targets.size()));
      for (int e = 0; e < 20; ++e) {
        EnvState s = adv.Reset(DeriveSeed(11, e));
        while (!s.terminal) {
          const EnvState& b = AdversarialEnv::BaseState(s);
          // The attacker sees exactly the attacked agents' base view.
          REQUIRE(s.observations.size() == targets.size());
          for (size_t j = 0; j < targets.size(); ++j) {
            CHECK(s.observations[j] == b.observations[targets[j]]);
            CHECK(s.prev_actions[j] == b.prev_actions[targets[j]]);
          }
          CHECK(s.global_state == b.global_state);

          JointAction a;
          for (size_t j = 0; j < targets.size(); ++j) a.actions.push_back(rng.UniformInt(kGridActions));
          const AdversarialStep st = adv.StepDetailed(s, a);
          const std::vector<int> greedy = f.base->GreedyJoint(b);
          CHECK(st.base_greedy == greedy);

          JointAction expected{greedy};
          int dev = 0;
          for (size_t j = 0; j < targets.size(); ++j) {
            expected.actions[targets[j]] = a.actions[j];
            dev += a.actions[j] != greedy[targets[j]];
          }
          CHECK(st.executed.actions == expected.actions);
          CHECK(st.deviations == dev);
          const StepResult direct = f.env->Step(b, expected);
          CHECK(st.team_reward == direct.reward);
          CHECK(st.adversarial_reward == -direct.reward - lambda * dev);
          CHECK(AdversarialEnv::BaseState(st.next).internal == direct.next.internal);
          CHECK(adv.Step(s, a).reward == st.adversarial_reward);
          s = st.next;
        }
      }
    }
  }
}

// Always plays the base agent's own greedy action.
class CopyGreedy : public AttackStrategy {
 public:
  std::vector<int> Choose(const AttackContext& c) override {
    std::vector<int> out;
    for (int k : c.targets) out.push_back(c.base_greedy[k]);
    return out;
  }
};

TEST_CASE("copying the greedy action is no attack at all") {
  GridFixture f;
  CopyGreedy copy;
  NoAttack none;
  const auto a = RolloutAttacked(f.env, f.base, copy, {0, 1}, 1.0, 50, 3);
  const auto b = RolloutAttacked(f.env, f.base, none, {0, 1}, 1.0, 50, 3);
  const EvalStats plain = EvaluatePolicy(*f.env, *f.base, 50, 3);
  REQUIRE(a.size() == 50);
  double sum = 0.0;
  for (int e = 0; e < 50; ++e) {
    CHECK(a[e].TotalAttacks() == 0);
    CHECK(a[e].team_return == b[e].team_return);
    CHECK(a[e].total_steps == b[e].total_steps);
    CHECK(a[e].regularized_return == -a[e].team_return);
    sum += a[e].team_return;
  }
  CHECK(sum / 50 == doctest::Approx(plain.mean_return).epsilon(1e-12));
}

TEST_CASE("accounting agrees with the step log") {
  GridFixture f;
  RandomStrategy random;
  std::vector<AttackStepLog> log;
  const double lambda = 0.75;
  const auto stats = RolloutAttacked(f.env, f.base, random, {1}, lambda, 30, 9, &log);
  size_t pos = 0;
  for (const AttackStats& s : stats) {
    int dev = 0;
    double team = 0.0, adv = 0.0;
    for (int t = 0; t < s.total_steps; ++t, ++pos) {
      const AttackStepLog& l = log.at(pos);
      CHECK(l.executed[0] == l.base_greedy[0]);
      dev += l.deviations;
      CHECK(l.deviations == (l.executed[1] != l.base_greedy[1] ? 1 : 0));
      team += l.team_reward;
      adv += l.adversarial_reward;
      CHECK(l.lambda == lambda);
    }
    CHECK(s.attacked_steps.size() == 1);
    CHECK(s.attacked_steps[0] == dev);
    CHECK(s.team_return == doctest::Approx(team));
    CHECK(s.regularized_return == doctest::Approx(adv));
    CHECK(s.regularized_return == doctest::Approx(-s.team_return - lambda * dev));
  }
  CHECK(pos == log.size());
  const AttackSummary sum = Summarize(stats, true);
  CHECK(sum.episodes == 30);
  CHECK(sum.AttackRatio() == doctest::Approx(sum.MeanAttacks() / sum.mean_total_steps));
}

TEST_CASE("rollouts are reproducible") {
  GridFixture f;
  RandomStrategy r1, r2;
  const auto a = RolloutAttacked(f.env, f.base, r1, {0}, 1.0, 20, 4);
  const auto b = RolloutAttacked(f.env, f.base, r2, {0}, 1.0, 20, 4);
  for (int e = 0; e < 20; ++e) {
    CHECK(a[e].team_return == b[e].team_return);
    CHECK(a[e].attacked_steps == b[e].attacked_steps);
  }
  NoAttack none;
  CHECK(CodeOf([&] { RolloutAttacked(f.env, f.base, none, {0}, 1.0, 0, 4); }) ==
        ErrorCode::kEmptyEvaluation);
}

TEST_CASE("target validation") {
  GridFixture f;
  CHECK(CodeOf([] { ValidateTargets(std::vector<int>{}, 2); }) == ErrorCode::kBadTargets);
  CHECK(CodeOf([] { ValidateTargets(std::vector<int>{2}, 2); }) == ErrorCode::kBadTargets);
  CHECK(CodeOf([] { ValidateTargets(std::vector<int>{-1}, 2); }) == ErrorCode::kBadTargets);
  CHECK(CodeOf([] { ValidateTargets(std::vector<int>{1, 1}, 2); }) == ErrorCode::kBadTargets);
  CHECK(CodeOf([] { ValidateTargets(std::vector<int>{1, 0}, 2); }) == kNoError);
  CHECK(CodeOf([&] { AdversarialEnv(f.env, f.base, {3}, 1.0); }) == ErrorCode::kBadTargets);
}

TEST_CASE("attack training rejects mismatched configuration") {
  GridFixture f;
  const AdversarialEnv adv(f.env, f.base, {0, 1}, 1.0);
  AttackConfig c;
  c.targets = {0, 1};
  c.lambda = 2.0;
  c.train.episodes = 1;
  c.algo = AttackerAlgo::kMultiAgentQmix;
  CHECK(CodeOf([&] { TrainAttack(adv, c); }) == ErrorCode::kConfigMismatch);
  c.lambda = 1.0;
  c.targets = {0};
  CHECK(CodeOf([&] { TrainAttack(adv, c); }) == ErrorCode::kConfigMismatch);
  c.targets = {0, 1};
  c.algo = AttackerAlgo::kSingleAgentQmix;
  CHECK(CodeOf([&] { TrainAttack(adv, c); }) == ErrorCode::kConfigMismatch);
  c.algo = AttackerAlgo::kTabularQ;
  CHECK(CodeOf([&] { TrainAttack(adv, c); }) == ErrorCode::kConfigMismatch);
  CHECK(ParseAttackerAlgo("single-qmix") == AttackerAlgo::kSingleAgentQmix);
  CHECK(CodeOf([] { ParseAttackerAlgo("ppo"); }) == ErrorCode::kConfigError);
}

AttackConfig TabularConfig(double lambda, int episodes, uint64_t seed) {
  AttackConfig c;
  c.targets = {0};
  c.lambda = lambda;
  c.train.episodes = episodes;
  c.train.eps_end = 0.1;
  c.train.seed = seed;
  return c;
}

TEST_CASE("learned tree attack matches the exact optimum") {
  for (uint64_t fill : {0u, 3u}) {
    TreeFixture f(BuildExample1(6, 3, 1, fill));
    for (double lambda : {0.5, 1.0, 5.0}) {
      const AdversarialEnv adv(f.env, f.base, {0}, lambda);
      const QTeamPolicy attacker = TrainAttack(adv, TabularConfig(lambda, 100000, fill + 1));
      CHECK(attacker.header.role == "attacker");
      CHECK(attacker.header.base_hash == f.base->Hash());
      const AttackSummary s =
          Summarize(RolloutAttacked(f.env, f.base, attacker, {0}, lambda, 1, 0), false);
      const OracleResult exact = OracleRegDp(f.env->tree(), lambda);
      CHECK(s.mean_regularized_return == doctest::Approx(exact.value));
      CHECK(s.mean_return == doctest::Approx(exact.team_return));
      CHECK(s.MeanAttacks() == exact.attack_count);
    }
  }
  // The headline case: two deviations reach the -100 leaf.
  TreeFixture f(BuildExample1(6, 3, 1, 0));
  const AdversarialEnv adv(f.env, f.base, {0}, 1.0);
  const QTeamPolicy attacker = TrainAttack(adv, TabularConfig(1.0, 100000, 9));
  const AttackSummary s = Summarize(RolloutAttacked(f.env, f.base, attacker, {0}, 1.0, 1, 0), false);
  CHECK(s.mean_return == -100.0);
  CHECK(s.MeanAttacks() == 2.0);
  CHECK(s.mean_regularized_return == 98.0);
}

TEST_CASE("a prohibitive penalty leaves the base untouched") {
  TreeFixture f(BuildExample2(5, 2, 4));
  const AdversarialEnv adv(f.env, f.base, {0}, 1e6);
  const QTeamPolicy attacker = TrainAttack(adv, TabularConfig(1e6, 20000, 2));
  const AttackSummary s = Summarize(RolloutAttacked(f.env, f.base, attacker, {0}, 1e6, 1, 0), false);
  std::vector<int> root;
  CHECK(s.MeanAttacks() == 0.0);
  CHECK(s.mean_return == testing::BestBelow(f.env->tree(), root));
}

TEST_CASE("with no penalty the attacker reaches the worst leaf") {
  TreeFixture f(BuildRandomTree(4, 3, 8));
  const AdversarialEnv adv(f.env, f.base, {0}, 0.0);
  AttackConfig c = TabularConfig(0.0, 30000, 6);
  c.train.tabular_lr = 0.5;
  c.train.eps_end = 0.3;
  const QTeamPolicy attacker = TrainAttack(adv, c);
  const AttackSummary s = Summarize(RolloutAttacked(f.env, f.base, attacker, {0}, 0.0, 1, 0), false);
  const auto& leaves = f.env->tree().leaf_rewards;
  CHECK(s.mean_return == *std::min_element(leaves.begin(), leaves.end()));
}

}  // namespace
}  // namespace sparse_attack
