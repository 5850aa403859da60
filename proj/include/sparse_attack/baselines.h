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

#ifndef SPARSE_ATTACK_BASELINES_H_
#define SPARSE_ATTACK_BASELINES_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sparse_attack/attack.h"
#include "sparse_attack/learners.h"
#include "sparse_attack/mmdp.h"
#include "sparse_attack/policy.h"

namespace sparse_attack {

enum class DeltaRule { kMaxDiff, kEntropy };

std::string DeltaRuleName(DeltaRule rule);
DeltaRule ParseDeltaRule(const std::string& name);

// Numerically stable softmax.
std::vector<double> Softmax(std::span<const double> q_row);

// Confidence score of softmax(q_row). kMaxDiff is max - min of the
// probabilities, in [0, 1]. kEntropy is sum p log p / log m, in [-1, 0]:
// -1 for a uniform row and close to 0 for a confident one. Both are large
// when the agent strongly prefers one action.
double DeltaScore(DeltaRule rule, std::span<const double> q_row);

enum class RandomMode { kRandomAction, kLowestQ };

// Ra-R / Ra-L: each attacked agent deviates independently with probability
// `prob`, to a uniform non-greedy legal action or to the argmin-Q action.
class RandomAttack : public AttackStrategy {
 public:
  RandomAttack(RandomMode mode, double prob);
  std::vector<int> Choose(const AttackContext& context) override;

 private:
  RandomMode mode_;
  double prob_;
};

// Ru-B: argmin-Q action whenever the agent's delta score reaches `threshold`.
class RuleBasedAttack : public AttackStrategy {
 public:
  RuleBasedAttack(DeltaRule rule, double threshold);
  std::vector<int> Choose(const AttackContext& context) override;

 private:
  DeltaRule rule_;
  double threshold_;
};

// Ru-D: argmin-Q action at every step.
class DenseAttack : public AttackStrategy {
 public:
  std::vector<int> Choose(const AttackContext& context) override;
};

// Argmin-Q legal action of base agent `agent` at `state`.
int LowestQAction(const QTeamPolicy& base_policy, const EnvState& state, int agent);

std::vector<AttackStats> AttackRandom(RandomMode mode, double prob,
                                      std::shared_ptr<const QTeamPolicy> base_policy,
                                      std::shared_ptr<const Environment> env,
                                      std::vector<int> targets, int n_episodes, uint64_t seed);

std::vector<AttackStats> AttackRuleBased(DeltaRule rule, double threshold,
                                         std::shared_ptr<const QTeamPolicy> base_policy,
                                         std::shared_ptr<const Environment> env,
                                         std::vector<int> targets, int n_episodes,
                                         uint64_t seed);

std::vector<AttackStats> AttackDense(std::shared_ptr<const QTeamPolicy> base_policy,
                                     std::shared_ptr<const Environment> env,
                                     std::vector<int> targets, int n_episodes, uint64_t seed);

// 1000 evenly spaced points of [0, 1] (maxdiff) or [-1, 0] (entropy).
std::vector<double> ThresholdGrid(DeltaRule rule, int points = 1000);

// Delta scores of the attacked agents along every state reachable by the
// greedy base team, used to extend a threshold sweep with exact values.
std::vector<double> OnTrajectoryDeltas(DeltaRule rule, const Environment& env,
                                       const QTeamPolicy& base_policy,
                                       std::span<const int> targets, int n_episodes,
                                       uint64_t seed);

// RL-F attacker MDP: each attacked agent chooses pass (0) or attack (1); an
// attack forces the argmin-Q legal action. Reward is -r - c_adv per attack.
class TimingEnv : public Environment {
 public:
  TimingEnv(std::shared_ptr<const Environment> base,
            std::shared_ptr<const QTeamPolicy> base_policy, std::vector<int> targets,
            double c_adv);

  const MmdpSpec& spec() const override { return spec_; }
  EnvState Reset(uint64_t seed) const override;
  StepResult Step(const EnvState& state, const JointAction& action) const override;
  bool HasWinCondition() const override { return adv_.HasWinCondition(); }
  std::string Fingerprint() const override;

  const AdversarialEnv& adversarial() const { return adv_; }
  double c_adv() const { return c_adv_; }

 private:
  EnvState Retag(EnvState s) const;

  AdversarialEnv adv_;
  double c_adv_;
  MmdpSpec spec_;
};

QTeamPolicy TrainRlf(std::shared_ptr<const Environment> env,
                     std::shared_ptr<const QTeamPolicy> base_policy, std::vector<int> targets,
                     double c_adv, const TrainConfig& train,
                     TrainDiagnostics* diagnostics = nullptr);

// Greedy RL-F timing policy with forced argmin-Q actions.
class TimingAttack : public AttackStrategy {
 public:
  explicit TimingAttack(const QTeamPolicy& timing) : timing_(timing) {}
  std::vector<int> Choose(const AttackContext& context) override;

 private:
  const QTeamPolicy& timing_;
  std::vector<int> prev_;
};

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_BASELINES_H_
