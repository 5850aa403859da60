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

#ifndef SPARSE_ATTACK_ATTACK_H_
#define SPARSE_ATTACK_ATTACK_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sparse_attack/learners.h"
#include "sparse_attack/mmdp.h"
#include "sparse_attack/policy.h"
#include "sparse_attack/rng.h"

namespace sparse_attack {

enum class AttackerAlgo { kTabularQ, kSingleAgentQmix, kMultiAgentQmix };

std::string AttackerAlgoName(AttackerAlgo algo);
AttackerAlgo ParseAttackerAlgo(const std::string& name);

struct AttackConfig {
  std::vector<int> targets;
  double lambda = 1.0;
  TrainConfig train;
  AttackerAlgo algo = AttackerAlgo::kTabularQ;
};

// Throws BadTargets for an empty, duplicated or out-of-range target set.
void ValidateTargets(std::span<const int> targets, int n_agents);

// Everything one attacked step produced.
struct AdversarialStep {
  double team_reward = 0.0;
  // -team_reward - lambda * deviations
  double adversarial_reward = 0.0;
  int deviations = 0;
  // Per attacked agent: executed action differs from the greedy base action.
  std::vector<uint8_t> deviated;
  // Greedy base actions of all agents at the pre-step state.
  std::vector<int> base_greedy;
  JointAction executed;
  EnvState next;
};

// The attacker's MDP: only the agents in `targets` act; every other agent
// plays its greedy base action, and the reward is the negated team reward
// minus lambda per attacked agent whose action differs from its greedy base
// action. Observations are the attacked agents' base observations, the global
// state passes through unchanged, and EnvState::inner holds the base state.
class AdversarialEnv : public Environment {
 public:
  AdversarialEnv(std::shared_ptr<const Environment> base,
                 std::shared_ptr<const QTeamPolicy> base_policy, std::vector<int> targets,
                 double lambda);

  const MmdpSpec& spec() const override { return spec_; }
  EnvState Reset(uint64_t seed) const override;
  StepResult Step(const EnvState& state, const JointAction& action) const override;
  bool HasWinCondition() const override { return base_->HasWinCondition(); }
  std::string Fingerprint() const override;

  AdversarialStep StepDetailed(const EnvState& state, const JointAction& attacker_action) const;
  // Attacker-view state for a base-environment state.
  EnvState Project(EnvState base_state) const;
  static const EnvState& BaseState(const EnvState& state) { return *state.inner; }

  const Environment& base() const { return *base_; }
  const QTeamPolicy& base_policy() const { return *base_policy_; }
  const std::vector<int>& targets() const { return targets_; }
  double lambda() const { return lambda_; }
  std::shared_ptr<const Environment> shared_base() const { return base_; }
  std::shared_ptr<const QTeamPolicy> shared_base_policy() const { return base_policy_; }

 private:
  std::shared_ptr<const Environment> base_;
  std::shared_ptr<const QTeamPolicy> base_policy_;
  std::vector<int> targets_;
  double lambda_;
  MmdpSpec spec_;
};

std::unique_ptr<AdversarialEnv> WrapAdversarial(std::shared_ptr<const Environment> base,
                                                std::shared_ptr<const QTeamPolicy> base_policy,
                                                std::vector<int> targets, double lambda);

// Learns the optimal sparse attack policy on `env` (the attacker's MDP).
QTeamPolicy TrainAttack(const AdversarialEnv& env, const AttackConfig& config,
                        TrainDiagnostics* diagnostics = nullptr);

struct AttackStats {
  std::vector<int> attacked_steps;  // per attacked agent
  int total_steps = 0;
  double team_return = 0.0;
  bool won = false;
  double regularized_return = 0.0;

  int TotalAttacks() const;
};

// Per-step inputs handed to an attack strategy.
struct AttackContext {
  const EnvState& base_state;
  const std::vector<int>& base_greedy;
  std::span<const int> targets;
  const QTeamPolicy& base_policy;
  Rng& rng;
};

// Chooses the executed actions of the attacked agents at each step.
class AttackStrategy {
 public:
  virtual ~AttackStrategy() = default;
  virtual std::vector<int> Choose(const AttackContext& context) = 0;
};

// Never deviates.
class NoAttack : public AttackStrategy {
 public:
  std::vector<int> Choose(const AttackContext& context) override;
};

// Greedy attacker policy (the learned optimal sparse attack).
class PolicyAttack : public AttackStrategy {
 public:
  explicit PolicyAttack(const QTeamPolicy& attacker) : attacker_(attacker) {}
  std::vector<int> Choose(const AttackContext& context) override;

 private:
  const QTeamPolicy& attacker_;
};

// One logged attacked step.
struct AttackStepLog {
  std::vector<std::vector<double>> observations;  // base observations, all agents
  std::vector<int> prev_actions;                  // all agents
  std::vector<ActionMask> masks;                  // all agents
  std::vector<int> executed;
  std::vector<int> base_greedy;
  double team_reward = 0.0;
  double adversarial_reward = 0.0;
  int deviations = 0;
  double lambda = 0.0;
};

// Greedy base agents with `strategy` substituting the attacked agents'
// actions. Episode e starts from Reset(DeriveSeed(seed, e)); lambda is used
// for the regularized-return accounting only.
std::vector<AttackStats> RolloutAttacked(std::shared_ptr<const Environment> env,
                                         std::shared_ptr<const QTeamPolicy> base_policy,
                                         AttackStrategy& strategy, std::vector<int> targets,
                                         double lambda, int n_episodes, uint64_t seed,
                                         std::vector<AttackStepLog>* log = nullptr);

std::vector<AttackStats> RolloutAttacked(std::shared_ptr<const Environment> env,
                                         std::shared_ptr<const QTeamPolicy> base_policy,
                                         const QTeamPolicy& attacker, std::vector<int> targets,
                                         double lambda, int n_episodes, uint64_t seed,
                                         std::vector<AttackStepLog>* log = nullptr);

struct AttackSummary {
  int episodes = 0;
  bool has_win = false;
  double win_rate = 0.0;
  double mean_return = 0.0;
  std::vector<double> mean_attacked_steps;  // per attacked agent
  double mean_total_steps = 0.0;
  double mean_regularized_return = 0.0;

  // Sum over attacked agents of mean attacked steps, over mean total steps.
  double AttackRatio() const;
  double MeanAttacks() const;
};

AttackSummary Summarize(const std::vector<AttackStats>& stats, bool has_win);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_ATTACK_H_
