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

#include "sparse_attack/attack.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "sparse_attack/error.h"
#include "sparse_attack/tree_game.h"

namespace sparse_attack {

std::string AttackerAlgoName(AttackerAlgo algo) {
  switch (algo) {
    case AttackerAlgo::kTabularQ:
      return "tabular-q";
    case AttackerAlgo::kSingleAgentQmix:
      return "single-qmix";
    case AttackerAlgo::kMultiAgentQmix:
      return "multi-qmix";
  }
  return "unknown";
}

AttackerAlgo ParseAttackerAlgo(const std::string& name) {
  if (name == "tabular-q") return AttackerAlgo::kTabularQ;
  if (name == "single-qmix") return AttackerAlgo::kSingleAgentQmix;
  if (name == "multi-qmix") return AttackerAlgo::kMultiAgentQmix;
  Fail(ErrorCode::kConfigError, "unknown attacker algorithm '" + name + "'");
}

void ValidateTargets(std::span<const int> targets, int n_agents) {
  if (targets.empty()) Fail(ErrorCode::kBadTargets, "target set is empty");
  std::vector<int> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || sorted.back() >= n_agents) {
    Fail(ErrorCode::kBadTargets, "target index out of range");
  }
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    Fail(ErrorCode::kBadTargets, "duplicate target index");
  }
}

AdversarialEnv::AdversarialEnv(std::shared_ptr<const Environment> base,
                               std::shared_ptr<const QTeamPolicy> base_policy,
                               std::vector<int> targets, double lambda)
    : base_(std::move(base)),
      base_policy_(std::move(base_policy)),
      targets_(std::move(targets)),
      lambda_(lambda) {
  if (!base_ || !base_policy_) Fail(ErrorCode::kInvalidArgument, "null environment or policy");
  const MmdpSpec& b = base_->spec();
  ValidateTargets(targets_, b.n_agents);
  if (base_policy_->n_agents() != b.n_agents) {
    Fail(ErrorCode::kConfigMismatch, "base policy and environment disagree on agent count");
  }
  if (!std::isfinite(lambda_) || lambda_ < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
  }
  spec_.n_agents = static_cast<int>(targets_.size());
  for (int k : targets_) {
    spec_.action_counts.push_back(b.action_counts[k]);
    spec_.obs_dims.push_back(b.obs_dims[k]);
  }
  spec_.state_dim = b.state_dim;
  spec_.horizon = b.horizon;
  spec_.discount = b.discount;
  spec_.initial_distribution = b.initial_distribution;
}

EnvState AdversarialEnv::Project(EnvState base_state) const {
  EnvState s;
  s.global_state = base_state.global_state;
  s.step_index = base_state.step_index;
  s.terminal = base_state.terminal;
  s.won = base_state.won;
  for (int k : targets_) {
    s.observations.push_back(base_state.observations[k]);
    s.action_masks.push_back(base_state.action_masks[k]);
    s.prev_actions.push_back(base_state.prev_actions[k]);
  }
  s.internal = base_state.internal;
  s.inner = std::make_shared<const EnvState>(std::move(base_state));
  return s;
}

EnvState AdversarialEnv::Reset(uint64_t seed) const { return Project(base_->Reset(seed)); }

AdversarialStep AdversarialEnv::StepDetailed(const EnvState& state,
                                             const JointAction& attacker_action) const {
  if (!state.inner) Fail(ErrorCode::kInvalidArgument, "state does not wrap a base state");
  CheckStepPreconditions(spec_, state, attacker_action);
  const EnvState& base_state = *state.inner;

  AdversarialStep out;
  out.base_greedy = base_policy_->GreedyJoint(base_state);
  out.executed.actions = out.base_greedy;
  out.deviated.assign(targets_.size(), 0);
  for (size_t i = 0; i < targets_.size(); ++i) {
    const int a = attacker_action.actions[i];
    out.executed.actions[targets_[i]] = a;
    if (a != out.base_greedy[targets_[i]]) {
      out.deviated[i] = 1;
      ++out.deviations;
    }
  }
  StepResult r = base_->Step(base_state, out.executed);
  out.team_reward = r.reward;
  out.adversarial_reward = -r.reward - lambda_ * out.deviations;
  out.next = Project(std::move(r.next));
  return out;
}

StepResult AdversarialEnv::Step(const EnvState& state, const JointAction& action) const {
  AdversarialStep s = StepDetailed(state, action);
  return {s.adversarial_reward, std::move(s.next)};
}

std::string AdversarialEnv::Fingerprint() const {
  std::string k;
  for (size_t i = 0; i < targets_.size(); ++i) {
    if (i) k += ',';
    k += std::to_string(targets_[i]);
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), ":lambda%.17g:base%016llx", lambda_,
                static_cast<unsigned long long>(base_policy_->Hash()));
  return "adv(" + base_->Fingerprint() + "):k" + k + buf;
}

std::unique_ptr<AdversarialEnv> WrapAdversarial(std::shared_ptr<const Environment> base,
                                                std::shared_ptr<const QTeamPolicy> base_policy,
                                                std::vector<int> targets, double lambda) {
  return std::make_unique<AdversarialEnv>(std::move(base), std::move(base_policy),
                                          std::move(targets), lambda);
}

QTeamPolicy TrainAttack(const AdversarialEnv& env, const AttackConfig& config,
                        TrainDiagnostics* diagnostics) {
  if (config.targets != env.targets() || config.lambda != env.lambda()) {
    Fail(ErrorCode::kConfigMismatch, "attack config does not match the wrapped environment");
  }
  const bool tree = dynamic_cast<const TreeGameEnv*>(&env.base()) != nullptr;
  const int m = env.spec().n_agents;
  QTeamPolicy policy = QTeamPolicy::Tabular(env.spec());
  switch (config.algo) {
    case AttackerAlgo::kTabularQ:
      if (!tree) Fail(ErrorCode::kConfigMismatch, "tabular attacker runs on tree games only");
      policy = TrainTabularQ(env, config.train, diagnostics);
      break;
    case AttackerAlgo::kSingleAgentQmix:
      if (m != 1) Fail(ErrorCode::kConfigMismatch, "single-agent attacker needs one target");
      policy = TrainDeep(env, MixerKind::kQmix, config.train, diagnostics);
      break;
    case AttackerAlgo::kMultiAgentQmix:
      if (m < 2) Fail(ErrorCode::kConfigMismatch, "multi-agent attacker needs two targets");
      policy = TrainDeep(env, MixerKind::kQmix, config.train, diagnostics);
      break;
  }
  policy.header.role = "attacker";
  policy.header.algo = AttackerAlgoName(config.algo);
  policy.header.env_fingerprint = env.base().Fingerprint();
  policy.header.targets = env.targets();
  policy.header.lambda = env.lambda();
  policy.header.base_hash = env.base_policy().Hash();
  return policy;
}

int AttackStats::TotalAttacks() const {
  int n = 0;
  for (int c : attacked_steps) n += c;
  return n;
}

std::vector<int> NoAttack::Choose(const AttackContext& context) {
  std::vector<int> out;
  for (int k : context.targets) out.push_back(context.base_greedy[k]);
  return out;
}

std::vector<int> PolicyAttack::Choose(const AttackContext& context) {
  std::vector<int> out;
  const int m = static_cast<int>(context.targets.size());
  if (attacker_.n_agents() != m) {
    Fail(ErrorCode::kConfigMismatch, "attacker policy and target set disagree");
  }
  for (int i = 0; i < m; ++i) {
    const int k = context.targets[i];
    out.push_back(attacker_.GreedyAction(i, context.base_state.observations[k],
                                         context.base_state.action_masks[k],
                                         context.base_state.prev_actions[k]));
  }
  return out;
}

std::vector<AttackStats> RolloutAttacked(std::shared_ptr<const Environment> env,
                                         std::shared_ptr<const QTeamPolicy> base_policy,
                                         AttackStrategy& strategy, std::vector<int> targets,
                                         double lambda, int n_episodes, uint64_t seed,
                                         std::vector<AttackStepLog>* log) {
  if (n_episodes <= 0) Fail(ErrorCode::kEmptyEvaluation, "n_episodes must be positive");
  const AdversarialEnv adv(std::move(env), std::move(base_policy), std::move(targets), lambda);
  const auto& tk = adv.targets();
  std::vector<AttackStats> all;
  all.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e) {
    const uint64_t episode_seed = DeriveSeed(seed, static_cast<uint64_t>(e));
    Rng rng(DeriveSeed(episode_seed, 0xa77ac));
    EnvState state = adv.Reset(episode_seed);
    AttackStats st;
    st.attacked_steps.assign(tk.size(), 0);
    while (!state.terminal) {
      const EnvState& base_state = AdversarialEnv::BaseState(state);
      const std::vector<int> greedy = adv.base_policy().GreedyJoint(base_state);
      AttackContext ctx{base_state, greedy, tk, adv.base_policy(), rng};
      JointAction a{strategy.Choose(ctx)};
      AdversarialStep step = adv.StepDetailed(state, a);
      if (log) {
        AttackStepLog entry;
        entry.observations = base_state.observations;
        entry.prev_actions = base_state.prev_actions;
        entry.masks = base_state.action_masks;
        entry.executed = step.executed.actions;
        entry.base_greedy = step.base_greedy;
        entry.team_reward = step.team_reward;
        entry.adversarial_reward = step.adversarial_reward;
        entry.deviations = step.deviations;
        entry.lambda = lambda;
        log->push_back(std::move(entry));
      }
      for (size_t i = 0; i < tk.size(); ++i) st.attacked_steps[i] += step.deviated[i];
      st.team_return += step.team_reward;
      st.regularized_return += step.adversarial_reward;
      ++st.total_steps;
      state = std::move(step.next);
    }
    st.won = state.won;
    all.push_back(std::move(st));
  }
  return all;
}

std::vector<AttackStats> RolloutAttacked(std::shared_ptr<const Environment> env,
                                         std::shared_ptr<const QTeamPolicy> base_policy,
                                         const QTeamPolicy& attacker, std::vector<int> targets,
                                         double lambda, int n_episodes, uint64_t seed,
                                         std::vector<AttackStepLog>* log) {
  PolicyAttack strategy(attacker);
  return RolloutAttacked(std::move(env), std::move(base_policy), strategy, std::move(targets),
                         lambda, n_episodes, seed, log);
}

double AttackSummary::MeanAttacks() const {
  double s = 0.0;
  for (double v : mean_attacked_steps) s += v;
  return s;
}

double AttackSummary::AttackRatio() const {
  return mean_total_steps > 0.0 ? MeanAttacks() / mean_total_steps : 0.0;
}

AttackSummary Summarize(const std::vector<AttackStats>& stats, bool has_win) {
  if (stats.empty()) Fail(ErrorCode::kEmptyEvaluation, "no episodes to summarize");
  AttackSummary s;
  s.episodes = static_cast<int>(stats.size());
  s.has_win = has_win;
  s.mean_attacked_steps.assign(stats.front().attacked_steps.size(), 0.0);
  for (const AttackStats& st : stats) {
    s.win_rate += st.won ? 1.0 : 0.0;
    s.mean_return += st.team_return;
    s.mean_total_steps += st.total_steps;
    s.mean_regularized_return += st.regularized_return;
    for (size_t i = 0; i < st.attacked_steps.size(); ++i) {
      s.mean_attacked_steps[i] += st.attacked_steps[i];
    }
  }
  const double n = s.episodes;
  s.win_rate /= n;
  s.mean_return /= n;
  s.mean_total_steps /= n;
  s.mean_regularized_return /= n;
  for (double& v : s.mean_attacked_steps) v /= n;
  return s;
}

}  // namespace sparse_attack
