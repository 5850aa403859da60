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

#include "sparse_attack/baselines.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "sparse_attack/error.h"
#include "sparse_attack/tree_game.h"

namespace sparse_attack {

std::string DeltaRuleName(DeltaRule rule) {
  return rule == DeltaRule::kMaxDiff ? "maxdiff" : "entropy";
}

DeltaRule ParseDeltaRule(const std::string& name) {
  if (name == "maxdiff") return DeltaRule::kMaxDiff;
  if (name == "entropy") return DeltaRule::kEntropy;
  Fail(ErrorCode::kConfigError, "unknown delta rule '" + name + "'");
}

std::vector<double> Softmax(std::span<const double> q_row) {
  if (q_row.empty()) Fail(ErrorCode::kInvalidArgument, "empty Q row");
  const double top = *std::max_element(q_row.begin(), q_row.end());
  std::vector<double> p(q_row.size());
  double z = 0.0;
  for (size_t i = 0; i < q_row.size(); ++i) {
    p[i] = std::exp(q_row[i] - top);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

double DeltaScore(DeltaRule rule, std::span<const double> q_row) {
  for (double q : q_row) {
    if (!std::isfinite(q)) Fail(ErrorCode::kNonFinite, "non-finite Q value");
  }
  const std::vector<double> p = Softmax(q_row);
  if (rule == DeltaRule::kMaxDiff) {
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    return *hi - *lo;
  }
  if (p.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s += v * std::log(v);
  }
  return s / std::log(static_cast<double>(p.size()));
}

int LowestQAction(const QTeamPolicy& base_policy, const EnvState& state, int agent) {
  const std::vector<double> q =
      base_policy.QValues(agent, state.observations[agent], state.prev_actions[agent]);
  return ArgminLegal(q, state.action_masks[agent]);
}

RandomAttack::RandomAttack(RandomMode mode, double prob) : mode_(mode), prob_(prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "attack probability must lie in [0, 1]");
  }
}

std::vector<int> RandomAttack::Choose(const AttackContext& context) {
  std::vector<int> out;
  for (int k : context.targets) {
    const int greedy = context.base_greedy[k];
    int a = greedy;
    // The coin is always flipped so both modes consume the same stream.
    if (context.rng.Bernoulli(prob_)) {
      if (mode_ == RandomMode::kLowestQ) {
        a = LowestQAction(context.base_policy, context.base_state, k);
      } else {
        const ActionMask& mask = context.base_state.action_masks[k];
        std::vector<int> others;
        for (int b = 0; b < static_cast<int>(mask.size()); ++b) {
          if (mask[b] && b != greedy) others.push_back(b);
        }
        if (!others.empty()) a = others[context.rng.UniformInt(others.size())];
      }
    }
    out.push_back(a);
  }
  return out;
}

RuleBasedAttack::RuleBasedAttack(DeltaRule rule, double threshold)
    : rule_(rule), threshold_(threshold) {
  if (std::isnan(threshold)) Fail(ErrorCode::kInvalidArgument, "threshold is NaN");
}

std::vector<int> RuleBasedAttack::Choose(const AttackContext& context) {
  std::vector<int> out;
  for (int k : context.targets) {
    const EnvState& s = context.base_state;
    const std::vector<double> q =
        context.base_policy.QValues(k, s.observations[k], s.prev_actions[k]);
    out.push_back(DeltaScore(rule_, q) >= threshold_ ? ArgminLegal(q, s.action_masks[k])
                                                     : context.base_greedy[k]);
  }
  return out;
}

std::vector<int> DenseAttack::Choose(const AttackContext& context) {
  std::vector<int> out;
  for (int k : context.targets) {
    out.push_back(LowestQAction(context.base_policy, context.base_state, k));
  }
  return out;
}

std::vector<AttackStats> AttackRandom(RandomMode mode, double prob,
                                      std::shared_ptr<const QTeamPolicy> base_policy,
                                      std::shared_ptr<const Environment> env,
                                      std::vector<int> targets, int n_episodes, uint64_t seed) {
  RandomAttack strategy(mode, prob);
  return RolloutAttacked(std::move(env), std::move(base_policy), strategy, std::move(targets),
                         0.0, n_episodes, seed);
}

std::vector<AttackStats> AttackRuleBased(DeltaRule rule, double threshold,
                                         std::shared_ptr<const QTeamPolicy> base_policy,
                                         std::shared_ptr<const Environment> env,
                                         std::vector<int> targets, int n_episodes,
                                         uint64_t seed) {
  RuleBasedAttack strategy(rule, threshold);
  return RolloutAttacked(std::move(env), std::move(base_policy), strategy, std::move(targets),
                         0.0, n_episodes, seed);
}

std::vector<AttackStats> AttackDense(std::shared_ptr<const QTeamPolicy> base_policy,
                                     std::shared_ptr<const Environment> env,
                                     std::vector<int> targets, int n_episodes, uint64_t seed) {
  DenseAttack strategy;
  return RolloutAttacked(std::move(env), std::move(base_policy), strategy, std::move(targets),
                         0.0, n_episodes, seed);
}

std::vector<double> ThresholdGrid(DeltaRule rule, int points) {
  if (points < 2) Fail(ErrorCode::kInvalidArgument, "threshold grid needs >= 2 points");
  const double lo = rule == DeltaRule::kMaxDiff ? 0.0 : -1.0;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = lo + static_cast<double>(i) / (points - 1);
  return grid;
}

std::vector<double> OnTrajectoryDeltas(DeltaRule rule, const Environment& env,
                                       const QTeamPolicy& base_policy,
                                       std::span<const int> targets, int n_episodes,
                                       uint64_t seed) {
  std::vector<double> out;
  for (int e = 0; e < n_episodes; ++e) {
    const Trajectory tr = RunEpisode(env, DeriveSeed(seed, static_cast<uint64_t>(e)),
                                     [&](const EnvState& s) {
                                       return JointAction{base_policy.GreedyJoint(s)};
                                     });
    for (const TrajectoryStep& step : tr.steps) {
      for (int k : targets) {
        out.push_back(DeltaScore(
            rule, base_policy.QValues(k, step.state.observations[k], step.state.prev_actions[k])));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TimingEnv::TimingEnv(std::shared_ptr<const Environment> base,
                     std::shared_ptr<const QTeamPolicy> base_policy, std::vector<int> targets,
                     double c_adv)
    : adv_(std::move(base), std::move(base_policy), std::move(targets), 0.0), c_adv_(c_adv) {
  if (!std::isfinite(c_adv) || c_adv < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "c_adv must be finite and >= 0");
  }
  spec_ = adv_.spec();
  std::fill(spec_.action_counts.begin(), spec_.action_counts.end(), 2);
}

EnvState TimingEnv::Retag(EnvState s) const {
  for (ActionMask& m : s.action_masks) m = FullMask(2);
  return s;
}

EnvState TimingEnv::Reset(uint64_t seed) const {
  EnvState s = Retag(adv_.Reset(seed));
  std::fill(s.prev_actions.begin(), s.prev_actions.end(), -1);
  return s;
}

StepResult TimingEnv::Step(const EnvState& state, const JointAction& action) const {
  CheckStepPreconditions(spec_, state, action);
  const EnvState adv_state = adv_.Project(*state.inner);
  const EnvState& base_state = *state.inner;
  const auto& targets = adv_.targets();
  const std::vector<int> greedy = adv_.base_policy().GreedyJoint(base_state);
  JointAction forced;
  int attacks = 0;
  for (size_t i = 0; i < targets.size(); ++i) {
    if (action.actions[i] == 1) {
      forced.actions.push_back(LowestQAction(adv_.base_policy(), base_state, targets[i]));
      ++attacks;
    } else {
      forced.actions.push_back(greedy[targets[i]]);
    }
  }
  AdversarialStep step = adv_.StepDetailed(adv_state, forced);
  StepResult out;
  out.reward = -step.team_reward - c_adv_ * attacks;
  out.next = Retag(std::move(step.next));
  out.next.prev_actions = action.actions;
  return out;
}

std::string TimingEnv::Fingerprint() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), ":cadv%.17g", c_adv_);
  return "timing" + adv_.Fingerprint() + buf;
}

QTeamPolicy TrainRlf(std::shared_ptr<const Environment> env,
                     std::shared_ptr<const QTeamPolicy> base_policy, std::vector<int> targets,
                     double c_adv, const TrainConfig& train, TrainDiagnostics* diagnostics) {
  const bool tree = dynamic_cast<const TreeGameEnv*>(env.get()) != nullptr;
  const TimingEnv timing(std::move(env), std::move(base_policy), std::move(targets), c_adv);
  QTeamPolicy policy = tree ? TrainTabularQ(timing, train, diagnostics)
                            : TrainDeep(timing, MixerKind::kQmix, train, diagnostics);
  policy.header.role = "timing";
  policy.header.algo = tree ? "rlf-tabular-q" : "rlf-qmix";
  policy.header.env_fingerprint = timing.adversarial().base().Fingerprint();
  policy.header.targets = timing.adversarial().targets();
  policy.header.lambda = c_adv;
  policy.header.base_hash = timing.adversarial().base_policy().Hash();
  return policy;
}

std::vector<int> TimingAttack::Choose(const AttackContext& context) {
  const int m = static_cast<int>(context.targets.size());
  if (timing_.n_agents() != m) {
    Fail(ErrorCode::kConfigMismatch, "timing policy and target set disagree");
  }
  if (context.base_state.step_index == 0) prev_.assign(m, -1);
  std::vector<int> out;
  const ActionMask both = FullMask(2);
  for (int i = 0; i < m; ++i) {
    const int k = context.targets[i];
    const int decision =
        timing_.GreedyAction(i, context.base_state.observations[k], both, prev_[i]);
    prev_[i] = decision;
    out.push_back(decision == 1 ? LowestQAction(context.base_policy, context.base_state, k)
                                : context.base_greedy[k]);
  }
  return out;
}

}  // namespace sparse_attack
