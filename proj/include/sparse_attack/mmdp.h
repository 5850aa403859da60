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

#ifndef SPARSE_ATTACK_MMDP_H_
#define SPARSE_ATTACK_MMDP_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sparse_attack {

// Static description of a cooperative multi-agent MDP: n agents with
// discrete action sets, per-agent observation vectors, a global state vector
// and one team reward.
struct MmdpSpec {
  int n_agents = 1;
  std::vector<int> action_counts;
  std::vector<int> obs_dims;
  int state_dim = 0;
  int horizon = 1;
  double discount = 1.0;
  std::string initial_distribution;

  void Validate() const;
};

using ActionMask = std::vector<uint8_t>;

struct EnvState {
  std::vector<double> global_state;
  std::vector<std::vector<double>> observations;
  int step_index = 0;
  bool terminal = false;
  bool won = false;
  std::vector<ActionMask> action_masks;
  // Action each agent executed on the previous step, -1 before the first.
  std::vector<int> prev_actions;
  // Environment-private integer encoding of the state.
  std::vector<int> internal;
  // Underlying state when this state belongs to a wrapping environment.
  std::shared_ptr<const EnvState> inner;

  bool operator==(const EnvState& other) const;
};

struct JointAction {
  std::vector<int> actions;

  bool operator==(const JointAction&) const = default;
};

struct StepResult {
  double reward = 0.0;
  EnvState next;
};

// Environments are immutable state machines: Reset and Step are pure
// functions of their arguments, so one instance may serve many threads.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const MmdpSpec& spec() const = 0;
  virtual EnvState Reset(uint64_t seed) const = 0;
  virtual StepResult Step(const EnvState& state,
                          const JointAction& action) const = 0;
  // True when episodes end in a win/loss outcome (win rate is meaningful).
  virtual bool HasWinCondition() const { return false; }
  // Stable textual identity used in policy headers.
  virtual std::string Fingerprint() const = 0;
};

// Throws SteppedTerminal / IllegalAction when `action` may not be applied.
void CheckStepPreconditions(const MmdpSpec& spec, const EnvState& state,
                            const JointAction& action);

bool HasLegalAction(const ActionMask& mask);
ActionMask FullMask(int n_actions);

// Replay record. Observations, actions and masks cover the learning agents
// only (all agents for a base learner, the attacked subset for an attacker).
struct Transition {
  std::vector<double> state;
  std::vector<std::vector<double>> obs_k;
  std::vector<int> prev_actions_k;
  std::vector<int> actions_k;
  double reward = 0.0;
  std::vector<double> next_state;
  std::vector<std::vector<double>> next_obs_k;
  std::vector<ActionMask> next_masks_k;
  bool terminal = false;
};

struct TrajectoryStep {
  EnvState state;
  JointAction action;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  EnvState final_state;

  double Return() const;
};

using JointPolicyFn = std::function<JointAction(const EnvState&)>;

// Runs one episode from Reset(seed) until terminal.
Trajectory RunEpisode(const Environment& env, uint64_t seed,
                      const JointPolicyFn& policy);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_MMDP_H_
