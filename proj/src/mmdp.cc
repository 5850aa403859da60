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

#include "sparse_attack/mmdp.h"

#include <algorithm>

#include "sparse_attack/error.h"

namespace sparse_attack {

void MmdpSpec::Validate() const {
  if (n_agents < 1) Fail(ErrorCode::kInvalidArgument, "n_agents must be >= 1");
  if (static_cast<int>(action_counts.size()) != n_agents ||
      static_cast<int>(obs_dims.size()) != n_agents) {
    Fail(ErrorCode::kInvalidArgument, "per-agent lists must have n_agents entries");
  }
  for (int a : action_counts) {
    if (a < 2) Fail(ErrorCode::kInvalidArgument, "every action count must be >= 2");
  }
  if (horizon < 1) Fail(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  if (discount < 0.0 || discount > 1.0) {
    Fail(ErrorCode::kInvalidArgument, "discount must lie in [0, 1]");
  }
}

bool EnvState::operator==(const EnvState& other) const {
  if (global_state != other.global_state || observations != other.observations ||
      step_index != other.step_index || terminal != other.terminal ||
      won != other.won || action_masks != other.action_masks ||
      prev_actions != other.prev_actions || internal != other.internal) {
    return false;
  }
  if (static_cast<bool>(inner) != static_cast<bool>(other.inner)) return false;
  return !inner || *inner == *other.inner;
}

bool HasLegalAction(const ActionMask& mask) {
  return std::any_of(mask.begin(), mask.end(), [](uint8_t m) { return m != 0; });
}

ActionMask FullMask(int n_actions) { return ActionMask(n_actions, 1); }

void CheckStepPreconditions(const MmdpSpec& spec, const EnvState& state,
                            const JointAction& action) {
  if (state.terminal) Fail(ErrorCode::kSteppedTerminal, "state is terminal");
  if (static_cast<int>(action.actions.size()) != spec.n_agents) {
    Fail(ErrorCode::kIllegalAction, "joint action has wrong arity");
  }
  for (int i = 0; i < spec.n_agents; ++i) {
    const int a = action.actions[i];
    if (a < 0 || a >= spec.action_counts[i]) {
      Fail(ErrorCode::kIllegalAction,
           "agent " + std::to_string(i) + " action " + std::to_string(a) +
               " out of range");
    }
    if (!state.action_masks.empty() && !state.action_masks[i][a]) {
      Fail(ErrorCode::kIllegalAction,
           "agent " + std::to_string(i) + " action " + std::to_string(a) +
               " is masked out");
    }
  }
}

double Trajectory::Return() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

Trajectory RunEpisode(const Environment& env, uint64_t seed,
                      const JointPolicyFn& policy) {
  Trajectory traj;
  EnvState state = env.Reset(seed);
  while (!state.terminal) {
    JointAction action = policy(state);
    StepResult r = env.Step(state, action);
    traj.steps.push_back({std::move(state), std::move(action), r.reward});
    state = std::move(r.next);
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace sparse_attack
