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

#ifndef SPARSE_ATTACK_POLICY_H_
#define SPARSE_ATTACK_POLICY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sparse_attack/mmdp.h"
#include "sparse_attack/nn.h"
#include "sparse_attack/tensor.h"

namespace sparse_attack {

enum class PolicyMode { kTabular, kNetwork };

// Provenance recorded alongside saved policies.
struct PolicyHeader {
  std::string role = "base";  // base | attacker | timing
  std::string algo;
  std::string env_fingerprint;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  // Attacker-only fields.
  std::vector<int> targets;
  double lambda = 0.0;
  uint64_t base_hash = 0;
};

// Per-agent Q functions, either tables keyed by the observation's byte
// signature or one shared network on (observation, one-hot previous own
// action, one-hot agent id), plus an optional mixer used in training.
class QTeamPolicy {
 public:
  static QTeamPolicy Tabular(const MmdpSpec& spec);
  static QTeamPolicy Network(const MmdpSpec& spec, MlpSpec agent_net,
                             std::optional<MixerSpec> mixer, ParamStore params);

  PolicyMode mode() const { return mode_; }
  int n_agents() const { return n_agents_; }
  const std::vector<int>& action_counts() const { return action_counts_; }
  const std::vector<int>& obs_dims() const { return obs_dims_; }

  std::vector<double> QValues(int agent, std::span<const double> obs,
                              int prev_action) const;
  // Argmax over legal actions, lowest index on ties.
  int GreedyAction(int agent, std::span<const double> obs, const ActionMask& mask,
                   int prev_action) const;
  // Greedy action for every agent of `state`.
  std::vector<int> GreedyJoint(const EnvState& state) const;

  // Network input for one agent.
  std::vector<double> AgentInput(int agent, std::span<const double> obs,
                                 int prev_action) const;
  int input_width() const;

  // Tabular access.
  std::vector<double>& TableRow(int agent, std::span<const double> obs);
  const std::unordered_map<std::string, std::vector<double>>& table(int agent) const {
    return tables_[agent];
  }
  std::unordered_map<std::string, std::vector<double>>& mutable_table(int agent) {
    return tables_[agent];
  }

  // Network access.
  const MlpSpec& agent_net() const { return agent_net_; }
  const std::optional<MixerSpec>& mixer() const { return mixer_; }
  const ParamStore& params() const { return params_; }
  ParamStore& mutable_params() { return params_; }

  PolicyHeader header;

  // Content hash of the learned values (tables or parameters).
  uint64_t Hash() const;

 private:
  PolicyMode mode_ = PolicyMode::kTabular;
  int n_agents_ = 0;
  std::vector<int> action_counts_;
  std::vector<int> obs_dims_;
  std::vector<std::unordered_map<std::string, std::vector<double>>> tables_;
  MlpSpec agent_net_;
  std::optional<MixerSpec> mixer_;
  ParamStore params_;
};

// Exact byte encoding of an observation vector.
std::string ObservationSignature(std::span<const double> obs);

// Lowest-index argmax / argmin over the legal entries of `row`.
int ArgmaxLegal(std::span<const double> row, const ActionMask& mask);
int ArgminLegal(std::span<const double> row, const ActionMask& mask);

// Writes <stem>.policy (text header), <stem>.manifest and <stem>.bin
// (parameter format of param_io.h). Tables are stored as 1 x A tensors named
// "table.<agent>.<hex signature>".
void SavePolicy(const QTeamPolicy& policy, const std::string& stem);
QTeamPolicy LoadPolicy(const std::string& stem);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_POLICY_H_
