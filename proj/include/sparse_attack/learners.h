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

#ifndef SPARSE_ATTACK_LEARNERS_H_
#define SPARSE_ATTACK_LEARNERS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sparse_attack/mmdp.h"
#include "sparse_attack/nn.h"
#include "sparse_attack/policy.h"
#include "sparse_attack/rng.h"

namespace sparse_attack {

enum class BaseAlgo { kTabularVI, kTabularQ, kVdn, kQmix };

std::string AlgoName(BaseAlgo algo);
BaseAlgo ParseAlgo(const std::string& name);

struct TrainConfig {
  int episodes = 1000;
  // Linear epsilon anneal from eps_start to eps_end over the first
  // eps_anneal_fraction of the episodes.
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_anneal_fraction = 0.2;
  double learning_rate = 5e-4;
  // Tabular step size; <= 0 selects 1 / visit count.
  double tabular_lr = 0.0;
  int batch_size = 32;
  int target_update_episodes = 200;
  // < 0 uses the environment's discount.
  double discount = -1.0;
  uint64_t seed = 0;
  int buffer_capacity = 5000;
  int hidden = 64;
  int mixer_embed = 32;
  int hyper_hidden = 64;
  // Environment steps between gradient updates.
  int train_every = 1;
  double grad_clip = 10.0;
  // Deep learners: select next actions with the online network.
  bool double_q = true;

  void Validate() const;
  double EpsilonAt(int episode) const;
  double DiscountFor(const MmdpSpec& spec) const;
};

// Ring buffer of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void Add(Transition t);
  size_t size() const { return items_.size(); }
  size_t capacity() const { return capacity_; }
  uint64_t inserted() const { return inserted_; }
  const Transition& at(size_t i) const { return items_[i]; }
  // `batch` distinct indices drawn uniformly.
  std::vector<size_t> Sample(Rng& rng, size_t batch) const;

 private:
  size_t capacity_;
  size_t next_ = 0;
  uint64_t inserted_ = 0;
  std::vector<Transition> items_;
};

struct TrainDiagnostics {
  int updates = 0;
  // Mean TD loss over the last completed target period.
  double final_loss = 0.0;
  std::vector<double> period_losses;
  // Parameters at the last target copy, kept when training diverges.
  std::optional<ParamStore> last_good;
  // Called after every target copy with the episode count and the policy.
  std::function<void(int, const QTeamPolicy&)> on_target_update;
};

// Independent tabular Q-learning for every agent of `env`.
QTeamPolicy TrainTabularQ(const Environment& env, const TrainConfig& config,
                          TrainDiagnostics* diagnostics = nullptr);

// Value-decomposition deep Q-learning with a shared agent network, replay,
// a periodically copied target network and the given mixer (VDN sum or
// QMIX hypernetwork mixer).
QTeamPolicy TrainDeep(const Environment& env, MixerKind mixer, const TrainConfig& config,
                      TrainDiagnostics* diagnostics = nullptr);

// Exact optimal policy of a tree game from value iteration.
QTeamPolicy SolveTreeByValueIteration(const Environment& env);

QTeamPolicy TrainBase(const Environment& env, BaseAlgo algo, const TrainConfig& config,
                      TrainDiagnostics* diagnostics = nullptr);

struct EvalStats {
  int episodes = 0;
  bool has_win = false;
  double win_rate = 0.0;
  double mean_return = 0.0;
  double mean_episode_length = 0.0;
};

// Greedy rollouts; episode i starts from Reset(DeriveSeed(seed, i)).
EvalStats EvaluatePolicy(const Environment& env, const QTeamPolicy& policy, int n_episodes,
                         uint64_t seed);

// Mean squared one-step TD error of the team value (sum of agent Qs for
// tabular/VDN policies, mixer output for QMIX) over `transitions`.
double MeanSquaredTdError(const QTeamPolicy& policy, const std::vector<Transition>& transitions,
                          double discount);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_LEARNERS_H_
