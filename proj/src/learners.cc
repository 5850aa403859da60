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

#include "sparse_attack/learners.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparse_attack/error.h"
#include "sparse_attack/optimizer.h"
#include "sparse_attack/oracle.h"
#include "sparse_attack/tree_game.h"

namespace sparse_attack {
namespace {

int RandomLegal(Rng& rng, const ActionMask& mask) {
  std::vector<int> legal;
  for (int a = 0; a < static_cast<int>(mask.size()); ++a) {
    if (mask[a]) legal.push_back(a);
  }
  if (legal.empty()) Fail(ErrorCode::kNoLegalAction, "no legal action to explore");
  return legal[rng.UniformInt(static_cast<int>(legal.size()))];
}

double MaxLegal(std::span<const double> row, const ActionMask& mask) {
  return row[ArgmaxLegal(row, mask)];
}

Transition MakeTransition(const EnvState& s, const JointAction& a, const StepResult& r) {
  Transition t;
  t.state = s.global_state;
  t.obs_k = s.observations;
  t.prev_actions_k = s.prev_actions;
  t.actions_k = a.actions;
  t.reward = r.reward;
  t.next_state = r.next.global_state;
  t.next_obs_k = r.next.observations;
  t.next_masks_k = r.next.action_masks;
  t.terminal = r.next.terminal;
  return t;
}

}  // namespace

std::string AlgoName(BaseAlgo algo) {
  switch (algo) {
    case BaseAlgo::kTabularVI: return "tabular-vi";
    case BaseAlgo::kTabularQ: return "tabular-q";
    case BaseAlgo::kVdn: return "vdn";
    case BaseAlgo::kQmix: return "qmix";
  }
  return "unknown";
}

BaseAlgo ParseAlgo(const std::string& name) {
  if (name == "tabular-vi") return BaseAlgo::kTabularVI;
  if (name == "tabular-q") return BaseAlgo::kTabularQ;
  if (name == "vdn") return BaseAlgo::kVdn;
  if (name == "qmix") return BaseAlgo::kQmix;
  Fail(ErrorCode::kConfigError, "unknown algorithm '" + name + "'");
}

void TrainConfig::Validate() const {
  if (episodes < 0) Fail(ErrorCode::kConfigError, "episodes must be >= 0");
  for (double e : {eps_start, eps_end}) {
    if (e < 0.0 || e > 1.0) Fail(ErrorCode::kConfigError, "epsilon must lie in [0, 1]");
  }
  if (eps_anneal_fraction < 0.0 || eps_anneal_fraction > 1.0) {
    Fail(ErrorCode::kConfigError, "eps_anneal_fraction must lie in [0, 1]");
  }
  if (batch_size < 1 || target_update_episodes < 1 || train_every < 1 || buffer_capacity < 1) {
    Fail(ErrorCode::kConfigError, "batch size, periods and capacity must be >= 1");
  }
  if (discount > 1.0) Fail(ErrorCode::kConfigError, "discount must be <= 1");
  if (!(learning_rate > 0.0)) Fail(ErrorCode::kConfigError, "learning_rate must be > 0");
  if (hidden < 1 || mixer_embed < 1 || hyper_hidden < 1) {
    Fail(ErrorCode::kConfigError, "network widths must be >= 1");
  }
}

double TrainConfig::EpsilonAt(int episode) const {
  const double span = eps_anneal_fraction * episodes;
  if (span <= 0.0 || episode >= span) return eps_end;
  return eps_start + (eps_end - eps_start) * (episode / span);
}

double TrainConfig::DiscountFor(const MmdpSpec& spec) const {
  return discount < 0.0 ? spec.discount : discount;
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) Fail(ErrorCode::kInvalidArgument, "replay capacity must be >= 1");
  items_.reserve(std::min<size_t>(capacity, 1 << 16));
}

void ReplayBuffer::Add(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
  ++inserted_;
}

std::vector<size_t> ReplayBuffer::Sample(Rng& rng, size_t batch) const {
  if (batch > items_.size()) Fail(ErrorCode::kInvalidArgument, "batch larger than buffer");
  // Floyd's algorithm: distinct indices without materializing a permutation.
  std::vector<size_t> out;
  out.reserve(batch);
  const size_t n = items_.size();
  for (size_t j = n - batch; j < n; ++j) {
    const size_t r = static_cast<size_t>(rng.UniformInt(static_cast<int>(j + 1)));
    if (std::find(out.begin(), out.end(), r) == out.end()) {
      out.push_back(r);
    } else {
      out.push_back(j);
    }
  }
  return out;
}

QTeamPolicy TrainTabularQ(const Environment& env, const TrainConfig& config,
                          TrainDiagnostics* diagnostics) {
  config.Validate();
  const MmdpSpec& spec = env.spec();
  const double gamma = config.DiscountFor(spec);
  QTeamPolicy policy = QTeamPolicy::Tabular(spec);
  std::vector<std::unordered_map<std::string, std::vector<int>>> visits(spec.n_agents);
  Rng rng(DeriveSeed(config.seed, 0x7ab));
  JointAction action;
  action.actions.resize(spec.n_agents);
  for (int ep = 0; ep < config.episodes; ++ep) {
    const double eps = config.EpsilonAt(ep);
    EnvState s = env.Reset(DeriveSeed(config.seed, ep));
    while (!s.terminal) {
      for (int i = 0; i < spec.n_agents; ++i) {
        if (rng.Bernoulli(eps)) {
          action.actions[i] = RandomLegal(rng, s.action_masks[i]);
        } else {
          action.actions[i] = ArgmaxLegal(policy.TableRow(i, s.observations[i]), s.action_masks[i]);
        }
      }
      StepResult r = env.Step(s, action);
      for (int i = 0; i < spec.n_agents; ++i) {
        std::vector<double>& row = policy.TableRow(i, s.observations[i]);
        double target = r.reward;
        if (!r.next.terminal) {
          target += gamma * MaxLegal(policy.TableRow(i, r.next.observations[i]),
                                     r.next.action_masks[i]);
        }
        const int a = action.actions[i];
        double alpha = config.tabular_lr;
        if (alpha <= 0.0) {
          auto& n = visits[i][ObservationSignature(s.observations[i])];
          if (n.empty()) n.assign(spec.action_counts[i], 0);
          alpha = 1.0 / ++n[a];
        }
        row[a] += alpha * (target - row[a]);
      }
      s = std::move(r.next);
    }
  }
  if (diagnostics) diagnostics->updates = config.episodes;
  policy.header.algo = AlgoName(BaseAlgo::kTabularQ);
  policy.header.env_fingerprint = env.Fingerprint();
  policy.header.seed = config.seed;
  return policy;
}

namespace {

// Stacks the learning agents' network inputs for a batch, row b*n + i.
Tensor BatchInputs(const QTeamPolicy& policy, const ReplayBuffer& buffer,
                   const std::vector<size_t>& batch, bool next) {
  const int n = policy.n_agents();
  const int width = policy.input_width();
  Tensor x(static_cast<Eigen::Index>(batch.size()) * n, width);
  for (size_t b = 0; b < batch.size(); ++b) {
    const Transition& t = buffer.at(batch[b]);
    for (int i = 0; i < n; ++i) {
      const std::vector<double> in =
          next ? policy.AgentInput(i, t.next_obs_k[i], t.actions_k[i])
               : policy.AgentInput(i, t.obs_k[i], t.prev_actions_k[i]);
      x.row(b * n + i) = Eigen::Map<const Eigen::RowVectorXd>(in.data(), width);
    }
  }
  return x;
}

Tensor BatchStates(const ReplayBuffer& buffer, const std::vector<size_t>& batch, bool next) {
  const auto& first = next ? buffer.at(batch[0]).next_state : buffer.at(batch[0]).state;
  Tensor s(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(first.size()));
  for (size_t b = 0; b < batch.size(); ++b) {
    const auto& v = next ? buffer.at(batch[b]).next_state : buffer.at(batch[b]).state;
    s.row(b) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), s.cols());
  }
  return s;
}

// One gradient step on the mixed TD loss. Returns the loss value.
double DeepUpdate(QTeamPolicy& policy, const ParamStore& target, OptimizerState& opt,
                  const ReplayBuffer& buffer, const std::vector<size_t>& batch,
                  double gamma, double grad_clip, bool double_q) {
  const int n = policy.n_agents();
  const int B = static_cast<int>(batch.size());
  const MlpSpec& net = policy.agent_net();
  const MixerSpec& mixer = *policy.mixer();
  ParamStore& params = policy.mutable_params();

  std::vector<int> actions(static_cast<size_t>(B) * n);
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < n; ++i) actions[b * n + i] = buffer.at(batch[b]).actions_k[i];
  }

  Tape tape;
  Tape::Var q = MlpForward(tape, net, params, "agent",
                           tape.Constant(BatchInputs(policy, buffer, batch, false)));
  Tape::Var chosen = tape.Reshape(tape.Gather(q, actions), B, n);
  Tape::Var qtot = MixerForward(tape, mixer, params, "mixer", chosen,
                                tape.Constant(BatchStates(buffer, batch, false)));

  // Target: greedy next-step utilities from the frozen target network.
  const Tensor next_inputs = BatchInputs(policy, buffer, batch, true);
  const Tensor qn = MlpForwardValue(net, target, "agent", next_inputs);
  // Double Q: the online network picks the next action, the target rates it.
  Tensor qn_online;
  if (double_q) qn_online = MlpForwardValue(net, params, "agent", next_inputs);
  Tensor next_qs(B, n);
  for (int b = 0; b < B; ++b) {
    const Transition& t = buffer.at(batch[b]);
    for (int i = 0; i < n; ++i) {
      const Eigen::Index r = static_cast<Eigen::Index>(b) * n + i;
      const auto row = std::span<const double>(qn.row(r).data(), qn.cols());
      if (double_q) {
        const auto online = std::span<const double>(qn_online.row(r).data(), qn.cols());
        next_qs(b, i) = row[ArgmaxLegal(online, t.next_masks_k[i])];
      } else {
        next_qs(b, i) = MaxLegal(row, t.next_masks_k[i]);
      }
    }
  }
  const Tensor next_tot =
      MixerForwardValue(mixer, target, "mixer", next_qs, BatchStates(buffer, batch, true));
  Tensor y(B, 1);
  for (int b = 0; b < B; ++b) {
    const Transition& t = buffer.at(batch[b]);
    y(b, 0) = t.reward + (t.terminal ? 0.0 : gamma * next_tot(b, 0));
  }
  Tape::Var loss = tape.Mean(tape.Square(tape.Sub(qtot, tape.Constant(y))));
  tape.Backward(loss);
  ParamStore grads = tape.Gradients(params);
  ClipGradNorm(grads, grad_clip);
  OptimizerStep(opt, params, grads);
  return tape.value(loss)(0, 0);
}

}  // namespace

QTeamPolicy TrainDeep(const Environment& env, MixerKind mixer_kind, const TrainConfig& config,
                      TrainDiagnostics* diagnostics) {
  config.Validate();
  const MmdpSpec& spec = env.spec();
  const double gamma = config.DiscountFor(spec);
  const int n = spec.n_agents;
  const int n_actions = spec.action_counts[0];

  MlpSpec net{{spec.obs_dims[0] + n_actions + n, config.hidden, config.hidden, n_actions}};
  MixerSpec mixer;
  mixer.kind = mixer_kind;
  mixer.n_inputs = n;
  mixer.state_dim = spec.state_dim;
  mixer.embed_dim = config.mixer_embed;
  mixer.hyper_hidden = config.hyper_hidden;

  ParamStore params;
  Rng init_rng(DeriveSeed(config.seed, 0x1417));
  InitMlp(net, "agent", init_rng, params);
  InitMixer(mixer, "mixer", init_rng, params);
  QTeamPolicy policy = QTeamPolicy::Network(spec, net, mixer, std::move(params));
  ParamStore target = policy.params();
  OptimizerState opt = MakeOptimizer(policy.params(), config.learning_rate);
  ReplayBuffer buffer(config.buffer_capacity);
  Rng rng(DeriveSeed(config.seed, 0xe9));

  TrainDiagnostics local;
  TrainDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag.last_good = policy.params();
  double period_loss = 0.0;
  int period_updates = 0;
  uint64_t env_steps = 0;

  JointAction action;
  action.actions.resize(n);
  for (int ep = 0; ep < config.episodes; ++ep) {
    const double eps = config.EpsilonAt(ep);
    EnvState s = env.Reset(DeriveSeed(config.seed, ep));
    while (!s.terminal) {
      const std::vector<int> greedy = policy.GreedyJoint(s);
      for (int i = 0; i < n; ++i) {
        action.actions[i] = rng.Bernoulli(eps) ? RandomLegal(rng, s.action_masks[i]) : greedy[i];
      }
      StepResult r = env.Step(s, action);
      buffer.Add(MakeTransition(s, action, r));
      s = std::move(r.next);
      ++env_steps;
      if (buffer.size() >= static_cast<size_t>(config.batch_size) &&
          env_steps % config.train_every == 0) {
        const std::vector<size_t> batch = buffer.Sample(rng, config.batch_size);
        double loss = 0.0;
        try {
          loss = DeepUpdate(policy, target, opt, buffer, batch, gamma, config.grad_clip,
                            config.double_q);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNonFinite) throw;
          Fail(ErrorCode::kDivergedTraining,
               "non-finite loss at episode " + std::to_string(ep) + "; last good parameters kept");
        }
        if (!std::isfinite(loss)) {
          Fail(ErrorCode::kDivergedTraining, "non-finite loss at episode " + std::to_string(ep));
        }
        period_loss += loss;
        ++period_updates;
        ++diag.updates;
      }
    }
    if ((ep + 1) % config.target_update_episodes == 0) {
      target = policy.params();
      diag.last_good = policy.params();
      if (period_updates > 0) {
        diag.period_losses.push_back(period_loss / period_updates);
        diag.final_loss = diag.period_losses.back();
      }
      period_loss = 0.0;
      period_updates = 0;
      if (diag.on_target_update) diag.on_target_update(ep + 1, policy);
    }
  }
  if (period_updates > 0) {
    diag.period_losses.push_back(period_loss / period_updates);
    diag.final_loss = diag.period_losses.back();
  }
  policy.header.algo = mixer_kind == MixerKind::kVdn ? "vdn" : "qmix";
  policy.header.env_fingerprint = env.Fingerprint();
  policy.header.seed = config.seed;
  return policy;
}

QTeamPolicy SolveTreeByValueIteration(const Environment& env) {
  const auto* tree_env = dynamic_cast<const TreeGameEnv*>(&env);
  if (!tree_env) Fail(ErrorCode::kConfigMismatch, "value iteration needs a tree game");
  const TreeGameSpec& tree = tree_env->tree();
  const TreeQTable q = ValueIteration(tree);
  QTeamPolicy policy = QTeamPolicy::Tabular(env.spec());
  for (uint64_t node = 0; node < q.num_internal(); ++node) {
    const double obs = static_cast<double>(node);
    const auto row = q.Row(node);
    policy.mutable_table(0)[ObservationSignature({&obs, 1})] =
        std::vector<double>(row.begin(), row.end());
  }
  policy.header.algo = AlgoName(BaseAlgo::kTabularVI);
  policy.header.env_fingerprint = env.Fingerprint();
  return policy;
}

QTeamPolicy TrainBase(const Environment& env, BaseAlgo algo, const TrainConfig& config,
                      TrainDiagnostics* diagnostics) {
  const bool is_tree = dynamic_cast<const TreeGameEnv*>(&env) != nullptr;
  switch (algo) {
    case BaseAlgo::kTabularVI:
      if (!is_tree) Fail(ErrorCode::kConfigMismatch, "tabular-vi runs on tree games only");
      return SolveTreeByValueIteration(env);
    case BaseAlgo::kTabularQ:
      if (!is_tree) Fail(ErrorCode::kConfigMismatch, "tabular-q runs on tree games only");
      return TrainTabularQ(env, config, diagnostics);
    case BaseAlgo::kVdn:
      return TrainDeep(env, MixerKind::kVdn, config, diagnostics);
    case BaseAlgo::kQmix:
      return TrainDeep(env, MixerKind::kQmix, config, diagnostics);
  }
  Fail(ErrorCode::kConfigMismatch, "unknown algorithm");
}

EvalStats EvaluatePolicy(const Environment& env, const QTeamPolicy& policy, int n_episodes,
                         uint64_t seed) {
  if (n_episodes <= 0) Fail(ErrorCode::kEmptyEvaluation, "n_episodes must be positive");
  if (policy.n_agents() != env.spec().n_agents) {
    Fail(ErrorCode::kConfigMismatch, "policy and environment disagree on agent count");
  }
  EvalStats stats;
  stats.episodes = n_episodes;
  stats.has_win = env.HasWinCondition();
  double wins = 0.0, returns = 0.0, lengths = 0.0;
  JointAction action;
  for (int e = 0; e < n_episodes; ++e) {
    EnvState s = env.Reset(DeriveSeed(seed, e));
    double ret = 0.0;
    while (!s.terminal) {
      action.actions = policy.GreedyJoint(s);
      StepResult r = env.Step(s, action);
      ret += r.reward;
      s = std::move(r.next);
    }
    wins += s.won ? 1.0 : 0.0;
    returns += ret;
    lengths += s.step_index;
  }
  stats.win_rate = stats.has_win ? wins / n_episodes : 0.0;
  stats.mean_return = returns / n_episodes;
  stats.mean_episode_length = lengths / n_episodes;
  return stats;
}

double MeanSquaredTdError(const QTeamPolicy& policy, const std::vector<Transition>& transitions,
                          double discount) {
  if (transitions.empty()) Fail(ErrorCode::kEmptyEvaluation, "no transitions");
  const int n = policy.n_agents();
  const bool mixed = policy.mode() == PolicyMode::kNetwork && policy.mixer() &&
                     policy.mixer()->kind == MixerKind::kQmix;
  double total = 0.0;
  for (const Transition& t : transitions) {
    Tensor qs(1, n), next_qs(1, n);
    for (int i = 0; i < n; ++i) {
      qs(0, i) = policy.QValues(i, t.obs_k[i], t.prev_actions_k[i])[t.actions_k[i]];
      const auto next_row = policy.QValues(i, t.next_obs_k[i], t.actions_k[i]);
      next_qs(0, i) = t.terminal ? 0.0 : MaxLegal(next_row, t.next_masks_k[i]);
    }
    double q = qs.sum();
    double next = next_qs.sum();
    if (mixed) {
      const Tensor s = Eigen::Map<const Tensor>(t.state.data(), 1, static_cast<Eigen::Index>(t.state.size()));
      const Tensor sn = Eigen::Map<const Tensor>(t.next_state.data(), 1, static_cast<Eigen::Index>(t.next_state.size()));
      q = MixerForwardValue(*policy.mixer(), policy.params(), "mixer", qs, s)(0, 0);
      next = t.terminal ? 0.0 : MixerForwardValue(*policy.mixer(), policy.params(), "mixer", next_qs, sn)(0, 0);
    }
    const double err = t.reward + discount * next - q;
    total += err * err;
  }
  return total / transitions.size();
}

}  // namespace sparse_attack
