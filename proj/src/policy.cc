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

#include "sparse_attack/policy.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "sparse_attack/error.h"
#include "sparse_attack/param_io.h"
#include "sparse_attack/rng.h"

namespace sparse_attack {
namespace {

std::string JoinInts(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> SplitInts(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::string Hex(const std::string& bytes) {
  static const char* kDigits = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 15]);
  }
  return out;
}

std::string Unhex(const std::string& hex) {
  if (hex.size() % 2) Fail(ErrorCode::kIoError, "odd-length hex signature");
  std::string out;
  for (size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string ObservationSignature(std::span<const double> obs) {
  return std::string(reinterpret_cast<const char*>(obs.data()), obs.size() * sizeof(double));
}

int ArgmaxLegal(std::span<const double> row, const ActionMask& mask) {
  int best = -1;
  for (int a = 0; a < static_cast<int>(row.size()); ++a) {
    if (!mask.empty() && !mask[a]) continue;
    if (best < 0 || row[a] > row[best]) best = a;
  }
  if (best < 0) Fail(ErrorCode::kNoLegalAction, "mask has no legal action");
  return best;
}

int ArgminLegal(std::span<const double> row, const ActionMask& mask) {
  int best = -1;
  for (int a = 0; a < static_cast<int>(row.size()); ++a) {
    if (!mask.empty() && !mask[a]) continue;
    if (best < 0 || row[a] < row[best]) best = a;
  }
  if (best < 0) Fail(ErrorCode::kNoLegalAction, "mask has no legal action");
  return best;
}

QTeamPolicy QTeamPolicy::Tabular(const MmdpSpec& spec) {
  QTeamPolicy p;
  p.mode_ = PolicyMode::kTabular;
  p.n_agents_ = spec.n_agents;
  p.action_counts_ = spec.action_counts;
  p.obs_dims_ = spec.obs_dims;
  p.tables_.resize(spec.n_agents);
  return p;
}

QTeamPolicy QTeamPolicy::Network(const MmdpSpec& spec, MlpSpec agent_net,
                                 std::optional<MixerSpec> mixer, ParamStore params) {
  for (int i = 1; i < spec.n_agents; ++i) {
    if (spec.obs_dims[i] != spec.obs_dims[0] || spec.action_counts[i] != spec.action_counts[0]) {
      Fail(ErrorCode::kConfigMismatch, "shared agent network needs homogeneous agents");
    }
  }
  QTeamPolicy p;
  p.mode_ = PolicyMode::kNetwork;
  p.n_agents_ = spec.n_agents;
  p.action_counts_ = spec.action_counts;
  p.obs_dims_ = spec.obs_dims;
  p.tables_.resize(spec.n_agents);
  p.agent_net_ = std::move(agent_net);
  p.mixer_ = std::move(mixer);
  p.params_ = std::move(params);
  if (p.agent_net_.input() != p.input_width() ||
      p.agent_net_.output() != spec.action_counts[0]) {
    Fail(ErrorCode::kShapeMismatch, "agent network widths do not fit the environment");
  }
  return p;
}

int QTeamPolicy::input_width() const {
  return obs_dims_[0] + action_counts_[0] + n_agents_;
}

std::vector<double> QTeamPolicy::AgentInput(int agent, std::span<const double> obs,
                                            int prev_action) const {
  const int n_actions = action_counts_[agent];
  std::vector<double> x(obs.begin(), obs.end());
  x.resize(obs.size() + n_actions + n_agents_, 0.0);
  if (prev_action >= 0) x[obs.size() + prev_action] = 1.0;
  x[obs.size() + n_actions + agent] = 1.0;
  return x;
}

std::vector<double>& QTeamPolicy::TableRow(int agent, std::span<const double> obs) {
  auto& row = tables_[agent][ObservationSignature(obs)];
  if (row.empty()) row.assign(action_counts_[agent], 0.0);
  return row;
}

std::vector<double> QTeamPolicy::QValues(int agent, std::span<const double> obs,
                                         int prev_action) const {
  if (agent < 0 || agent >= n_agents_) Fail(ErrorCode::kInvalidArgument, "agent index out of range");
  if (static_cast<int>(obs.size()) != obs_dims_[agent]) {
    Fail(ErrorCode::kShapeMismatch, "observation width mismatch");
  }
  if (mode_ == PolicyMode::kTabular) {
    auto it = tables_[agent].find(ObservationSignature(obs));
    if (it == tables_[agent].end()) return std::vector<double>(action_counts_[agent], 0.0);
    return it->second;
  }
  const std::vector<double> x = AgentInput(agent, obs, prev_action);
  Tensor in = Eigen::Map<const Tensor>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  Tensor q = MlpForwardValue(agent_net_, params_, "agent", in);
  return std::vector<double>(q.data(), q.data() + q.size());
}

int QTeamPolicy::GreedyAction(int agent, std::span<const double> obs, const ActionMask& mask,
                              int prev_action) const {
  if (!mask.empty() && !HasLegalAction(mask)) Fail(ErrorCode::kNoLegalAction, "no legal action");
  return ArgmaxLegal(QValues(agent, obs, prev_action), mask);
}

std::vector<int> QTeamPolicy::GreedyJoint(const EnvState& state) const {
  std::vector<int> actions(n_agents_);
  if (mode_ == PolicyMode::kNetwork) {
    const int width = input_width();
    Tensor in(n_agents_, width);
    for (int i = 0; i < n_agents_; ++i) {
      const std::vector<double> x = AgentInput(i, state.observations[i], state.prev_actions[i]);
      in.row(i) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), width);
    }
    const Tensor q = MlpForwardValue(agent_net_, params_, "agent", in);
    for (int i = 0; i < n_agents_; ++i) {
      actions[i] = ArgmaxLegal(std::span<const double>(q.row(i).data(), q.cols()),
                               state.action_masks[i]);
    }
    return actions;
  }
  for (int i = 0; i < n_agents_; ++i) {
    actions[i] = GreedyAction(i, state.observations[i], state.action_masks[i],
                              state.prev_actions[i]);
  }
  return actions;
}

uint64_t QTeamPolicy::Hash() const {
  std::string bytes;
  if (mode_ == PolicyMode::kTabular) {
    for (int i = 0; i < n_agents_; ++i) {
      std::map<std::string, const std::vector<double>*> sorted;
      for (const auto& [k, v] : tables_[i]) sorted[k] = &v;
      for (const auto& [k, v] : sorted) {
        bytes += k;
        bytes.append(reinterpret_cast<const char*>(v->data()), v->size() * sizeof(double));
      }
      bytes += '|';
    }
  } else {
    for (size_t i = 0; i < params_.size(); ++i) {
      bytes += params_.names()[i];
      const Tensor& t = params_.value(i);
      bytes.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
    }
  }
  return Fnv1a(bytes);
}

void SavePolicy(const QTeamPolicy& policy, const std::string& stem) {
  std::ofstream out(stem + ".policy");
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + stem + ".policy");
  const PolicyHeader& h = policy.header;
  out << "sparse-attack-policy 1\n";
  out << "mode = " << (policy.mode() == PolicyMode::kTabular ? "tabular" : "network") << "\n";
  out << "role = " << h.role << "\n";
  out << "algo = " << h.algo << "\n";
  out << "env = " << h.env_fingerprint << "\n";
  out << "seed = " << h.seed << "\n";
  out << "config_hash = " << h.config_hash << "\n";
  out << "n_agents = " << policy.n_agents() << "\n";
  out << "action_counts = " << JoinInts(policy.action_counts()) << "\n";
  out << "obs_dims = " << JoinInts(policy.obs_dims()) << "\n";
  out << "targets = " << JoinInts(h.targets) << "\n";
  out << "lambda = " << FormatDouble(h.lambda) << "\n";
  out << "base_hash = " << h.base_hash << "\n";
  ParamStore store;
  if (policy.mode() == PolicyMode::kNetwork) {
    out << "agent_net = " << JoinInts(policy.agent_net().widths) << "\n";
    if (policy.mixer()) {
      const MixerSpec& m = *policy.mixer();
      out << "mixer = " << (m.kind == MixerKind::kVdn ? "vdn" : "qmix") << ","
          << m.n_inputs << "," << m.state_dim << "," << m.embed_dim << ","
          << m.hyper_hidden << "\n";
    } else {
      out << "mixer = none\n";
    }
    store = policy.params();
  } else {
    for (int i = 0; i < policy.n_agents(); ++i) {
      std::map<std::string, const std::vector<double>*> sorted;
      for (const auto& [k, v] : policy.table(i)) sorted[k] = &v;
      for (const auto& [k, v] : sorted) {
        Tensor t = Eigen::Map<const Tensor>(v->data(), 1, static_cast<Eigen::Index>(v->size()));
        store.Add("table." + std::to_string(i) + "." + Hex(k), std::move(t));
      }
    }
  }
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + stem + ".policy");
  SaveParams(store, stem + ".manifest", stem + ".bin");
}

QTeamPolicy LoadPolicy(const std::string& stem) {
  std::ifstream in(stem + ".policy");
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + stem + ".policy");
  std::string line;
  std::getline(in, line);
  if (line != "sparse-attack-policy 1") Fail(ErrorCode::kIoError, "bad policy header in " + stem);
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) Fail(ErrorCode::kIoError, "policy header lacks " + k);
    return it->second;
  };
  MmdpSpec spec;
  spec.n_agents = std::stoi(get("n_agents"));
  spec.action_counts = SplitInts(get("action_counts"));
  spec.obs_dims = SplitInts(get("obs_dims"));
  ParamStore store = LoadParams(stem + ".manifest", stem + ".bin");

  QTeamPolicy policy;
  if (get("mode") == "tabular") {
    policy = QTeamPolicy::Tabular(spec);
    for (size_t i = 0; i < store.size(); ++i) {
      const std::string& name = store.names()[i];
      const auto dot1 = name.find('.');
      const auto dot2 = name.find('.', dot1 + 1);
      if (name.compare(0, dot1, "table") != 0 || dot2 == std::string::npos) {
        Fail(ErrorCode::kIoError, "unexpected tensor in tabular policy: " + name);
      }
      const int agent = std::stoi(name.substr(dot1 + 1, dot2 - dot1 - 1));
      const Tensor& t = store.value(i);
      policy.mutable_table(agent)[Unhex(name.substr(dot2 + 1))] =
          std::vector<double>(t.data(), t.data() + t.size());
    }
  } else {
    MlpSpec net{SplitInts(get("agent_net"))};
    std::optional<MixerSpec> mixer;
    const std::string m = get("mixer");
    if (m != "none") {
      const auto comma = m.find(',');
      const std::vector<int> dims = SplitInts(m.substr(comma + 1));
      MixerSpec ms;
      ms.kind = m.substr(0, comma) == "vdn" ? MixerKind::kVdn : MixerKind::kQmix;
      ms.n_inputs = dims.at(0);
      ms.state_dim = dims.at(1);
      ms.embed_dim = dims.at(2);
      ms.hyper_hidden = dims.at(3);
      mixer = ms;
    }
    policy = QTeamPolicy::Network(spec, std::move(net), mixer, std::move(store));
  }
  PolicyHeader& h = policy.header;
  h.role = get("role");
  h.algo = get("algo");
  h.env_fingerprint = get("env");
  h.seed = std::stoull(get("seed"));
  h.config_hash = std::stoull(get("config_hash"));
  h.targets = SplitInts(get("targets"));
  h.lambda = std::stod(get("lambda"));
  h.base_hash = std::stoull(get("base_hash"));
  return policy;
}

}  // namespace sparse_attack
