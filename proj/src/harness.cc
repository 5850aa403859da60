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

#include "sparse_attack/harness.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "sparse_attack/error.h"
#include "sparse_attack/oracle.h"
#include "sparse_attack/tree_game.h"

namespace sparse_attack {
namespace {

using nlohmann::json;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  Fail(ErrorCode::kConfigError, "bad value '" + value + "' for key '" + key + "'");
}

double ToReal(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) BadValue(key, v);
    return x;
  } catch (const std::logic_error&) {
    BadValue(key, v);
  }
}

int64_t ToInt(const std::string& key, const std::string& v) {
  int64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(key, v);
  return x;
}

uint64_t ToU64(const std::string& key, const std::string& v) {
  uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(key, v);
  return x;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  BadValue(key, v);
}

std::string Real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string Fixed3(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

bool SetTrainValue(TrainConfig& c, const std::string& field, const std::string& key,
                   const std::string& v) {
  if (field == "episodes") c.episodes = static_cast<int>(ToInt(key, v));
  else if (field == "eps_start") c.eps_start = ToReal(key, v);
  else if (field == "eps_end") c.eps_end = ToReal(key, v);
  else if (field == "eps_anneal_fraction") c.eps_anneal_fraction = ToReal(key, v);
  else if (field == "learning_rate") c.learning_rate = ToReal(key, v);
  else if (field == "tabular_lr") c.tabular_lr = ToReal(key, v);
  else if (field == "batch_size") c.batch_size = static_cast<int>(ToInt(key, v));
  else if (field == "target_update_episodes") c.target_update_episodes = static_cast<int>(ToInt(key, v));
  else if (field == "discount") c.discount = ToReal(key, v);
  else if (field == "buffer_capacity") c.buffer_capacity = static_cast<int>(ToInt(key, v));
  else if (field == "hidden") c.hidden = static_cast<int>(ToInt(key, v));
  else if (field == "mixer_embed") c.mixer_embed = static_cast<int>(ToInt(key, v));
  else if (field == "hyper_hidden") c.hyper_hidden = static_cast<int>(ToInt(key, v));
  else if (field == "train_every") c.train_every = static_cast<int>(ToInt(key, v));
  else if (field == "grad_clip") c.grad_clip = ToReal(key, v);
  else if (field == "double_q") c.double_q = ToBool(key, v);
  else return false;
  return true;
}

void AppendTrain(std::ostringstream& out, const std::string& prefix, const TrainConfig& c) {
  out << prefix << ".batch_size = " << c.batch_size << '\n'
      << prefix << ".buffer_capacity = " << c.buffer_capacity << '\n'
      << prefix << ".discount = " << Real(c.discount) << '\n'
      << prefix << ".double_q = " << (c.double_q ? "true" : "false") << '\n'
      << prefix << ".episodes = " << c.episodes << '\n'
      << prefix << ".eps_anneal_fraction = " << Real(c.eps_anneal_fraction) << '\n'
      << prefix << ".eps_end = " << Real(c.eps_end) << '\n'
      << prefix << ".eps_start = " << Real(c.eps_start) << '\n'
      << prefix << ".grad_clip = " << Real(c.grad_clip) << '\n'
      << prefix << ".hidden = " << c.hidden << '\n'
      << prefix << ".hyper_hidden = " << c.hyper_hidden << '\n'
      << prefix << ".learning_rate = " << Real(c.learning_rate) << '\n'
      << prefix << ".mixer_embed = " << c.mixer_embed << '\n'
      << prefix << ".tabular_lr = " << Real(c.tabular_lr) << '\n'
      << prefix << ".target_update_episodes = " << c.target_update_episodes << '\n'
      << prefix << ".train_every = " << c.train_every << '\n';
}

std::string JoinInts(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<double> SplitReals(const std::string& s, char sep) {
  std::vector<double> out;
  if (s.empty() || s == "-") return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(ToReal("report", item));
  return out;
}

std::string ParameterLabel(const ExperimentConfig& c) {
  switch (c.method) {
    case AttackMethod::kOpt:
    case AttackMethod::kOracleReg:
      return "lambda=" + Real(c.lambda);
    case AttackMethod::kRaR:
    case AttackMethod::kRaL:
      return "prob=" + Real(c.prob);
    case AttackMethod::kRuB:
      return DeltaRuleName(c.rule) + ">=" + Real(c.threshold);
    case AttackMethod::kRlf:
      return "c_adv=" + Real(c.c_adv);
    case AttackMethod::kOracleBudget:
      return "N=" + std::to_string(c.budget);
    case AttackMethod::kNone:
    case AttackMethod::kRuD:
      return "-";
  }
  return "-";
}

bool IsTree(const EnvConfig& e) { return e.kind.rfind("tree_", 0) == 0; }

std::string BaseKey(const ExperimentConfig& c, const Environment& env, int index) {
  std::ostringstream out;
  out << env.Fingerprint() << '|' << AlgoName(c.base_algo) << '|' << c.base_policy_path << '|'
      << c.master_seed << '|' << index << '\n';
  AppendTrain(out, "base", c.base_train);
  return out.str();
}

SeedResult FromStats(const std::vector<AttackStats>& stats, bool has_win) {
  const AttackSummary s = Summarize(stats, has_win);
  SeedResult r;
  r.has_win = has_win;
  r.win_rate = s.win_rate;
  r.mean_return = s.mean_return;
  r.mean_attacked_steps = s.mean_attacked_steps;
  r.mean_total_steps = s.mean_total_steps;
  return r;
}

// Checks that the per-episode counts agree with the per-step log.
void CheckAccounting(const std::vector<AttackStats>& stats,
                     const std::vector<AttackStepLog>& log) {
  int64_t from_stats = 0, from_log = 0;
  for (const AttackStats& s : stats) from_stats += s.TotalAttacks();
  for (const AttackStepLog& l : log) from_log += l.deviations;
  if (from_stats != from_log) {
    Fail(ErrorCode::kInvalidArgument, "attack accounting disagrees with the step log");
  }
}

bool IsConfigProblem(ErrorCode code) {
  return code == ErrorCode::kConfigError || code == ErrorCode::kConfigMismatch ||
         code == ErrorCode::kBadTargets || code == ErrorCode::kInvalidIndices ||
         code == ErrorCode::kTooLarge;
}

}  // namespace

std::shared_ptr<const Environment> MakeEnvironment(const EnvConfig& c) {
  if (c.kind == "tree_example1") {
    return std::make_shared<TreeGameEnv>(BuildExample1(c.depth, c.t, c.p, c.tree_seed));
  }
  if (c.kind == "tree_example2") {
    return std::make_shared<TreeGameEnv>(BuildExample2(c.depth, c.p, c.tree_seed));
  }
  if (c.kind == "tree_random") {
    return std::make_shared<TreeGameEnv>(BuildRandomTree(c.depth, c.branching, c.tree_seed));
  }
  if (c.kind == "goalgather") return std::make_shared<GoalGatherEnv>(c.grid);
  Fail(ErrorCode::kConfigError, "unknown environment kind '" + c.kind + "'");
}

std::string MethodName(AttackMethod method) {
  switch (method) {
    case AttackMethod::kNone: return "none";
    case AttackMethod::kOpt: return "OPT";
    case AttackMethod::kRaR: return "Ra-R";
    case AttackMethod::kRaL: return "Ra-L";
    case AttackMethod::kRuB: return "Ru-B";
    case AttackMethod::kRuD: return "Ru-D";
    case AttackMethod::kRlf: return "RL-F";
    case AttackMethod::kOracleBudget: return "oracle-budget";
    case AttackMethod::kOracleReg: return "oracle-reg";
  }
  return "none";
}

AttackMethod ParseMethod(const std::string& name) {
  for (AttackMethod m : {AttackMethod::kNone, AttackMethod::kOpt, AttackMethod::kRaR,
                         AttackMethod::kRaL, AttackMethod::kRuB, AttackMethod::kRuD,
                         AttackMethod::kRlf, AttackMethod::kOracleBudget,
                         AttackMethod::kOracleReg}) {
    if (MethodName(m) == name) return m;
  }
  Fail(ErrorCode::kConfigError, "unknown attack method '" + name + "'");
}

void ExperimentConfig::Validate() const {
  if (n_seeds < 1) Fail(ErrorCode::kConfigError, "run.n_seeds must be >= 1");
  if (n_eval_episodes < 1) Fail(ErrorCode::kConfigError, "eval.episodes must be >= 1");
  base_train.Validate();
  attack_train.Validate();
  if (!std::isfinite(lambda) || lambda < 0.0) {
    Fail(ErrorCode::kConfigError, "attack.lambda must be finite and >= 0");
  }
  if (!(prob >= 0.0 && prob <= 1.0)) Fail(ErrorCode::kConfigError, "attack.prob must lie in [0, 1]");
  if (std::isnan(threshold)) Fail(ErrorCode::kConfigError, "attack.threshold is NaN");
  if (!std::isfinite(c_adv) || c_adv < 0.0) Fail(ErrorCode::kConfigError, "attack.c_adv must be >= 0");
  if (budget < 0) Fail(ErrorCode::kConfigError, "attack.budget must be >= 0");
  if (env.kind == "goalgather") env.grid.Validate();
  const bool tree = IsTree(env);
  if ((method == AttackMethod::kOracleBudget || method == AttackMethod::kOracleReg) && !tree) {
    Fail(ErrorCode::kConfigMismatch, "oracle methods need a tree environment");
  }
  if (!tree && (base_algo == BaseAlgo::kTabularVI || base_algo == BaseAlgo::kTabularQ) &&
      base_policy_path.empty()) {
    Fail(ErrorCode::kConfigMismatch, "tabular base learners need a tree environment");
  }
}

void SetConfigValue(ExperimentConfig& c, const std::string& key, const std::string& v) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) Fail(ErrorCode::kConfigError, "key '" + key + "' has no section");
  const std::string section = key.substr(0, dot);
  const std::string field = key.substr(dot + 1);
  auto unknown = [&]() { Fail(ErrorCode::kConfigError, "unknown config key '" + key + "'"); };
  if (section == "env") {
    GridTeamSpec& g = c.env.grid;
    if (field == "kind") c.env.kind = v;
    else if (field == "depth") c.env.depth = static_cast<int>(ToInt(key, v));
    else if (field == "t") c.env.t = static_cast<int>(ToInt(key, v));
    else if (field == "p") c.env.p = static_cast<int>(ToInt(key, v));
    else if (field == "branching") c.env.branching = static_cast<int>(ToInt(key, v));
    else if (field == "seed") c.env.tree_seed = ToU64(key, v);
    else if (field == "width") g.width = static_cast<int>(ToInt(key, v));
    else if (field == "height") g.height = static_cast<int>(ToInt(key, v));
    else if (field == "n_agents") g.n_agents = static_cast<int>(ToInt(key, v));
    else if (field == "n_goals") g.n_goals = static_cast<int>(ToInt(key, v));
    else if (field == "horizon") g.horizon = static_cast<int>(ToInt(key, v));
    else if (field == "obs_radius") g.obs_radius = static_cast<int>(ToInt(key, v));
    else if (field == "reward_win") g.reward_win = ToReal(key, v);
    else if (field == "reward_step") g.reward_step = ToReal(key, v);
    else if (field == "reward_progress") g.reward_progress = ToReal(key, v);
    else unknown();
  } else if (section == "base") {
    if (field == "algo") c.base_algo = ParseAlgo(v);
    else if (field == "policy_path") c.base_policy_path = v;
    else if (!SetTrainValue(c.base_train, field, key, v)) unknown();
  } else if (section == "attack") {
    if (field == "method") c.method = ParseMethod(v);
    else if (field == "algo") c.attacker_algo = ParseAttackerAlgo(v);
    else if (field == "lambda") c.lambda = ToReal(key, v);
    else if (field == "prob") c.prob = ToReal(key, v);
    else if (field == "threshold") c.threshold = ToReal(key, v);
    else if (field == "rule") c.rule = ParseDeltaRule(v);
    else if (field == "c_adv") c.c_adv = ToReal(key, v);
    else if (field == "budget") c.budget = static_cast<int>(ToInt(key, v));
    else if (field == "targets") {
      c.targets.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        c.targets.push_back(static_cast<int>(ToInt(key, Trim(item))));
      }
    } else if (!SetTrainValue(c.attack_train, field, key, v)) {
      unknown();
    }
  } else if (section == "eval") {
    if (field == "episodes") c.n_eval_episodes = static_cast<int>(ToInt(key, v));
    else unknown();
  } else if (section == "run") {
    if (field == "n_seeds") c.n_seeds = static_cast<int>(ToInt(key, v));
    else if (field == "master_seed") c.master_seed = ToU64(key, v);
    else unknown();
  } else {
    unknown();
  }
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig c;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    SetConfigValue(c, Trim(t.substr(0, eq)), Trim(t.substr(eq + 1)));
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string CanonicalConfig(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "attack.algo = " << AttackerAlgoName(c.attacker_algo) << '\n';
  AppendTrain(out, "attack", c.attack_train);
  out << "attack.budget = " << c.budget << '\n'
      << "attack.c_adv = " << Real(c.c_adv) << '\n'
      << "attack.lambda = " << Real(c.lambda) << '\n'
      << "attack.method = " << MethodName(c.method) << '\n'
      << "attack.prob = " << Real(c.prob) << '\n'
      << "attack.rule = " << DeltaRuleName(c.rule) << '\n'
      << "attack.targets = " << JoinInts(c.targets) << '\n'
      << "attack.threshold = " << Real(c.threshold) << '\n'
      << "base.algo = " << AlgoName(c.base_algo) << '\n';
  AppendTrain(out, "base", c.base_train);
  out << "base.policy_path = " << c.base_policy_path << '\n'
      << "env.branching = " << c.env.branching << '\n'
      << "env.depth = " << c.env.depth << '\n'
      << "env.height = " << c.env.grid.height << '\n'
      << "env.horizon = " << c.env.grid.horizon << '\n'
      << "env.kind = " << c.env.kind << '\n'
      << "env.n_agents = " << c.env.grid.n_agents << '\n'
      << "env.n_goals = " << c.env.grid.n_goals << '\n'
      << "env.obs_radius = " << c.env.grid.obs_radius << '\n'
      << "env.p = " << c.env.p << '\n'
      << "env.reward_progress = " << Real(c.env.grid.reward_progress) << '\n'
      << "env.reward_step = " << Real(c.env.grid.reward_step) << '\n'
      << "env.reward_win = " << Real(c.env.grid.reward_win) << '\n'
      << "env.seed = " << c.env.tree_seed << '\n'
      << "env.t = " << c.env.t << '\n'
      << "env.width = " << c.env.grid.width << '\n'
      << "eval.episodes = " << c.n_eval_episodes << '\n'
      << "run.master_seed = " << c.master_seed << '\n'
      << "run.n_seeds = " << c.n_seeds << '\n';
  return out.str();
}

uint64_t ConfigHash(const ExperimentConfig& c) { return Fnv1a(CanonicalConfig(c)); }

uint64_t SeedForIndex(uint64_t master_seed, int index) {
  return DeriveSeed(master_seed, static_cast<uint64_t>(index));
}

double SeedResult::AttackRatio() const {
  const double attacks = std::accumulate(mean_attacked_steps.begin(), mean_attacked_steps.end(), 0.0);
  return mean_total_steps > 0.0 ? attacks / mean_total_steps : 0.0;
}

double Aggregate::AttackRatio() const {
  const double attacks = std::accumulate(mean_attacked_steps.begin(), mean_attacked_steps.end(), 0.0);
  return mean_total_steps > 0.0 ? attacks / mean_total_steps : 0.0;
}

namespace {

Aggregate AverageOf(const std::vector<SeedResult>& results, std::vector<size_t> order) {
  Aggregate a;
  if (order.empty()) return a;
  a.mean_attacked_steps.assign(results[order[0]].mean_attacked_steps.size(), 0.0);
  for (size_t i : order) {
    const SeedResult& r = results[i];
    a.retained.push_back(r.index);
    a.retained_scores.push_back(r.Score());
    a.mean_score += r.Score();
    a.mean_total_steps += r.mean_total_steps;
    for (size_t j = 0; j < a.mean_attacked_steps.size() && j < r.mean_attacked_steps.size(); ++j) {
      a.mean_attacked_steps[j] += r.mean_attacked_steps[j];
    }
  }
  const double n = static_cast<double>(order.size());
  a.mean_score /= n;
  a.mean_total_steps /= n;
  for (double& v : a.mean_attacked_steps) v /= n;
  return a;
}

std::vector<size_t> SortedByScore(const std::vector<SeedResult>& results) {
  std::vector<size_t> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (results[a].Score() != results[b].Score()) return results[a].Score() < results[b].Score();
    return results[a].index < results[b].index;
  });
  return order;
}

}  // namespace

Aggregate AggregateMedian3(const std::vector<SeedResult>& results) {
  if (results.size() != 5) {
    Fail(ErrorCode::kWrongArity, "median-3 needs exactly 5 seed results, got " +
                                     std::to_string(results.size()));
  }
  const std::vector<size_t> order = SortedByScore(results);
  return AverageOf(results, {order[1], order[2], order[3]});
}

Aggregate AggregateSeeds(const std::vector<SeedResult>& results) {
  if (results.size() == 5) return AggregateMedian3(results);
  return AverageOf(results, SortedByScore(results));
}

std::string RecordToJson(const RunRecord& r) {
  json j;
  j["format"] = "sparse-attack-run 1";
  j["config_hash"] = r.config_hash;
  j["config_text"] = r.config_text;
  j["method"] = r.method;
  j["parameter"] = r.parameter;
  j["degraded"] = r.degraded;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  json seeds = json::array();
  for (const SeedResult& s : r.seeds) {
    seeds.push_back({{"index", s.index},
                     {"seed", s.seed},
                     {"ok", s.ok},
                     {"error", s.error},
                     {"has_win", s.has_win},
                     {"win_rate", s.win_rate},
                     {"mean_return", s.mean_return},
                     {"mean_attacked_steps", s.mean_attacked_steps},
                     {"mean_total_steps", s.mean_total_steps},
                     {"artifacts", s.artifacts}});
  }
  j["seeds"] = seeds;
  if (r.aggregate) {
    const Aggregate& a = *r.aggregate;
    j["aggregate"] = {{"retained", a.retained},
                      {"retained_scores", a.retained_scores},
                      {"mean_score", a.mean_score},
                      {"mean_attacked_steps", a.mean_attacked_steps},
                      {"mean_total_steps", a.mean_total_steps}};
  } else {
    j["aggregate"] = nullptr;
  }
  return j.dump(2) + "\n";
}

RunRecord RecordFromJson(const std::string& text) {
  RunRecord r;
  try {
    const json j = json::parse(text);
    if (j.at("format") != "sparse-attack-run 1") {
      Fail(ErrorCode::kIoError, "unsupported run record format");
    }
    r.config_hash = j.at("config_hash").get<uint64_t>();
    r.config_text = j.at("config_text").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.parameter = j.at("parameter").get<std::string>();
    r.degraded = j.at("degraded").get<bool>();
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    for (const json& s : j.at("seeds")) {
      SeedResult x;
      x.index = s.at("index").get<int>();
      x.seed = s.at("seed").get<uint64_t>();
      x.ok = s.at("ok").get<bool>();
      x.error = s.at("error").get<std::string>();
      x.has_win = s.at("has_win").get<bool>();
      x.win_rate = s.at("win_rate").get<double>();
      x.mean_return = s.at("mean_return").get<double>();
      x.mean_attacked_steps = s.at("mean_attacked_steps").get<std::vector<double>>();
      x.mean_total_steps = s.at("mean_total_steps").get<double>();
      x.artifacts = s.at("artifacts").get<std::vector<std::string>>();
      r.seeds.push_back(std::move(x));
    }
    const json& a = j.at("aggregate");
    if (!a.is_null()) {
      Aggregate g;
      g.retained = a.at("retained").get<std::vector<int>>();
      g.retained_scores = a.at("retained_scores").get<std::vector<double>>();
      g.mean_score = a.at("mean_score").get<double>();
      g.mean_attacked_steps = a.at("mean_attacked_steps").get<std::vector<double>>();
      g.mean_total_steps = a.at("mean_total_steps").get<double>();
      r.aggregate = std::move(g);
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kIoError, std::string("malformed run record: ") + e.what());
  }
  if (Fnv1a(r.config_text) != r.config_hash) {
    Fail(ErrorCode::kIoError, "run record config hash does not match its config text");
  }
  return r;
}

void SaveRunRecord(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << RecordToJson(record);
  if (!out) Fail(ErrorCode::kIoError, "write failed for '" + path + "'");
}

RunRecord LoadRunRecord(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return RecordFromJson(ss.str());
}

std::shared_ptr<const QTeamPolicy> BaseCache::Find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : it->second;
}

void BaseCache::Store(const std::string& key, std::shared_ptr<const QTeamPolicy> policy) {
  entries_[key] = std::move(policy);
}

std::shared_ptr<const QTeamPolicy> ObtainBasePolicy(const ExperimentConfig& c,
                                                    const Environment& env, int index,
                                                    const RunOptions& options) {
  const std::string key = BaseKey(c, env, index);
  if (options.cache) {
    if (auto hit = options.cache->Find(key)) return hit;
  }
  std::shared_ptr<const QTeamPolicy> policy;
  if (!c.base_policy_path.empty()) {
    std::string stem = c.base_policy_path;
    const auto at = stem.find("{seed}");
    if (at != std::string::npos) stem.replace(at, 6, std::to_string(index));
    policy = std::make_shared<QTeamPolicy>(LoadPolicy(stem));
    if (policy->header.env_fingerprint != env.Fingerprint()) {
      Fail(ErrorCode::kConfigMismatch, "base policy '" + stem + "' was trained on " +
                                           policy->header.env_fingerprint);
    }
  } else {
    TrainConfig train = c.base_train;
    train.seed = DeriveSeed(SeedForIndex(c.master_seed, index), 1);
    policy = std::make_shared<QTeamPolicy>(TrainBase(env, c.base_algo, train));
  }
  if (options.cache) options.cache->Store(key, policy);
  return policy;
}

bool MethodLearns(AttackMethod method) {
  return method == AttackMethod::kOpt || method == AttackMethod::kRlf;
}

QTeamPolicy TrainLearnedAttack(const ExperimentConfig& c, std::shared_ptr<const Environment> env,
                               std::shared_ptr<const QTeamPolicy> base, int index) {
  TrainConfig train = c.attack_train;
  train.seed = DeriveSeed(SeedForIndex(c.master_seed, index), 2);
  if (c.method == AttackMethod::kOpt) {
    AttackConfig ac;
    ac.targets = c.targets;
    ac.lambda = c.lambda;
    ac.train = train;
    ac.algo = c.attacker_algo;
    const auto adv = WrapAdversarial(std::move(env), std::move(base), c.targets, c.lambda);
    return TrainAttack(*adv, ac);
  }
  if (c.method == AttackMethod::kRlf) {
    return TrainRlf(std::move(env), std::move(base), c.targets, c.c_adv, train);
  }
  Fail(ErrorCode::kConfigMismatch, "method " + MethodName(c.method) + " does not learn");
}

std::unique_ptr<AttackStrategy> MakeStrategy(const ExperimentConfig& c, const QTeamPolicy* learned) {
  switch (c.method) {
    case AttackMethod::kNone:
      return std::make_unique<NoAttack>();
    case AttackMethod::kOpt:
    case AttackMethod::kRlf:
      if (!learned) Fail(ErrorCode::kInvalidArgument, "a learned attacker is required");
      if (c.method == AttackMethod::kOpt) return std::make_unique<PolicyAttack>(*learned);
      return std::make_unique<TimingAttack>(*learned);
    case AttackMethod::kRaR:
      return std::make_unique<RandomAttack>(RandomMode::kRandomAction, c.prob);
    case AttackMethod::kRaL:
      return std::make_unique<RandomAttack>(RandomMode::kLowestQ, c.prob);
    case AttackMethod::kRuB:
      return std::make_unique<RuleBasedAttack>(c.rule, c.threshold);
    case AttackMethod::kRuD:
      return std::make_unique<DenseAttack>();
    case AttackMethod::kOracleBudget:
    case AttackMethod::kOracleReg:
      break;
  }
  Fail(ErrorCode::kConfigMismatch, "method " + MethodName(c.method) + " is not a rollout strategy");
}

std::vector<AttackStats> EvaluateStrategy(const ExperimentConfig& c,
                                          std::shared_ptr<const Environment> env,
                                          std::shared_ptr<const QTeamPolicy> base,
                                          AttackStrategy& strategy, int index) {
  const uint64_t eval_seed = DeriveSeed(SeedForIndex(c.master_seed, index), 3);
  // Only OPT optimizes a regularized objective; other methods report lambda 0.
  const double lambda = c.method == AttackMethod::kOpt ? c.lambda : 0.0;
  std::vector<AttackStepLog> steps;
  auto stats = RolloutAttacked(std::move(env), std::move(base), strategy, c.targets, lambda,
                               c.n_eval_episodes, eval_seed, &steps);
  CheckAccounting(stats, steps);
  return stats;
}

RunRecord RunExperiment(const ExperimentConfig& c, const RunOptions& options) {
  c.Validate();
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.config_text = CanonicalConfig(c);
  record.config_hash = Fnv1a(record.config_text);
  record.method = MethodName(c.method);
  record.parameter = ParameterLabel(c);

  const std::shared_ptr<const Environment> env = MakeEnvironment(c.env);
  const bool has_win = env->HasWinCondition();
  ValidateTargets(c.targets, env->spec().n_agents);
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  for (int i = 0; i < c.n_seeds; ++i) {
    SeedResult result;
    result.index = i;
    result.seed = SeedForIndex(c.master_seed, i);
    std::string dir;
    if (!options.out_dir.empty()) {
      dir = options.out_dir + "/seed" + std::to_string(i);
      std::filesystem::create_directories(dir);
    }
    try {
      const bool oracle =
          c.method == AttackMethod::kOracleBudget || c.method == AttackMethod::kOracleReg;
      if (oracle) {
        const auto& tree = dynamic_cast<const TreeGameEnv&>(*env).tree();
        const OracleResult o = c.method == AttackMethod::kOracleBudget
                                   ? OracleBudgetDp(tree, c.budget)
                                   : OracleRegDp(tree, c.lambda);
        result.has_win = false;
        result.mean_return = o.team_return;
        result.mean_attacked_steps = {static_cast<double>(o.attack_count)};
        result.mean_total_steps = tree.depth;
      } else {
        log("seed " + std::to_string(i) + ": base policy");
        const auto base = ObtainBasePolicy(c, *env, i, options);
        if (!dir.empty() && c.base_policy_path.empty()) {
          SavePolicy(*base, dir + "/base");
          result.artifacts.push_back(dir + "/base");
        }
        std::optional<QTeamPolicy> learned;
        if (MethodLearns(c.method)) {
          log("seed " + std::to_string(i) + ": training attacker");
          learned = TrainLearnedAttack(c, env, base, i);
          if (!dir.empty()) {
            SavePolicy(*learned, dir + "/attacker");
            result.artifacts.push_back(dir + "/attacker");
          }
        }
        const auto strategy = MakeStrategy(c, learned ? &*learned : nullptr);
        const auto stats = EvaluateStrategy(c, env, base, *strategy, i);
        const SeedResult s = FromStats(stats, has_win);
        result.has_win = s.has_win;
        result.win_rate = s.win_rate;
        result.mean_return = s.mean_return;
        result.mean_attacked_steps = s.mean_attacked_steps;
        result.mean_total_steps = s.mean_total_steps;
      }
    } catch (const Error& e) {
      if (IsConfigProblem(e.code())) throw;
      result.ok = false;
      result.error = e.what();
      record.degraded = true;
      log("seed " + std::to_string(i) + " failed: " + e.what());
    }
    record.seeds.push_back(std::move(result));
  }

  std::vector<SeedResult> good;
  for (const SeedResult& s : record.seeds) {
    if (s.ok) good.push_back(s);
  }
  if (!record.degraded && !good.empty()) record.aggregate = AggregateSeeds(good);
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!options.out_dir.empty()) SaveRunRecord(record, options.out_dir + "/run_record.json");
  return record;
}

std::string EmitReport(const std::vector<RunRecord>& records, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kDelimited) {
    out << kReportHeader << '\n';
    for (const RunRecord& r : records) {
      const bool has_win = !r.seeds.empty() && r.seeds.front().has_win;
      out << r.method << '\t' << r.parameter << '\t' << (has_win ? "win_rate" : "mean_return")
          << '\t';
      if (r.aggregate) {
        const Aggregate& a = *r.aggregate;
        for (size_t i = 0; i < a.retained_scores.size(); ++i) {
          out << (i ? "," : "") << Real(a.retained_scores[i]);
        }
        out << '\t' << Real(a.mean_score) << '\t';
        for (size_t i = 0; i < a.mean_attacked_steps.size(); ++i) {
          out << (i ? "," : "") << Real(a.mean_attacked_steps[i]);
        }
        out << '\t' << Real(a.mean_total_steps) << '\t' << Real(a.AttackRatio());
      } else {
        out << "-\t-\t-\t-\t-";
      }
      char hash[24];
      std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(r.config_hash));
      out << '\t' << hash << '\t' << (r.degraded ? 1 : 0) << '\n';
    }
    return out.str();
  }

  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-22s %-29s %-9s %s\n", "Attack type", "Parameter",
                "Retained (median-3)", "Mean", "Attacked steps / Total steps");
  out << line;
  for (const RunRecord& r : records) {
    std::string retained = "-", mean = "-", steps = "-";
    if (r.aggregate) {
      const Aggregate& a = *r.aggregate;
      retained.clear();
      for (size_t i = 0; i < a.retained_scores.size(); ++i) {
        retained += (i ? "/" : "") + Fixed3(a.retained_scores[i]);
      }
      mean = Fixed3(a.mean_score);
      steps.clear();
      for (size_t i = 0; i < a.mean_attacked_steps.size(); ++i) {
        steps += (i ? ", " : "") + Fixed3(a.mean_attacked_steps[i]) + "/" +
                 Fixed3(a.mean_total_steps);
      }
    }
    if (r.degraded) mean += " (degraded)";
    std::snprintf(line, sizeof(line), "%-14s %-22s %-29s %-9s %s\n", r.method.c_str(),
                  r.parameter.c_str(), retained.c_str(), mean.c_str(), steps.c_str());
    out << line;
  }
  return out.str();
}

std::vector<ReportRow> ParseReport(const std::string& delimited) {
  std::vector<ReportRow> rows;
  std::stringstream in(delimited);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    Fail(ErrorCode::kIoError, "report header missing or unexpected");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) f.push_back(cell);
    if (f.size() != 10) Fail(ErrorCode::kIoError, "report row has " + std::to_string(f.size()) + " fields");
    ReportRow r;
    r.method = f[0];
    r.parameter = f[1];
    r.metric = f[2];
    r.retained_scores = SplitReals(f[3], ',');
    r.mean_score = f[4] == "-" ? 0.0 : ToReal("report", f[4]);
    r.attacked_steps = SplitReals(f[5], ',');
    r.total_steps = f[6] == "-" ? 0.0 : ToReal("report", f[6]);
    r.attack_ratio = f[7] == "-" ? 0.0 : ToReal("report", f[7]);
    r.config_hash = std::stoull(f[8], nullptr, 16);
    r.degraded = f[9] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sparse_attack
