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

#ifndef SPARSE_ATTACK_HARNESS_H_
#define SPARSE_ATTACK_HARNESS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparse_attack/attack.h"
#include "sparse_attack/baselines.h"
#include "sparse_attack/goal_gather.h"
#include "sparse_attack/learners.h"

namespace sparse_attack {

struct EnvConfig {
  // tree_example1 | tree_example2 | tree_random | goalgather
  std::string kind = "tree_example1";
  int depth = 6;
  int t = 3;
  int p = 1;
  int branching = 2;
  uint64_t tree_seed = 0;
  GridTeamSpec grid;
};

std::shared_ptr<const Environment> MakeEnvironment(const EnvConfig& config);

enum class AttackMethod { kNone, kOpt, kRaR, kRaL, kRuB, kRuD, kRlf, kOracleBudget, kOracleReg };

std::string MethodName(AttackMethod method);
AttackMethod ParseMethod(const std::string& name);

struct ExperimentConfig {
  EnvConfig env;
  BaseAlgo base_algo = BaseAlgo::kTabularVI;
  TrainConfig base_train;
  // Optional pre-trained base policy stem; "{seed}" expands to the seed index.
  std::string base_policy_path;

  AttackMethod method = AttackMethod::kNone;
  AttackerAlgo attacker_algo = AttackerAlgo::kTabularQ;
  TrainConfig attack_train;
  double lambda = 1.0;
  double prob = 0.1;
  double threshold = 0.5;
  DeltaRule rule = DeltaRule::kMaxDiff;
  double c_adv = 1.0;
  int budget = 2;
  std::vector<int> targets{0};

  int n_eval_episodes = 1000;
  int n_seeds = 5;
  uint64_t master_seed = 0;

  void Validate() const;
};

// Parses `key = value` lines with dotted section prefixes. Blank lines and
// lines starting with '#' are skipped; unknown keys throw ConfigError.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);
// Applies one `key = value` assignment.
void SetConfigValue(ExperimentConfig& config, const std::string& key, const std::string& value);
// Every key in a fixed order, reals printed round-trip exact.
std::string CanonicalConfig(const ExperimentConfig& config);
uint64_t ConfigHash(const ExperimentConfig& config);

// Seed of run `index`; the base learner, attacker learner and evaluation
// draw from independent streams of it.
uint64_t SeedForIndex(uint64_t master_seed, int index);

struct SeedResult {
  int index = 0;
  uint64_t seed = 0;
  bool ok = true;
  std::string error;
  bool has_win = false;
  double win_rate = 0.0;
  double mean_return = 0.0;
  std::vector<double> mean_attacked_steps;  // per attacked agent
  double mean_total_steps = 0.0;
  std::vector<std::string> artifacts;

  // Win rate when the environment has one, else mean team return.
  double Score() const { return has_win ? win_rate : mean_return; }
  double AttackRatio() const;
};

struct Aggregate {
  std::vector<int> retained;  // seed indices, ascending score
  std::vector<double> retained_scores;
  double mean_score = 0.0;
  std::vector<double> mean_attacked_steps;
  double mean_total_steps = 0.0;

  double AttackRatio() const;
};

// Drops the best and worst of exactly five results (ties broken by seed
// index) and averages the middle three. Throws WrongArity otherwise.
Aggregate AggregateMedian3(const std::vector<SeedResult>& results);
// Median-3 for five results, plain average of all results otherwise.
Aggregate AggregateSeeds(const std::vector<SeedResult>& results);

struct RunRecord {
  uint64_t config_hash = 0;
  std::string config_text;
  std::string method;
  std::string parameter;
  std::vector<SeedResult> seeds;
  std::optional<Aggregate> aggregate;
  bool degraded = false;
  double wall_clock_seconds = 0.0;
};

std::string RecordToJson(const RunRecord& record);
RunRecord RecordFromJson(const std::string& text);
void SaveRunRecord(const RunRecord& record, const std::string& path);
RunRecord LoadRunRecord(const std::string& path);

// Reuses trained base policies across runs that share environment, base
// settings and seed.
class BaseCache {
 public:
  std::shared_ptr<const QTeamPolicy> Find(const std::string& key) const;
  void Store(const std::string& key, std::shared_ptr<const QTeamPolicy> policy);

 private:
  std::map<std::string, std::shared_ptr<const QTeamPolicy>> entries_;
};

struct RunOptions {
  // Policies and the record are written here when non-empty.
  std::string out_dir;
  BaseCache* cache = nullptr;
  std::function<void(const std::string&)> log;
};

std::shared_ptr<const QTeamPolicy> ObtainBasePolicy(const ExperimentConfig& config,
                                                    const Environment& env, int index,
                                                    const RunOptions& options);

// True for the methods that train an attacker (OPT and RL-F).
bool MethodLearns(AttackMethod method);
// Trains the configured OPT or RL-F attacker for seed `index`.
QTeamPolicy TrainLearnedAttack(const ExperimentConfig& config,
                               std::shared_ptr<const Environment> env,
                               std::shared_ptr<const QTeamPolicy> base, int index);
// Strategy of a rollout-evaluated method; `learned` must be set for OPT and
// RL-F and outlive the strategy.
std::unique_ptr<AttackStrategy> MakeStrategy(const ExperimentConfig& config,
                                             const QTeamPolicy* learned);
// Episodes of seed `index` under `strategy`, with the per-step log checked
// against the per-episode counts.
std::vector<AttackStats> EvaluateStrategy(const ExperimentConfig& config,
                                          std::shared_ptr<const Environment> env,
                                          std::shared_ptr<const QTeamPolicy> base,
                                          AttackStrategy& strategy, int index);

RunRecord RunExperiment(const ExperimentConfig& config, const RunOptions& options = {});

enum class ReportFormat { kTable, kDelimited };

// Delimited header, tab separated.
inline constexpr char kReportHeader[] =
    "method\tparameter\tmetric\tretained_scores\tmean_score\tattacked_steps\ttotal_steps\t"
    "attack_ratio\tconfig_hash\tdegraded";

std::string EmitReport(const std::vector<RunRecord>& records, ReportFormat format);

struct ReportRow {
  std::string method;
  std::string parameter;
  std::string metric;  // win_rate | mean_return
  std::vector<double> retained_scores;
  double mean_score = 0.0;
  std::vector<double> attacked_steps;
  double total_steps = 0.0;
  double attack_ratio = 0.0;
  uint64_t config_hash = 0;
  bool degraded = false;
};

std::vector<ReportRow> ParseReport(const std::string& delimited);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_HARNESS_H_
