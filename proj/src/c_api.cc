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

#include "sparse_attack/sparse_attack.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sparse_attack/error.h"
#include "sparse_attack/harness.h"
#include "sparse_attack/oracle.h"
#include "sparse_attack/policy.h"
#include "sparse_attack/tree_game.h"

struct sa_config {
  sparse_attack::ExperimentConfig value;
};

struct sa_env {
  std::shared_ptr<const sparse_attack::Environment> value;
};

struct sa_policy {
  std::shared_ptr<const sparse_attack::QTeamPolicy> value;
};

struct sa_record {
  sparse_attack::RunRecord value;
};

namespace {

thread_local std::string g_last_error;

int Guard(auto&& body) {
  try {
    body();
    g_last_error.clear();
    return SA_OK;
  } catch (const sparse_attack::Error& e) {
    g_last_error = e.what();
    return -static_cast<int>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SA_ERR_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) sparse_attack::Fail(sparse_attack::ErrorCode::kInvalidArgument, what);
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sa_last_error(void) { return g_last_error.c_str(); }

const char* sa_error_name(int code) {
  if (code == SA_OK) return "Ok";
  if (code == SA_ERR_INTERNAL) return "Internal";
  if (code < 0 && code >= SA_ERR_IO) {
    return sparse_attack::ErrorCodeName(static_cast<sparse_attack::ErrorCode>(-code));
  }
  return "Unknown";
}

void sa_string_free(char* text) { std::free(text); }

int sa_config_parse(const char* text, sa_config** out) {
  return Guard([&] {
    Require(text && out, "null argument");
    *out = new sa_config{sparse_attack::ParseConfig(text)};
  });
}

int sa_config_load(const char* path, sa_config** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new sa_config{sparse_attack::LoadConfig(path)};
  });
}

int sa_config_set(sa_config* config, const char* key, const char* value) {
  return Guard([&] {
    Require(config && key && value, "null argument");
    sparse_attack::ExperimentConfig copy = config->value;
    sparse_attack::SetConfigValue(copy, key, value);
    copy.Validate();
    config->value = std::move(copy);
  });
}

int sa_config_canonical(const sa_config* config, char** out_text) {
  return Guard([&] {
    Require(config && out_text, "null argument");
    *out_text = CopyString(sparse_attack::CanonicalConfig(config->value));
  });
}

uint64_t sa_config_hash(const sa_config* config) {
  return config ? sparse_attack::ConfigHash(config->value) : 0;
}

void sa_config_free(sa_config* config) { delete config; }

int sa_env_create(const sa_config* config, sa_env** out) {
  return Guard([&] {
    Require(config && out, "null argument");
    *out = new sa_env{sparse_attack::MakeEnvironment(config->value.env)};
  });
}

int sa_env_info(const sa_env* env, int* n_agents, int* horizon, int* has_win) {
  return Guard([&] {
    Require(env, "null environment");
    if (n_agents) *n_agents = env->value->spec().n_agents;
    if (horizon) *horizon = env->value->spec().horizon;
    if (has_win) *has_win = env->value->HasWinCondition() ? 1 : 0;
  });
}

void sa_env_free(sa_env* env) { delete env; }

int sa_policy_load(const char* stem, sa_policy** out) {
  return Guard([&] {
    Require(stem && out, "null argument");
    *out = new sa_policy{
        std::make_shared<const sparse_attack::QTeamPolicy>(sparse_attack::LoadPolicy(stem))};
  });
}

int sa_policy_save(const sa_policy* policy, const char* stem) {
  return Guard([&] {
    Require(policy && stem, "null argument");
    sparse_attack::SavePolicy(*policy->value, stem);
  });
}

int sa_policy_role(const sa_policy* policy, char** out_role) {
  return Guard([&] {
    Require(policy && out_role, "null argument");
    *out_role = CopyString(policy->value->header.role);
  });
}

uint64_t sa_policy_hash(const sa_policy* policy) { return policy ? policy->value->Hash() : 0; }

void sa_policy_free(sa_policy* policy) { delete policy; }

int sa_train_base(const sa_config* config, const sa_env* env, int index, sa_policy** out) {
  return Guard([&] {
    Require(config && env && out, "null argument");
    sparse_attack::ExperimentConfig c = config->value;
    c.base_policy_path.clear();
    *out = new sa_policy{sparse_attack::ObtainBasePolicy(c, *env->value, index, {})};
  });
}

int sa_train_attack(const sa_config* config, const sa_env* env, const sa_policy* base, int index,
                    sa_policy** out) {
  return Guard([&] {
    Require(config && env && base && out, "null argument");
    *out = new sa_policy{std::make_shared<const sparse_attack::QTeamPolicy>(
        sparse_attack::TrainLearnedAttack(config->value, env->value, base->value, index))};
  });
}

int sa_evaluate(const sa_config* config, const sa_env* env, const sa_policy* base,
                const sa_policy* attacker, int index, sa_eval_result* out) {
  return Guard([&] {
    Require(config && env && base && out, "null argument");
    const auto strategy =
        sparse_attack::MakeStrategy(config->value, attacker ? attacker->value.get() : nullptr);
    const auto stats =
        sparse_attack::EvaluateStrategy(config->value, env->value, base->value, *strategy, index);
    const auto s = sparse_attack::Summarize(stats, env->value->HasWinCondition());
    out->episodes = s.episodes;
    out->has_win = s.has_win ? 1 : 0;
    out->win_rate = s.win_rate;
    out->mean_return = s.mean_return;
    out->mean_attacks = s.MeanAttacks();
    out->mean_total_steps = s.mean_total_steps;
    out->attack_ratio = s.AttackRatio();
  });
}

int sa_oracle(const sa_config* config, sa_oracle_result* out, char** out_witness) {
  return Guard([&] {
    Require(config && out, "null argument");
    const auto env = sparse_attack::MakeEnvironment(config->value.env);
    const auto* tree_env = dynamic_cast<const sparse_attack::TreeGameEnv*>(env.get());
    if (!tree_env) {
      sparse_attack::Fail(sparse_attack::ErrorCode::kConfigMismatch,
                          "oracles need a tree environment");
    }
    sparse_attack::OracleResult r;
    switch (config->value.method) {
      case sparse_attack::AttackMethod::kOracleBudget:
        r = sparse_attack::OracleBudgetDp(tree_env->tree(), config->value.budget);
        break;
      case sparse_attack::AttackMethod::kOracleReg:
        r = sparse_attack::OracleRegDp(tree_env->tree(), config->value.lambda);
        break;
      case sparse_attack::AttackMethod::kRlf:
        r = sparse_attack::OracleForcedArgminDp(tree_env->tree(), config->value.c_adv);
        break;
      default:
        sparse_attack::Fail(sparse_attack::ErrorCode::kConfigMismatch,
                            "attack.method must be oracle-budget, oracle-reg or RL-F");
    }
    out->value = r.value;
    out->team_return = r.team_return;
    out->attack_count = r.attack_count;
    if (out_witness) {
      std::string w;
      for (const auto& step : r.witness) {
        if (!w.empty()) w += ' ';
        w += std::to_string(step.step) + ":" + std::to_string(step.action);
      }
      *out_witness = CopyString(w);
    }
  });
}

int sa_run_experiment(const sa_config* config, const char* out_dir, sa_record** out) {
  return Guard([&] {
    Require(config && out, "null argument");
    sparse_attack::RunOptions options;
    if (out_dir) options.out_dir = out_dir;
    *out = new sa_record{sparse_attack::RunExperiment(config->value, options)};
  });
}

int sa_record_load(const char* path, sa_record** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new sa_record{sparse_attack::LoadRunRecord(path)};
  });
}

int sa_record_save(const sa_record* record, const char* path) {
  return Guard([&] {
    Require(record && path, "null argument");
    sparse_attack::SaveRunRecord(record->value, path);
  });
}

int sa_record_degraded(const sa_record* record) {
  return record && record->value.degraded ? 1 : 0;
}

void sa_record_free(sa_record* record) { delete record; }

int sa_report(const sa_record* const* records, size_t count, int format, char** out_text) {
  return Guard([&] {
    Require(out_text && (records || count == 0), "null argument");
    Require(format == SA_REPORT_TABLE || format == SA_REPORT_DELIMITED, "unknown report format");
    std::vector<sparse_attack::RunRecord> list;
    for (size_t i = 0; i < count; ++i) {
      Require(records[i] != nullptr, "null record");
      list.push_back(records[i]->value);
    }
    *out_text = CopyString(sparse_attack::EmitReport(
        list, format == SA_REPORT_TABLE ? sparse_attack::ReportFormat::kTable
                                        : sparse_attack::ReportFormat::kDelimited));
  });
}

}  // extern "C"
