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

// Command-line front end over the C interface.
//
//   sparse_attack_cli train-base      --config F [--seed S] [--index I] --out DIR
//   sparse_attack_cli train-attack    --config F [--seed S] [--index I] --out DIR
//   sparse_attack_cli attack-baseline --config F [--seed S] [--out DIR]
//   sparse_attack_cli oracle          --config F
//   sparse_attack_cli evaluate        --config F [--seed S] [--out DIR]
//   sparse_attack_cli report          RECORD... [--format table|delimited]
//
// Exit codes: 0 success, 2 configuration error, 3 degraded run, 1 otherwise.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparse_attack/sparse_attack.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDegraded = 3;

int ExitFor(int code) {
  switch (code) {
    case SA_OK:
      return 0;
    case SA_ERR_CONFIG:
    case SA_ERR_CONFIG_MISMATCH:
    case SA_ERR_BAD_TARGETS:
    case SA_ERR_INVALID_INDICES:
    case SA_ERR_TOO_LARGE:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

int Report(int code, const char* what) {
  if (code != SA_OK) {
    std::fprintf(stderr, "%s: %s\n", what, sa_last_error());
  }
  return ExitFor(code);
}

struct Common {
  std::string config;
  std::string seed;
  std::string out;
  int index = 0;
};

// Loads the config and applies a --seed override.
int LoadConfig(const Common& c, sa_config** config) {
  int rc = sa_config_load(c.config.c_str(), config);
  if (rc != SA_OK) return Report(rc, "config");
  if (!c.seed.empty()) {
    rc = sa_config_set(*config, "run.master_seed", c.seed.c_str());
    if (rc != SA_OK) {
      sa_config_free(*config);
      *config = nullptr;
      return Report(rc, "--seed");
    }
  }
  return 0;
}

void PrintEval(const char* label, const sa_eval_result& r) {
  std::printf("%s: episodes=%d win_rate=%.3f mean_return=%.3f attacked_steps=%.3f "
              "total_steps=%.3f ratio=%.3f\n",
              label, r.episodes, r.win_rate, r.mean_return, r.mean_attacks, r.mean_total_steps,
              r.attack_ratio);
}

std::string StemIn(const std::string& dir, const char* name) {
  if (dir.empty()) return name;
  std::filesystem::create_directories(dir);
  return dir + "/" + name;
}

int TrainBase(const Common& c) {
  sa_config* config = nullptr;
  if (int rc = LoadConfig(c, &config)) return rc;
  sa_env* env = nullptr;
  sa_policy* base = nullptr;
  int rc = sa_env_create(config, &env);
  if (rc == SA_OK) rc = sa_train_base(config, env, c.index, &base);
  if (rc == SA_OK) rc = sa_policy_save(base, StemIn(c.out, "base").c_str());
  if (rc == SA_OK) {
    sa_config* plain = nullptr;
    rc = sa_config_load(c.config.c_str(), &plain);
    if (rc == SA_OK) rc = sa_config_set(plain, "attack.method", "none");
    if (rc == SA_OK && !c.seed.empty()) rc = sa_config_set(plain, "run.master_seed", c.seed.c_str());
    sa_eval_result r{};
    if (rc == SA_OK) rc = sa_evaluate(plain, env, base, nullptr, c.index, &r);
    if (rc == SA_OK) PrintEval("base", r);
    sa_config_free(plain);
  }
  sa_policy_free(base);
  sa_env_free(env);
  sa_config_free(config);
  return Report(rc, "train-base");
}

int TrainAttack(const Common& c, const std::string& base_stem) {
  sa_config* config = nullptr;
  if (int rc = LoadConfig(c, &config)) return rc;
  sa_env* env = nullptr;
  sa_policy* base = nullptr;
  sa_policy* attacker = nullptr;
  int rc = sa_env_create(config, &env);
  if (rc == SA_OK) {
    rc = base_stem.empty() ? sa_train_base(config, env, c.index, &base)
                           : sa_policy_load(base_stem.c_str(), &base);
  }
  if (rc == SA_OK) rc = sa_train_attack(config, env, base, c.index, &attacker);
  if (rc == SA_OK) rc = sa_policy_save(attacker, StemIn(c.out, "attacker").c_str());
  sa_eval_result r{};
  if (rc == SA_OK) rc = sa_evaluate(config, env, base, attacker, c.index, &r);
  if (rc == SA_OK) PrintEval("attacked", r);
  sa_policy_free(attacker);
  sa_policy_free(base);
  sa_env_free(env);
  sa_config_free(config);
  return Report(rc, "train-attack");
}

int Evaluate(const Common& c, bool baseline_only) {
  sa_config* config = nullptr;
  if (int rc = LoadConfig(c, &config)) return rc;
  int rc = SA_OK;
  if (baseline_only) {
    char* text = nullptr;
    rc = sa_config_canonical(config, &text);
    if (rc == SA_OK) {
      const std::string canon = text;
      sa_string_free(text);
      const bool baseline = canon.find("attack.method = Ra-") != std::string::npos ||
                            canon.find("attack.method = Ru-") != std::string::npos ||
                            canon.find("attack.method = RL-F") != std::string::npos;
      if (!baseline) {
        std::fprintf(stderr, "attack-baseline: attack.method must be Ra-R, Ra-L, Ru-B, Ru-D or RL-F\n");
        sa_config_free(config);
        return kExitConfig;
      }
    }
  }
  sa_record* record = nullptr;
  if (rc == SA_OK) rc = sa_run_experiment(config, c.out.empty() ? nullptr : c.out.c_str(), &record);
  int exit_code = Report(rc, "evaluate");
  if (rc == SA_OK) {
    char* table = nullptr;
    const sa_record* list[] = {record};
    if (sa_report(list, 1, SA_REPORT_TABLE, &table) == SA_OK) std::fputs(table, stdout);
    sa_string_free(table);
    if (sa_record_degraded(record)) exit_code = kExitDegraded;
  }
  sa_record_free(record);
  sa_config_free(config);
  return exit_code;
}

int Oracle(const Common& c) {
  sa_config* config = nullptr;
  if (int rc = LoadConfig(c, &config)) return rc;
  sa_oracle_result r{};
  char* witness = nullptr;
  const int rc = sa_oracle(config, &r, &witness);
  if (rc == SA_OK) {
    std::printf("value=%.17g team_return=%.17g attacks=%d witness=%s\n", r.value, r.team_return,
                r.attack_count, witness);
  }
  sa_string_free(witness);
  sa_config_free(config);
  return Report(rc, "oracle");
}

int ReportCmd(const std::vector<std::string>& paths, const std::string& format) {
  std::vector<sa_record*> records;
  int rc = SA_OK;
  for (const std::string& p : paths) {
    sa_record* r = nullptr;
    rc = sa_record_load(p.c_str(), &r);
    if (rc != SA_OK) break;
    records.push_back(r);
  }
  int exit_code = Report(rc, "report");
  if (rc == SA_OK) {
    char* text = nullptr;
    std::vector<const sa_record*> view(records.begin(), records.end());
    rc = sa_report(view.data(), view.size(),
                   format == "delimited" ? SA_REPORT_DELIMITED : SA_REPORT_TABLE, &text);
    if (rc == SA_OK) std::fputs(text, stdout);
    sa_string_free(text);
    exit_code = Report(rc, "report");
    for (sa_record* r : records) {
      if (sa_record_degraded(r)) exit_code = exit_code ? exit_code : kExitDegraded;
    }
  }
  for (sa_record* r : records) sa_record_free(r);
  return exit_code;
}

void AddCommon(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed override (unsigned 64-bit)");
  auto* out = cmd->add_option("--out", c.out, "output directory");
  if (needs_out) out->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse adversarial attacks on cooperative multi-agent RL"};
  app.require_subcommand(1);

  Common c;
  std::string base_stem;
  std::vector<std::string> records;
  std::string format = "table";

  auto* train_base = app.add_subcommand("train-base", "train and save one base team policy");
  AddCommon(train_base, c, true);
  train_base->add_option("--index", c.index, "seed index within the run");

  auto* train_attack = app.add_subcommand("train-attack", "train and save one learned attacker");
  AddCommon(train_attack, c, true);
  train_attack->add_option("--index", c.index, "seed index within the run");
  train_attack->add_option("--base", base_stem, "saved base policy stem (trained if absent)");

  auto* baseline = app.add_subcommand("attack-baseline", "run a baseline attack over all seeds");
  AddCommon(baseline, c, false);
  auto* oracle = app.add_subcommand("oracle", "exact oracle on a tree game");
  AddCommon(oracle, c, false);
  auto* evaluate = app.add_subcommand("evaluate", "run the configured experiment over all seeds");
  AddCommon(evaluate, c, false);

  auto* report = app.add_subcommand("report", "tabulate saved run records");
  report->add_option("records", records, "run_record.json files")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "table or delimited")
      ->check(CLI::IsMember({"table", "delimited"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*train_base) return TrainBase(c);
  if (*train_attack) return TrainAttack(c, base_stem);
  if (*baseline) return Evaluate(c, true);
  if (*oracle) return Oracle(c);
  if (*evaluate) return Evaluate(c, false);
  if (*report) return ReportCmd(records, format);
  return kExitFailure;
}
