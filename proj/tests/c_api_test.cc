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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>

#include "sparse_attack/sparse_attack.h"

namespace {

std::string TmpDir() {
  const char* env = std::getenv("SA_TEST_TMP");
  std::filesystem::path dir = env != nullptr ? std::filesystem::path(env)
                                             : std::filesystem::temp_directory_path() / "sa_c_api";
  std::filesystem::create_directories(dir);
  return dir.string();
}

constexpr char kTree[] =
    "env.kind = tree_example1\n"
    "env.depth = 6\n"
    "env.t = 3\n"
    "env.p = 1\n"
    "env.seed = 0\n"
    "attack.method = OPT\n"
    "attack.lambda = 1\n"
    "attack.episodes = 100000\n"
    "eval.episodes = 3\n"
    "run.n_seeds = 1\n";

struct Config {
  sa_config* c = nullptr;
  explicit Config(const char* text) { REQUIRE(sa_config_parse(text, &c) == SA_OK); }
  ~Config() { sa_config_free(c); }
};

TEST_CASE("errors come back as codes with a message") {
  sa_config* c = nullptr;
  CHECK(sa_config_parse("attack.bogus = 1\n", &c) == SA_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(sa_last_error()).find("bogus") != std::string::npos);
  CHECK(std::string(sa_error_name(SA_ERR_CONFIG)) == "ConfigError");
  CHECK(sa_config_parse(nullptr, &c) == SA_ERR_INVALID_ARGUMENT);
  CHECK(sa_config_load("/nonexistent.cfg", &c) == SA_ERR_IO);

  Config cfg(kTree);
  CHECK(sa_config_set(cfg.c, "attack.prob", "7") == SA_ERR_CONFIG);
  CHECK(sa_config_set(cfg.c, "attack.targets", "3") == SA_OK);
  sa_env* env = nullptr;
  REQUIRE(sa_env_create(cfg.c, &env) == SA_OK);
  sa_record* rec = nullptr;
  CHECK(sa_run_experiment(cfg.c, "", &rec) == SA_ERR_BAD_TARGETS);
  sa_env_free(env);
  // Freeing null handles is a no-op.
  sa_config_free(nullptr);
  sa_policy_free(nullptr);
  sa_record_free(nullptr);
  sa_string_free(nullptr);
}

TEST_CASE("config text is canonical") {
  Config a(kTree);
  char* text = nullptr;
  REQUIRE(sa_config_canonical(a.c, &text) == SA_OK);
  Config b(text);
  sa_string_free(text);
  CHECK(sa_config_hash(a.c) == sa_config_hash(b.c));
  REQUIRE(sa_config_set(b.c, "attack.lambda", "2") == SA_OK);
  CHECK(sa_config_hash(a.c) != sa_config_hash(b.c));
}

TEST_CASE("train, attack and evaluate through the C interface") {
  Config cfg(kTree);
  sa_env* env = nullptr;
  REQUIRE(sa_env_create(cfg.c, &env) == SA_OK);
  int n = 0, horizon = 0, has_win = -1;
  REQUIRE(sa_env_info(env, &n, &horizon, &has_win) == SA_OK);
  CHECK(n == 1);
  CHECK(horizon == 6);
  CHECK(has_win == 0);

  sa_policy* base = nullptr;
  REQUIRE(sa_train_base(cfg.c, env, 0, &base) == SA_OK);
  sa_eval_result clean{};
  REQUIRE(sa_config_set(cfg.c, "attack.method", "none") == SA_OK);
  REQUIRE(sa_evaluate(cfg.c, env, base, nullptr, 0, &clean) == SA_OK);
  CHECK(clean.mean_return == 50.0);
  CHECK(clean.mean_attacks == 0.0);

  REQUIRE(sa_config_set(cfg.c, "attack.method", "OPT") == SA_OK);
  sa_policy* attacker = nullptr;
  REQUIRE(sa_train_attack(cfg.c, env, base, 0, &attacker) == SA_OK);
  char* role = nullptr;
  REQUIRE(sa_policy_role(attacker, &role) == SA_OK);
  CHECK(std::string(role) == "attacker");
  sa_string_free(role);

  sa_eval_result hit{};
  REQUIRE(sa_evaluate(cfg.c, env, base, attacker, 0, &hit) == SA_OK);
  CHECK(hit.episodes == 3);
  CHECK(hit.mean_return == -100.0);
  CHECK(hit.mean_attacks == 2.0);
  CHECK(hit.attack_ratio == doctest::Approx(2.0 / 6.0));
  CHECK(sa_evaluate(cfg.c, env, base, nullptr, 0, &hit) == SA_ERR_INVALID_ARGUMENT);

  const std::string stem = TmpDir() + "/attacker";
  REQUIRE(sa_policy_save(attacker, stem.c_str()) == SA_OK);
  sa_policy* back = nullptr;
  REQUIRE(sa_policy_load(stem.c_str(), &back) == SA_OK);
  CHECK(sa_policy_hash(back) == sa_policy_hash(attacker));
  CHECK(sa_policy_load((TmpDir() + "/missing").c_str(), &back) == SA_ERR_IO);

  sa_policy_free(back);
  sa_policy_free(attacker);
  sa_policy_free(base);
  sa_env_free(env);
}

TEST_CASE("oracle witness through the C interface") {
  Config cfg(kTree);
  REQUIRE(sa_config_set(cfg.c, "attack.method", "oracle-budget") == SA_OK);
  REQUIRE(sa_config_set(cfg.c, "attack.budget", "2") == SA_OK);
  sa_oracle_result r{};
  char* witness = nullptr;
  REQUIRE(sa_oracle(cfg.c, &r, &witness) == SA_OK);
  CHECK(r.value == -100.0);
  CHECK(r.attack_count == 2);
  CHECK(std::string(witness) == "3:1 5:0");
  sa_string_free(witness);
  REQUIRE(sa_config_set(cfg.c, "attack.method", "Ra-R") == SA_OK);
  CHECK(sa_oracle(cfg.c, &r, nullptr) == SA_ERR_CONFIG_MISMATCH);
}

TEST_CASE("records and reports through the C interface") {
  Config cfg(kTree);
  REQUIRE(sa_config_set(cfg.c, "attack.method", "Ru-D") == SA_OK);
  REQUIRE(sa_config_set(cfg.c, "run.n_seeds", "5") == SA_OK);
  sa_record* rec = nullptr;
  const std::string dir = TmpDir() + "/run";
  REQUIRE(sa_run_experiment(cfg.c, dir.c_str(), &rec) == SA_OK);
  CHECK(sa_record_degraded(rec) == 0);
  sa_record* loaded = nullptr;
  REQUIRE(sa_record_load((dir + "/run_record.json").c_str(), &loaded) == SA_OK);
  const sa_record* both[] = {rec, loaded};
  char* text = nullptr;
  REQUIRE(sa_report(both, 2, SA_REPORT_DELIMITED, &text) == SA_OK);
  const std::string report(text);
  sa_string_free(text);
  CHECK(report.rfind("method\tparameter", 0) == 0);
  const size_t first = report.find('\n') + 1;
  const size_t second = report.find('\n', first) + 1;
  CHECK(report.substr(first, second - first) == report.substr(second));
  CHECK(report.find("Ru-D") != std::string::npos);
  CHECK(sa_report(both, 2, 7, &text) == SA_ERR_INVALID_ARGUMENT);
  sa_record_free(loaded);
  sa_record_free(rec);
}

}  // namespace
