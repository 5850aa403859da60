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

/* C interface to the sparse attack library. Every function returning int
 * yields SA_OK or a negative error code; sa_last_error() then describes the
 * failure for the calling thread. Strings handed out by the library are
 * released with sa_string_free. */
#ifndef SPARSE_ATTACK_SPARSE_ATTACK_H_
#define SPARSE_ATTACK_SPARSE_ATTACK_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SA_OK 0
#define SA_ERR_INVALID_ARGUMENT (-1)
#define SA_ERR_ILLEGAL_ACTION (-2)
#define SA_ERR_STEPPED_TERMINAL (-3)
#define SA_ERR_INVALID_INDICES (-4)
#define SA_ERR_TOO_LARGE (-5)
#define SA_ERR_SHAPE_MISMATCH (-6)
#define SA_ERR_NON_FINITE (-7)
#define SA_ERR_NOT_SCALAR (-8)
#define SA_ERR_NO_LEGAL_ACTION (-9)
#define SA_ERR_CONFIG_MISMATCH (-10)
#define SA_ERR_DIVERGED_TRAINING (-11)
#define SA_ERR_EMPTY_EVALUATION (-12)
#define SA_ERR_BAD_TARGETS (-13)
#define SA_ERR_WRONG_ARITY (-14)
#define SA_ERR_CONFIG (-15)
#define SA_ERR_IO (-16)
#define SA_ERR_INTERNAL (-100)

#define SA_REPORT_TABLE 0
#define SA_REPORT_DELIMITED 1

typedef struct sa_config sa_config;
typedef struct sa_env sa_env;
typedef struct sa_policy sa_policy;
typedef struct sa_record sa_record;

typedef struct sa_eval_result {
  int episodes;
  int has_win;
  double win_rate;
  double mean_return;
  double mean_attacks;
  double mean_total_steps;
  double attack_ratio;
} sa_eval_result;

typedef struct sa_oracle_result {
  double value;
  double team_return;
  int attack_count;
} sa_oracle_result;

const char* sa_last_error(void);
const char* sa_error_name(int code);
void sa_string_free(char* text);

/* Experiment configuration. */
int sa_config_parse(const char* text, sa_config** out);
int sa_config_load(const char* path, sa_config** out);
int sa_config_set(sa_config* config, const char* key, const char* value);
int sa_config_canonical(const sa_config* config, char** out_text);
uint64_t sa_config_hash(const sa_config* config);
void sa_config_free(sa_config* config);

/* Environment described by a configuration. */
int sa_env_create(const sa_config* config, sa_env** out);
int sa_env_info(const sa_env* env, int* n_agents, int* horizon, int* has_win);
void sa_env_free(sa_env* env);

/* Policies. */
int sa_policy_load(const char* stem, sa_policy** out);
int sa_policy_save(const sa_policy* policy, const char* stem);
int sa_policy_role(const sa_policy* policy, char** out_role);
uint64_t sa_policy_hash(const sa_policy* policy);
void sa_policy_free(sa_policy* policy);

/* Trains the base team of seed `index`. */
int sa_train_base(const sa_config* config, const sa_env* env, int index, sa_policy** out);
/* Trains the configured learned attack (OPT or RL-F) against `base`. */
int sa_train_attack(const sa_config* config, const sa_env* env, const sa_policy* base, int index,
                    sa_policy** out);
/* Evaluates the configured attack method; `attacker` is required for OPT and
 * RL-F and ignored otherwise. */
int sa_evaluate(const sa_config* config, const sa_env* env, const sa_policy* base,
                const sa_policy* attacker, int index, sa_eval_result* out);
/* Exact oracle of a tree environment; `out_witness` (optional) receives the
 * plan as "step:action" pairs. */
int sa_oracle(const sa_config* config, sa_oracle_result* out, char** out_witness);

/* Full multi-seed protocol; writes policies and run_record.json to out_dir
 * when it is non-empty. */
int sa_run_experiment(const sa_config* config, const char* out_dir, sa_record** out);
int sa_record_load(const char* path, sa_record** out);
int sa_record_save(const sa_record* record, const char* path);
int sa_record_degraded(const sa_record* record);
void sa_record_free(sa_record* record);
int sa_report(const sa_record* const* records, size_t count, int format, char** out_text);

#ifdef __cplusplus
}
#endif

#endif  /* SPARSE_ATTACK_SPARSE_ATTACK_H_ */
