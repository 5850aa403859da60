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

#ifndef SPARSE_ATTACK_NN_H_
#define SPARSE_ATTACK_NN_H_

#include <string>
#include <vector>

#include "sparse_attack/rng.h"
#include "sparse_attack/tensor.h"

namespace sparse_attack {

// Fully connected network: widths = {input, hidden..., output}, ReLU on the
// hidden layers, linear output. Parameters are "<prefix>.w<i>" (in x out)
// and "<prefix>.b<i>" (1 x out).
struct MlpSpec {
  std::vector<int> widths;

  void Validate() const;
  int input() const { return widths.front(); }
  int output() const { return widths.back(); }
  int layers() const { return static_cast<int>(widths.size()) - 1; }
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
void InitMlp(const MlpSpec& spec, const std::string& prefix, Rng& rng,
             ParamStore& params);
Tape::Var MlpForward(Tape& tape, const MlpSpec& spec, const ParamStore& params,
                     const std::string& prefix, Tape::Var input);
// Untaped forward pass for acting.
Tensor MlpForwardValue(const MlpSpec& spec, const ParamStore& params,
                       const std::string& prefix, const Tensor& input);

enum class MixerKind { kVdn, kQmix };

// Monotone mixing of per-agent utilities into a joint value conditioned on
// the global state. kVdn is the plain sum (no parameters).
struct MixerSpec {
  MixerKind kind = MixerKind::kQmix;
  int n_inputs = 1;
  int state_dim = 1;
  int embed_dim = 32;
  int hyper_hidden = 64;

  void Validate() const;
};

void InitMixer(const MixerSpec& spec, const std::string& prefix, Rng& rng,
               ParamStore& params);
// agent_qs is (B x n_inputs), state is (B x state_dim); returns (B x 1).
Tape::Var MixerForward(Tape& tape, const MixerSpec& spec, const ParamStore& params,
                       const std::string& prefix, Tape::Var agent_qs,
                       Tape::Var state);
Tensor MixerForwardValue(const MixerSpec& spec, const ParamStore& params,
                         const std::string& prefix, const Tensor& agent_qs,
                         const Tensor& state);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_NN_H_
