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

#ifndef SPARSE_ATTACK_OPTIMIZER_H_
#define SPARSE_ATTACK_OPTIMIZER_H_

#include <cstdint>

#include "sparse_attack/tensor.h"

namespace sparse_attack {

// Adam: RMSProp-style second-moment scaling plus first-moment momentum, with
// bias correction.
struct OptimizerState {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t step = 0;
  ParamStore first_moment;
  ParamStore second_moment;
};

OptimizerState MakeOptimizer(const ParamStore& params, double learning_rate);

void OptimizerStep(OptimizerState& state, ParamStore& params, const ParamStore& grads);

// Rescales `grads` in place so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double ClipGradNorm(ParamStore& grads, double max_norm);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_OPTIMIZER_H_
