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

#include "sparse_attack/optimizer.h"

#include <cmath>

#include "sparse_attack/error.h"

namespace sparse_attack {

OptimizerState MakeOptimizer(const ParamStore& params, double learning_rate) {
  OptimizerState s;
  s.learning_rate = learning_rate;
  s.first_moment = params.ZerosLike();
  s.second_moment = params.ZerosLike();
  return s;
}

void OptimizerStep(OptimizerState& state, ParamStore& params, const ParamStore& grads) {
  if (grads.names() != params.names() || state.first_moment.names() != params.names()) {
    Fail(ErrorCode::kShapeMismatch, "optimizer parameter sets differ");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads.value(i);
    if (g.rows() != params.value(i).rows() || g.cols() != params.value(i).cols()) {
      Fail(ErrorCode::kShapeMismatch, "gradient shape differs for " + params.names()[i]);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads.value(i);
    Tensor& m = state.first_moment.value(i);
    Tensor& v = state.second_moment.value(i);
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseAbs2();
    Tensor& p = params.value(i);
    p.array() -= state.learning_rate * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + state.epsilon);
  }
}

double ClipGradNorm(ParamStore& grads, double max_norm) {
  double sq = 0.0;
  for (size_t i = 0; i < grads.size(); ++i) sq += grads.value(i).squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (size_t i = 0; i < grads.size(); ++i) grads.value(i) *= s;
  }
  return norm;
}

}  // namespace sparse_attack
