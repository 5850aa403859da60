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

// Finite-difference gradient checking shared by the unit and acceptance tests.

#ifndef SPARSE_ATTACK_TESTS_GRAD_CHECK_H_
#define SPARSE_ATTACK_TESTS_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "sparse_attack/nn.h"
#include "sparse_attack/rng.h"
#include "sparse_attack/tensor.h"

namespace sparse_attack::testing {

using Builder = std::function<Tape::Var(Tape&, const ParamStore&)>;

inline Tensor RandomTensor(Rng& rng, int rows, int cols, double scale = 1.0) {
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.Uniform(-scale, scale);
  return t;
}

// Entries kept at least `margin` away from zero, for ops with a kink there.
inline Tensor AwayFromZero(Rng& rng, int rows, int cols, double margin = 0.05) {
  Tensor t = RandomTensor(rng, rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    double& v = t.data()[i];
    v = v >= 0 ? v + margin : v - margin;
  }
  return t;
}

// Reduces `out` to a scalar through fixed random weights so every entry
// contributes its own gradient.
inline Tape::Var Project(Tape& tape, Tape::Var out, uint64_t seed) {
  Rng rng(seed);
  const Tensor& v = tape.value(out);
  return tape.Sum(tape.Mul(out, tape.Constant(RandomTensor(rng, v.rows(), v.cols()))));
}

// Largest relative difference between the taped gradient and central finite
// differences over every parameter entry. The denominator has a 1e-3 floor
// so that entries whose gradient is essentially zero are compared absolutely.
inline double MaxGradError(ParamStore& params, const Builder& f) {
  Tape tape;
  tape.Backward(f(tape, params));
  const ParamStore analytic = tape.Gradients(params);
  auto eval = [&]() {
    Tape t;
    return t.value(f(t, params))(0, 0);
  };
  const double h = 1e-6;
  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.value(i);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double saved = p.data()[k];
      p.data()[k] = saved + h;
      const double plus = eval();
      p.data()[k] = saved - h;
      const double minus = eval();
      p.data()[k] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double a = analytic.value(i).data()[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-3});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace sparse_attack::testing

#endif  // SPARSE_ATTACK_TESTS_GRAD_CHECK_H_
