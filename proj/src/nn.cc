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

#include "sparse_attack/nn.h"

#include <cmath>

#include "sparse_attack/error.h"

namespace sparse_attack {
namespace {

std::string W(const std::string& prefix, int i) { return prefix + ".w" + std::to_string(i); }
std::string B(const std::string& prefix, int i) { return prefix + ".b" + std::to_string(i); }

// QMIX hypernetworks, each an MLP on the global state.
MlpSpec HyperW1(const MixerSpec& s) { return {{s.state_dim, s.hyper_hidden, s.n_inputs * s.embed_dim}}; }
MlpSpec HyperB1(const MixerSpec& s) { return {{s.state_dim, s.embed_dim}}; }
MlpSpec HyperW2(const MixerSpec& s) { return {{s.state_dim, s.hyper_hidden, s.embed_dim}}; }
MlpSpec HyperV(const MixerSpec& s) { return {{s.state_dim, s.embed_dim, 1}}; }

}  // namespace

void MlpSpec::Validate() const {
  if (widths.size() < 2) Fail(ErrorCode::kInvalidArgument, "MLP needs input and output widths");
  for (int w : widths) {
    if (w < 1) Fail(ErrorCode::kInvalidArgument, "MLP widths must be >= 1");
  }
}

void InitMlp(const MlpSpec& spec, const std::string& prefix, Rng& rng,
             ParamStore& params) {
  spec.Validate();
  for (int i = 0; i < spec.layers(); ++i) {
    const int in = spec.widths[i];
    const int out = spec.widths[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Tensor w(in, out), b(1, out);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.Uniform(-bound, bound);
    for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = rng.Uniform(-bound, bound);
    params.Add(W(prefix, i), std::move(w));
    params.Add(B(prefix, i), std::move(b));
  }
}

Tape::Var MlpForward(Tape& tape, const MlpSpec& spec, const ParamStore& params,
                     const std::string& prefix, Tape::Var input) {
  if (tape.value(input).cols() != spec.input()) {
    Fail(ErrorCode::kShapeMismatch, "MLP input width mismatch for " + prefix);
  }
  Tape::Var h = input;
  for (int i = 0; i < spec.layers(); ++i) {
    h = tape.AddBias(tape.MatMul(h, tape.Parameter(params, W(prefix, i))),
                     tape.Parameter(params, B(prefix, i)));
    if (i + 1 < spec.layers()) h = tape.Relu(h);
  }
  return h;
}

Tensor MlpForwardValue(const MlpSpec& spec, const ParamStore& params,
                       const std::string& prefix, const Tensor& input) {
  if (input.cols() != spec.input()) {
    Fail(ErrorCode::kShapeMismatch, "MLP input width mismatch for " + prefix);
  }
  Tensor h = input;
  for (int i = 0; i < spec.layers(); ++i) {
    Tensor next = h * params.at(W(prefix, i));
    next.rowwise() += params.at(B(prefix, i)).row(0);
    if (i + 1 < spec.layers()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  CheckFinite(h, "MLP forward");
  return h;
}

void MixerSpec::Validate() const {
  if (n_inputs < 1 || state_dim < 1 || embed_dim < 1 || hyper_hidden < 1) {
    Fail(ErrorCode::kInvalidArgument, "mixer dimensions must be >= 1");
  }
}

void InitMixer(const MixerSpec& spec, const std::string& prefix, Rng& rng,
               ParamStore& params) {
  spec.Validate();
  if (spec.kind == MixerKind::kVdn) return;
  InitMlp(HyperW1(spec), prefix + ".hyper_w1", rng, params);
  InitMlp(HyperB1(spec), prefix + ".hyper_b1", rng, params);
  InitMlp(HyperW2(spec), prefix + ".hyper_w2", rng, params);
  InitMlp(HyperV(spec), prefix + ".hyper_v", rng, params);
}

Tape::Var MixerForward(Tape& tape, const MixerSpec& spec, const ParamStore& params,
                       const std::string& prefix, Tape::Var agent_qs,
                       Tape::Var state) {
  const Tensor& q = tape.value(agent_qs);
  if (q.cols() != spec.n_inputs) Fail(ErrorCode::kShapeMismatch, "mixer input count mismatch");
  if (spec.kind == MixerKind::kVdn) return tape.RowSum(agent_qs);
  if (tape.value(state).cols() != spec.state_dim || tape.value(state).rows() != q.rows()) {
    Fail(ErrorCode::kShapeMismatch, "mixer state shape mismatch");
  }
  Tape::Var w1 = tape.Abs(MlpForward(tape, HyperW1(spec), params, prefix + ".hyper_w1", state));
  Tape::Var b1 = MlpForward(tape, HyperB1(spec), params, prefix + ".hyper_b1", state);
  Tape::Var hidden = tape.Elu(tape.Add(tape.BatchVecMat(agent_qs, w1, spec.embed_dim), b1));
  Tape::Var w2 = tape.Abs(MlpForward(tape, HyperW2(spec), params, prefix + ".hyper_w2", state));
  Tape::Var v = MlpForward(tape, HyperV(spec), params, prefix + ".hyper_v", state);
  return tape.Add(tape.RowDot(hidden, w2), v);
}

Tensor MixerForwardValue(const MixerSpec& spec, const ParamStore& params,
                         const std::string& prefix, const Tensor& agent_qs,
                         const Tensor& state) {
  Tape tape;
  Tape::Var out = MixerForward(tape, spec, params, prefix, tape.Constant(agent_qs),
                               tape.Constant(state));
  return tape.value(out);
}

}  // namespace sparse_attack
