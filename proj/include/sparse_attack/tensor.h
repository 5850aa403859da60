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

#ifndef SPARSE_ATTACK_TENSOR_H_
#define SPARSE_ATTACK_TENSOR_H_

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace sparse_attack {

// Dense row-major matrix of 64-bit reals. Vectors are 1xN or Nx1; the batch
// dimension, when present, is the row index.
using Tensor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void CheckFinite(const Tensor& t, const char* where);

// Named parameter tensors in insertion order.
class ParamStore {
 public:
  void Add(const std::string& name, Tensor value);
  bool Contains(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  size_t size() const { return names_.size(); }
  Tensor& value(size_t i) { return values_[i]; }
  const Tensor& value(size_t i) const { return values_[i]; }
  // Same names and shapes, all entries zero.
  ParamStore ZerosLike() const;

  bool operator==(const ParamStore& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, size_t> index_;
};

// Reverse-mode differentiation tape. Every op computes its value eagerly,
// checks it for NaN/Inf and records how to push gradients to its inputs.
class Tape {
 public:
  struct Var {
    int id = -1;
  };

  Var Constant(Tensor value);
  Var Parameter(const ParamStore& store, const std::string& name);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  // Gradient of the last Backward() loss with respect to `v`.
  Tensor grad(Var v) const;
  size_t size() const { return nodes_.size(); }

  Var MatMul(Var a, Var b);
  // x (B x n) + bias (1 x n) broadcast over rows.
  Var AddBias(Var x, Var bias);
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);
  Var Scale(Var a, double s);
  Var Relu(Var a);
  Var Elu(Var a);
  Var Abs(Var a);
  Var Square(Var a);
  Var Sum(Var a);
  Var Mean(Var a);
  // (B x n) -> (B x 1).
  Var RowSum(Var a);
  // Picks column index[b] of row b: (B x n) -> (B x 1).
  Var Gather(Var a, std::span<const int> index);
  // Row-wise dot product: (B x n), (B x n) -> (B x 1).
  Var RowDot(Var a, Var b);
  // Per-row vector-matrix product: q is (B x n), w is (B x n*k) holding a
  // row-major n x k matrix per row; result is (B x k).
  Var BatchVecMat(Var q, Var w, int k);
  Var ConcatCols(Var a, Var b);
  // Reinterprets the row-major data with a new shape of equal size.
  Var Reshape(Var a, int rows, int cols);
  // Same value, cut from the graph.
  Var Detach(Var a);

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws NotScalar unless the
  // loss is 1x1.
  void Backward(Var loss);
  // Gradients for every entry of `params`; entries not reached are zero.
  ParamStore Gradients(const ParamStore& params) const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    int lhs = -1;
    int rhs = -1;
    std::string param_name;
    std::function<void(Tape&, int)> backward;
  };

  Var Push(Tensor value, int lhs, int rhs, std::function<void(Tape&, int)> backward);
  void Accumulate(int id, const Tensor& g);
  bool NeedsGrad(int id) const { return id >= 0 && nodes_[id].requires_grad; }

  std::vector<Node> nodes_;
};

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_TENSOR_H_
