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

#include "sparse_attack/tensor.h"

#include <cmath>
#include <cstring>

#include "sparse_attack/error.h"

namespace sparse_attack {
namespace {

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    Fail(ErrorCode::kShapeMismatch,
         std::string(op) + ": " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
             "x" + std::to_string(b.cols()));
  }
}

}  // namespace

void CheckFinite(const Tensor& t, const char* where) {
  if (!t.allFinite()) Fail(ErrorCode::kNonFinite, std::string("non-finite value in ") + where);
}

void ParamStore::Add(const std::string& name, Tensor value) {
  if (index_.count(name)) Fail(ErrorCode::kInvalidArgument, "duplicate parameter " + name);
  index_[name] = names_.size();
  names_.push_back(name);
  values_.push_back(std::move(value));
}

bool ParamStore::Contains(const std::string& name) const { return index_.count(name) > 0; }

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) Fail(ErrorCode::kInvalidArgument, "unknown parameter " + name);
  return values_[it->second];
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) Fail(ErrorCode::kInvalidArgument, "unknown parameter " + name);
  return values_[it->second];
}

ParamStore ParamStore::ZerosLike() const {
  ParamStore z;
  for (size_t i = 0; i < names_.size(); ++i) {
    z.Add(names_[i], Tensor::Zero(values_[i].rows(), values_[i].cols()));
  }
  return z;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (names_ != other.names_) return false;
  for (size_t i = 0; i < values_.size(); ++i) {
    const Tensor& a = values_[i];
    const Tensor& b = other.values_[i];
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) != 0) return false;
  }
  return true;
}

Tape::Var Tape::Push(Tensor value, int lhs, int rhs,
                     std::function<void(Tape&, int)> backward) {
  CheckFinite(value, "tape op");
  Node n;
  n.value = std::move(value);
  n.lhs = lhs;
  n.rhs = rhs;
  n.requires_grad = NeedsGrad(lhs) || NeedsGrad(rhs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::Accumulate(int id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Tape::Var Tape::Constant(Tensor value) { return Push(std::move(value), -1, -1, nullptr); }

Tape::Var Tape::Parameter(const ParamStore& store, const std::string& name) {
  Var v = Push(store.at(name), -1, -1, nullptr);
  nodes_[v.id].requires_grad = true;
  nodes_[v.id].param_name = name;
  return v;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.size() == 0) return Tensor::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Tape::Var Tape::MatMul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& w = value(b);
  if (x.cols() != w.rows()) Fail(ErrorCode::kShapeMismatch, "MatMul inner dimensions differ");
  return Push(x * w, a.id, b.id, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor g = n.grad;
    const int l = n.lhs, r = n.rhs;
    if (t.NeedsGrad(l)) t.Accumulate(l, g * t.nodes_[r].value.transpose());
    if (t.NeedsGrad(r)) t.Accumulate(r, t.nodes_[l].value.transpose() * g);
  });
}

Tape::Var Tape::AddBias(Var x, Var bias) {
  const Tensor& xv = value(x);
  const Tensor& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    Fail(ErrorCode::kShapeMismatch, "AddBias expects a 1 x n bias");
  }
  Tensor out = xv;
  out.rowwise() += bv.row(0);
  return Push(std::move(out), x.id, bias.id, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor g = n.grad;
    const int l = n.lhs, r = n.rhs;
    if (t.NeedsGrad(l)) t.Accumulate(l, g);
    if (t.NeedsGrad(r)) t.Accumulate(r, g.colwise().sum());
  });
}

Tape::Var Tape::Add(Var a, Var b) {
  RequireSameShape(value(a), value(b), "Add");
  return Push(value(a) + value(b), a.id, b.id, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor g = n.grad;
    const int l = n.lhs, r = n.rhs;
    t.Accumulate(l, g);
    t.Accumulate(r, g);
  });
}

Tape::Var Tape::Sub(Var a, Var b) {
  RequireSameShape(value(a), value(b), "Sub");
  return Push(value(a) - value(b), a.id, b.id, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor g = n.grad;
    const int l = n.lhs, r = n.rhs;
    t.Accumulate(l, g);
    if (t.NeedsGrad(r)) t.Accumulate(r, -g);
  });
}

Tape::Var Tape::Mul(Var a, Var b) {
  RequireSameShape(value(a), value(b), "Mul");
  return Push(value(a).cwiseProduct(value(b)), a.id, b.id, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor g = n.grad;
    const int l = n.lhs, r = n.rhs;
    if (t.NeedsGrad(l)) t.Accumulate(l, g.cwiseProduct(t.nodes_[r].value));
    if (t.NeedsGrad(r)) t.Accumulate(r, g.cwiseProduct(t.nodes_[l].value));
  });
}

Tape::Var Tape::Scale(Var a, double s) {
  return Push(value(a) * s, a.id, -1, [s](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    t.Accumulate(n.lhs, n.grad * s);
  });
}

Tape::Var Tape::Relu(Var a) {
  return Push(value(a).cwiseMax(0.0), a.id, -1, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor& x = t.nodes_[n.lhs].value;
    Tensor g = n.grad.cwiseProduct((x.array() > 0.0).cast<double>().matrix());
    t.Accumulate(n.lhs, g);
  });
}

Tape::Var Tape::Elu(Var a) {
  Tensor out = value(a).unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
  return Push(std::move(out), a.id, -1, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor& x = t.nodes_[n.lhs].value;
    Tensor d = x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
    t.Accumulate(n.lhs, n.grad.cwiseProduct(d));
  });
}

Tape::Var Tape::Abs(Var a) {
  return Push(value(a).cwiseAbs(), a.id, -1, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor& x = t.nodes_[n.lhs].value;
    Tensor s = x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    t.Accumulate(n.lhs, n.grad.cwiseProduct(s));
  });
}

Tape::Var Tape::Square(Var a) {
  return Push(value(a).cwiseAbs2(), a.id, -1, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    t.Accumulate(n.lhs, 2.0 * n.grad.cwiseProduct(t.nodes_[n.lhs].value));
  });
}

Tape::Var Tape::Sum(Var a) {
  Tensor out(1, 1);
  out(0, 0) = value(a).sum();
  return Push(std::move(out), a.id, -1, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor& x = t.nodes_[n.lhs].value;
    t.Accumulate(n.lhs, Tensor::Constant(x.rows(), x.cols(), n.grad(0, 0)));
  });
}

Tape::Var Tape::Mean(Var a) {
  const double count = static_cast<double>(value(a).size());
  if (count == 0) Fail(ErrorCode::kShapeMismatch, "Mean of empty tensor");
  return Scale(Sum(a), 1.0 / count);
}

Tape::Var Tape::RowSum(Var a) {
  return Push(value(a).rowwise().sum(), a.id, -1, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor& x = t.nodes_[n.lhs].value;
    Tensor g(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) g.col(c) = n.grad.col(0);
    t.Accumulate(n.lhs, g);
  });
}

Tape::Var Tape::Gather(Var a, std::span<const int> index) {
  const Tensor& x = value(a);
  if (static_cast<Eigen::Index>(index.size()) != x.rows()) {
    Fail(ErrorCode::kShapeMismatch, "Gather index count must equal rows");
  }
  Tensor out(x.rows(), 1);
  std::vector<int> idx(index.begin(), index.end());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    if (idx[r] < 0 || idx[r] >= x.cols()) Fail(ErrorCode::kShapeMismatch, "Gather index out of range");
    out(r, 0) = x(r, idx[r]);
  }
  return Push(std::move(out), a.id, -1, [idx = std::move(idx)](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor& x = t.nodes_[n.lhs].value;
    Tensor g = Tensor::Zero(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) g(r, idx[r]) = n.grad(r, 0);
    t.Accumulate(n.lhs, g);
  });
}

Tape::Var Tape::RowDot(Var a, Var b) {
  RequireSameShape(value(a), value(b), "RowDot");
  return Push(value(a).cwiseProduct(value(b)).rowwise().sum(), a.id, b.id,
              [](Tape& t, int id) {
                const Node& n = t.nodes_[id];
                const int l = n.lhs, r = n.rhs;
                const Tensor& av = t.nodes_[l].value;
                const Tensor& bv = t.nodes_[r].value;
                Tensor ga(av.rows(), av.cols()), gb(bv.rows(), bv.cols());
                for (Eigen::Index row = 0; row < av.rows(); ++row) {
                  ga.row(row) = n.grad(row, 0) * bv.row(row);
                  gb.row(row) = n.grad(row, 0) * av.row(row);
                }
                if (t.NeedsGrad(l)) t.Accumulate(l, ga);
                if (t.NeedsGrad(r)) t.Accumulate(r, gb);
              });
}

Tape::Var Tape::BatchVecMat(Var q, Var w, int k) {
  const Tensor& qv = value(q);
  const Tensor& wv = value(w);
  const Eigen::Index n = qv.cols();
  if (wv.rows() != qv.rows() || wv.cols() != n * k) {
    Fail(ErrorCode::kShapeMismatch, "BatchVecMat expects w of shape B x (n*k)");
  }
  Tensor out = Tensor::Zero(qv.rows(), k);
  for (Eigen::Index b = 0; b < qv.rows(); ++b) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.row(b) += qv(b, i) * wv.block(b, i * k, 1, k);
    }
  }
  return Push(std::move(out), q.id, w.id, [k](Tape& t, int id) {
    const Node& node = t.nodes_[id];
    const int l = node.lhs, r = node.rhs;
    const Tensor& qv = t.nodes_[l].value;
    const Tensor& wv = t.nodes_[r].value;
    const Eigen::Index n = qv.cols();
    Tensor gq = Tensor::Zero(qv.rows(), n);
    Tensor gw = Tensor::Zero(wv.rows(), wv.cols());
    for (Eigen::Index b = 0; b < qv.rows(); ++b) {
      for (Eigen::Index i = 0; i < n; ++i) {
        gq(b, i) = (node.grad.row(b).array() * wv.block(b, i * k, 1, k).array()).sum();
        gw.block(b, i * k, 1, k) = qv(b, i) * node.grad.row(b);
      }
    }
    if (t.NeedsGrad(l)) t.Accumulate(l, gq);
    if (t.NeedsGrad(r)) t.Accumulate(r, gw);
  });
}

Tape::Var Tape::ConcatCols(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rows() != bv.rows()) Fail(ErrorCode::kShapeMismatch, "ConcatCols row mismatch");
  Tensor out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  return Push(std::move(out), a.id, b.id, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const int l = n.lhs, r = n.rhs;
    const Eigen::Index ca = t.nodes_[l].value.cols();
    const Eigen::Index cb = t.nodes_[r].value.cols();
    if (t.NeedsGrad(l)) t.Accumulate(l, n.grad.leftCols(ca));
    if (t.NeedsGrad(r)) t.Accumulate(r, n.grad.rightCols(cb));
  });
}

Tape::Var Tape::Reshape(Var a, int rows, int cols) {
  const Tensor& av = value(a);
  if (static_cast<Eigen::Index>(rows) * cols != av.size()) {
    Fail(ErrorCode::kShapeMismatch, "Reshape must preserve the element count");
  }
  Tensor out = Eigen::Map<const Tensor>(av.data(), rows, cols);
  return Push(std::move(out), a.id, -1, [](Tape& t, int id) {
    const Node& n = t.nodes_[id];
    const Tensor& x = t.nodes_[n.lhs].value;
    Tensor g = Eigen::Map<const Tensor>(n.grad.data(), x.rows(), x.cols());
    t.Accumulate(n.lhs, g);
  });
}

Tape::Var Tape::Detach(Var a) { return Constant(value(a)); }

void Tape::Backward(Var loss) {
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) Fail(ErrorCode::kNotScalar, "loss must be 1x1");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad = Tensor::Ones(1, 1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, id);
  }
}

ParamStore Tape::Gradients(const ParamStore& params) const {
  ParamStore grads = params.ZerosLike();
  for (const Node& n : nodes_) {
    if (n.param_name.empty() || n.grad.size() == 0) continue;
    if (!grads.Contains(n.param_name)) continue;
    grads.at(n.param_name) += n.grad;
  }
  return grads;
}

}  // namespace sparse_attack
