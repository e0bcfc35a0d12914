// Copyright 2026 The subicap Authors.
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

// Minimal reverse-mode differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. Values are computed
// eagerly; backward() walks the record in reverse and accumulates gradients.
// Only the operations the relational transformer needs are provided.

#ifndef SUBICAP_AUTOGRAD_HPP_
#define SUBICAP_AUTOGRAD_HPP_

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace subicap {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-wise visual-geometric attention: w[l,m] = g[l,m] exp(a[l,m]) / Σ_i g[l,i]
// exp(a[l,i]). Rows whose geometric weights are all zero fall back to a plain
// softmax of `logits`.
Matrix fused_attention(const Matrix& logits, const Matrix& geo);
Matrix softmax_rows(const Matrix& logits);

class Tape {
 public:
  struct Var {
    int index = -1;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf whose gradient is tracked; `slot` is an opaque caller id reported by
  // leaf_slots() so parameter gradients can be collected after backward().
  Var leaf(const Matrix& value, int slot);
  Var constant(Matrix value);

  const Matrix& value(Var v) const { return nodes_[static_cast<size_t>(v.index)].value; }
  const Matrix& grad(Var v) const { return nodes_[static_cast<size_t>(v.index)].grad; }

  Var matmul(Var a, Var b);
  // a · bᵀ
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  // a + row vector broadcast over rows
  Var add_row(Var a, Var row);
  Var scale(Var a, double s);
  Var relu(Var a);
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var slice_cols(Var a, int start, int count);
  Var concat_cols(std::span<const Var> parts);
  // Column `col` of an (n·n)×c matrix reshaped row-major to n×n.
  Var column_to_square(Var a, int col, int n);
  Var gather_rows(Var table, std::span<const int> rows);
  Var softmax_rows(Var logits, bool causal);
  Var fused_attention(Var logits, Var geo);
  // Σ over positions with target != ignore of -log softmax(logits)[target],
  // divided by `normalizer`. Result is 1×1.
  Var cross_entropy(Var logits, std::span<const int> targets, int ignore, double normalizer);

  // Seeds d(root)/d(root) = 1; root must be 1×1.
  void backward(Var root);

  // (slot, gradient) for every leaf.
  std::vector<std::pair<int, const Matrix*>> leaf_slots() const;

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void()> backward;
    int slot = -1;
  };

  Var push(Matrix value, std::function<void()> backward = {});
  Matrix& g(Var v);
  const Matrix& val(Var v) const { return nodes_[static_cast<size_t>(v.index)].value; }

  std::vector<Node> nodes_;
};

}  // namespace subicap

#endif  // SUBICAP_AUTOGRAD_HPP_
