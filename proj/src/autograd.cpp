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

#include "subicap/autograd.hpp"

#include <cmath>
#include <limits>

#include "subicap/error.hpp"

namespace subicap {
namespace {

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::kShapeMismatch, what);
}

// Row-wise softmax; when `causal`, entries right of the diagonal are zero.
Matrix softmax_impl(const Matrix& logits, bool causal) {
  Matrix out = Matrix::Zero(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Eigen::Index width = causal ? std::min<Eigen::Index>(r + 1, logits.cols()) : logits.cols();
    const double hi = logits.row(r).head(width).maxCoeff();
    double z = 0.0;
    for (Eigen::Index c = 0; c < width; ++c) {
      out(r, c) = std::exp(logits(r, c) - hi);
      z += out(r, c);
    }
    for (Eigen::Index c = 0; c < width; ++c) out(r, c) /= z;
  }
  return out;
}

// Fused weights plus, per row, the factor d w[l,m] / d g[l,m] = exp(a - max)/Z
// (zero for fallback rows).
Matrix fused_impl(const Matrix& logits, const Matrix& geo, Matrix* geo_factor) {
  check(logits.rows() == geo.rows() && logits.cols() == geo.cols(),
        "fused attention: logits and geometric weights differ in shape");
  Matrix out(logits.rows(), logits.cols());
  if (geo_factor) *geo_factor = Matrix::Zero(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (geo(r, c) > 0.0) hi = std::max(hi, logits(r, c));
    }
    double z = 0.0;
    if (std::isfinite(hi)) {
      for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        if (geo(r, c) > 0.0) z += geo(r, c) * std::exp(logits(r, c) - hi);
      }
    }
    if (z > 0.0 && std::isfinite(z)) {
      for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double e = std::exp(logits(r, c) - hi);
        out(r, c) = geo(r, c) > 0.0 ? geo(r, c) * e / z : 0.0;
        if (geo_factor) (*geo_factor)(r, c) = e / z;
      }
    } else {
      out.row(r) = softmax_impl(logits.row(r), false);
    }
  }
  return out;
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) { return softmax_impl(logits, false); }

Matrix fused_attention(const Matrix& logits, const Matrix& geo) {
  return fused_impl(logits, geo, nullptr);
}

Tape::Var Tape::push(Matrix value, std::function<void()> backward) {
  Node node;
  node.value = std::move(value);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::g(Var v) {
  Node& node = nodes_[static_cast<size_t>(v.index)];
  if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

Tape::Var Tape::leaf(const Matrix& value, int slot) {
  Var v = push(value);
  nodes_.back().slot = slot;
  return v;
}

Tape::Var Tape::constant(Matrix value) { return push(std::move(value)); }

Tape::Var Tape::matmul(Var a, Var b) {
  check(val(a).cols() == val(b).rows(), "matmul: inner dimensions differ");
  const Var out{static_cast<int>(nodes_.size())};
  return push(val(a) * val(b), [this, a, b, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    g(a).noalias() += d * val(b).transpose();
    g(b).noalias() += val(a).transpose() * d;
  });
}

Tape::Var Tape::matmul_nt(Var a, Var b) {
  check(val(a).cols() == val(b).cols(), "matmul_nt: inner dimensions differ");
  const Var out{static_cast<int>(nodes_.size())};
  return push(val(a) * val(b).transpose(), [this, a, b, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    g(a).noalias() += d * val(b);
    g(b).noalias() += d.transpose() * val(a);
  });
}

Tape::Var Tape::add(Var a, Var b) {
  check(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(), "add: shapes differ");
  const Var out{static_cast<int>(nodes_.size())};
  return push(val(a) + val(b), [this, a, b, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    g(a) += d;
    g(b) += d;
  });
}

Tape::Var Tape::add_row(Var a, Var row) {
  check(val(row).rows() == 1 && val(row).cols() == val(a).cols(), "add_row: bias shape");
  Matrix value = val(a);
  value.rowwise() += val(row).row(0);
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(value), [this, a, row, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    g(a) += d;
    g(row) += d.colwise().sum();
  });
}

Tape::Var Tape::scale(Var a, double s) {
  const Var out{static_cast<int>(nodes_.size())};
  return push(val(a) * s, [this, a, s, out] {
    g(a) += nodes_[static_cast<size_t>(out.index)].grad * s;
  });
}

Tape::Var Tape::relu(Var a) {
  const Var out{static_cast<int>(nodes_.size())};
  return push(val(a).cwiseMax(0.0), [this, a, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    g(a) += (val(a).array() > 0.0).select(d, 0.0);
  });
}

Tape::Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Matrix& in = val(x);
  const auto cols = in.cols();
  check(val(gamma).rows() == 1 && val(gamma).cols() == cols, "layer_norm: gamma shape");
  check(val(beta).rows() == 1 && val(beta).cols() == cols, "layer_norm: beta shape");
  Matrix xhat(in.rows(), cols);
  Eigen::VectorXd inv(in.rows());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double mean = in.row(r).mean();
    const double var = (in.row(r).array() - mean).square().mean();
    inv(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (in.row(r).array() - mean) * inv(r);
  }
  Matrix value = xhat.array().rowwise() * val(gamma).row(0).array();
  value.rowwise() += val(beta).row(0);
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(value), [this, x, gamma, beta, out, xhat, inv] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    g(gamma) += (d.array() * xhat.array()).colwise().sum().matrix();
    g(beta) += d.colwise().sum();
    const Matrix dxhat = d.array().rowwise() * val(gamma).row(0).array();
    const double n = static_cast<double>(xhat.cols());
    Matrix& dx = g(x);
    for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
      const double sum_d = dxhat.row(r).sum();
      const double sum_dx = dxhat.row(r).dot(xhat.row(r));
      dx.row(r).array() +=
          inv(r) / n * (n * dxhat.row(r).array() - sum_d - xhat.row(r).array() * sum_dx);
    }
  });
}

Tape::Var Tape::slice_cols(Var a, int start, int count) {
  check(start >= 0 && count >= 0 && start + count <= val(a).cols(), "slice_cols: out of range");
  const Var out{static_cast<int>(nodes_.size())};
  return push(val(a).middleCols(start, count), [this, a, start, count, out] {
    g(a).middleCols(start, count) += nodes_[static_cast<size_t>(out.index)].grad;
  });
}

Tape::Var Tape::concat_cols(std::span<const Var> parts) {
  check(!parts.empty(), "concat_cols: no inputs");
  const auto rows = val(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    check(val(p).rows() == rows, "concat_cols: row counts differ");
    cols += val(p).cols();
  }
  Matrix value(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    value.middleCols(at, val(p).cols()) = val(p);
    at += val(p).cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(value), [this, inputs, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    Eigen::Index at = 0;
    for (Var p : inputs) {
      const auto c = val(p).cols();
      g(p) += d.middleCols(at, c);
      at += c;
    }
  });
}

Tape::Var Tape::column_to_square(Var a, int col, int n) {
  check(val(a).rows() == static_cast<Eigen::Index>(n) * n && col < val(a).cols(),
        "column_to_square: shape");
  Matrix value(n, n);
  for (int l = 0; l < n; ++l) {
    for (int m = 0; m < n; ++m) value(l, m) = val(a)(l * n + m, col);
  }
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(value), [this, a, col, n, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    Matrix& ga = g(a);
    for (int l = 0; l < n; ++l) {
      for (int m = 0; m < n; ++m) ga(l * n + m, col) += d(l, m);
    }
  });
}

Tape::Var Tape::gather_rows(Var table, std::span<const int> rows) {
  Matrix value(static_cast<Eigen::Index>(rows.size()), val(table).cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    check(rows[i] >= 0 && rows[i] < val(table).rows(), "gather_rows: index out of range");
    value.row(static_cast<Eigen::Index>(i)) = val(table).row(rows[i]);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(value), [this, table, idx, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    Matrix& gt = g(table);
    for (size_t i = 0; i < idx.size(); ++i) gt.row(idx[i]) += d.row(static_cast<Eigen::Index>(i));
  });
}

Tape::Var Tape::softmax_rows(Var logits, bool causal) {
  Matrix w = softmax_impl(val(logits), causal);
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(w), [this, logits, out] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    const Matrix& w = nodes_[static_cast<size_t>(out.index)].value;
    const Eigen::VectorXd dots = (w.array() * d.array()).rowwise().sum();
    g(logits) += (w.array() * (d.array().colwise() - dots.array())).matrix();
  });
}

Tape::Var Tape::fused_attention(Var logits, Var geo) {
  Matrix factor;
  Matrix w = fused_impl(val(logits), val(geo), &factor);
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(w), [this, logits, geo, out, factor] {
    const Matrix& d = nodes_[static_cast<size_t>(out.index)].grad;
    const Matrix& w = nodes_[static_cast<size_t>(out.index)].value;
    const Eigen::VectorXd dots = (w.array() * d.array()).rowwise().sum();
    const Eigen::ArrayXXd centered = d.array().colwise() - dots.array();
    g(logits) += (w.array() * centered).matrix();
    g(geo) += (factor.array() * centered).matrix();
  });
}

Tape::Var Tape::cross_entropy(Var logits, std::span<const int> targets, int ignore,
                              double normalizer) {
  const Matrix& z = val(logits);
  check(static_cast<Eigen::Index>(targets.size()) == z.rows(), "cross_entropy: target count");
  Matrix probs = softmax_impl(z, false);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int t = targets[static_cast<size_t>(r)];
    if (t == ignore) continue;
    check(t >= 0 && t < z.cols(), "cross_entropy: target out of range");
    const double hi = z.row(r).maxCoeff();
    const double lse = hi + std::log((z.row(r).array() - hi).exp().sum());
    loss += lse - z(r, t);
  }
  Matrix value(1, 1);
  value(0, 0) = loss / normalizer;
  std::vector<int> tgt(targets.begin(), targets.end());
  const Var out{static_cast<int>(nodes_.size())};
  return push(std::move(value), [this, logits, tgt, ignore, normalizer, out, probs] {
    const double d = nodes_[static_cast<size_t>(out.index)].grad(0, 0);
    Matrix& gz = g(logits);
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      const int t = tgt[static_cast<size_t>(r)];
      if (t == ignore) continue;
      Eigen::RowVectorXd row = probs.row(r);
      row(t) -= 1.0;
      gz.row(r) += row * (d / normalizer);
    }
  });
}

void Tape::backward(Var root) {
  check(val(root).rows() == 1 && val(root).cols() == 1, "backward: root must be scalar");
  for (auto& node : nodes_) node.grad.resize(0, 0);
  g(root)(0, 0) = 1.0;
  for (int i = root.index; i >= 0; --i) {
    Node& node = nodes_[static_cast<size_t>(i)];
    if (node.grad.size() != 0 && node.backward) node.backward();
  }
}

std::vector<std::pair<int, const Matrix*>> Tape::leaf_slots() const {
  std::vector<std::pair<int, const Matrix*>> out;
  for (const auto& node : nodes_) {
    if (node.slot >= 0) out.emplace_back(node.slot, &node.grad);
  }
  return out;
}

}  // namespace subicap
