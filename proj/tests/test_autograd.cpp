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

#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "subicap/autograd.hpp"

using namespace subicap;
using Var = Tape::Var;

namespace {

Matrix random_matrix(std::mt19937& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<size_t>(r)].push_back(m(r, c));
  }
  return out;
}

using Build = std::function<Var(Tape&, const std::vector<Var>&)>;

// Reduces the op output to a scalar with fixed random row/column weights and
// compares tape gradients with central differences for every input entry.
double max_grad_error(std::vector<Matrix> inputs, const Build& build, uint64_t seed) {
  std::mt19937 rng(static_cast<unsigned>(seed));
  Matrix u, v;
  auto scalar = [&](const std::vector<Matrix>& in, std::vector<Matrix>* grads) {
    Tape t;
    std::vector<Var> vars;
    for (size_t i = 0; i < in.size(); ++i) vars.push_back(t.leaf(in[i], static_cast<int>(i)));
    const Var out = build(t, vars);
    if (u.size() == 0) {
      u = random_matrix(rng, 1, static_cast<int>(t.value(out).rows()));
      v = random_matrix(rng, static_cast<int>(t.value(out).cols()), 1);
    }
    const Var root = t.matmul(t.matmul(t.constant(u), out), t.constant(v));
    if (grads) {
      t.backward(root);
      for (const Var& x : vars) {
        grads->push_back(t.grad(x).size() ? t.grad(x) : Matrix::Zero(t.value(x).rows(), t.value(x).cols()));
      }
    }
    return t.value(root)(0, 0);
  };
  std::vector<Matrix> analytic;
  scalar(inputs, &analytic);
  double worst = 0.0;
  const double h = 1e-6;
  for (size_t i = 0; i < inputs.size(); ++i) {
    for (Eigen::Index k = 0; k < inputs[i].size(); ++k) {
      const double keep = inputs[i].data()[k];
      inputs[i].data()[k] = keep + h;
      const double up = scalar(inputs, nullptr);
      inputs[i].data()[k] = keep - h;
      const double down = scalar(inputs, nullptr);
      inputs[i].data()[k] = keep;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[i].data()[k];
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6}));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("fused attention matches a scalar loop") {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const Matrix a = random_matrix(rng, n, n, -4, 4);
    Matrix g = random_matrix(rng, n, n, -1, 2).cwiseMax(0.0);
    if (trial % 10 == 0) g.row(0).setZero();
    const Matrix w = fused_attention(a, g);
    const auto want = oracle::fused_attention(rows_of(a), rows_of(g));
    for (int r = 0; r < n; ++r) {
      CHECK(w.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
      for (int c = 0; c < n; ++c) CHECK(w(r, c) == doctest::Approx(want[r][c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant geometry reduces to softmax") {
  std::mt19937 rng(2);
  const Matrix a = random_matrix(rng, 4, 4, -3, 3);
  const Matrix g = Matrix::Constant(4, 4, 0.7);
  CHECK((fused_attention(a, g) - softmax_rows(a)).cwiseAbs().maxCoeff() < 1e-12);
  // Large logits stay finite.
  const Matrix big = Matrix::Constant(2, 3, 800.0);
  CHECK(fused_attention(big, Matrix::Constant(2, 3, 1.0)).allFinite());
}

TEST_CASE("forward values of basic ops") {
  Tape t;
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix b(2, 2);
  b << 0, 1, 1, 0;
  const Var va = t.constant(a), vb = t.constant(b);
  Matrix ab(2, 2);
  ab << 2, 1, 4, 3;
  CHECK(t.value(t.matmul(va, vb)) == ab);
  CHECK(t.value(t.matmul_nt(va, vb)) == a * b.transpose());
  CHECK(t.value(t.relu(t.scale(va, -1.0))).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.value(t.slice_cols(va, 1, 1))(1, 0) == 4.0);
  const std::vector<Var> parts = {va, vb};
  CHECK(t.value(t.concat_cols(parts)).cols() == 4);
  const std::vector<int> idx = {1, 1, 0};
  CHECK(t.value(t.gather_rows(va, idx))(0, 1) == 4.0);
  const Var causal = t.softmax_rows(va, true);
  CHECK(t.value(causal)(0, 1) == 0.0);
  CHECK(t.value(causal)(0, 0) == 1.0);
}

TEST_CASE("layer norm output has zero mean and unit variance") {
  std::mt19937 rng(3);
  Tape t;
  const Var x = t.constant(random_matrix(rng, 3, 8, -5, 5));
  const Var y = t.layer_norm(x, t.constant(Matrix::Ones(1, 8)), t.constant(Matrix::Zero(1, 8)));
  for (int r = 0; r < 3; ++r) {
    CHECK(std::abs(t.value(y).row(r).mean()) < 1e-12);
    CHECK(t.value(y).row(r).array().square().mean() == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("gradients of every op agree with central differences") {
  std::mt19937 rng(4);
  const double tol = 1e-6;
  CHECK(max_grad_error({random_matrix(rng, 3, 4), random_matrix(rng, 4, 2)},
                       [](Tape& t, const std::vector<Var>& v) { return t.matmul(v[0], v[1]); }, 1) < tol);
  CHECK(max_grad_error({random_matrix(rng, 3, 4), random_matrix(rng, 2, 4)},
                       [](Tape& t, const std::vector<Var>& v) { return t.matmul_nt(v[0], v[1]); }, 2) < tol);
  CHECK(max_grad_error({random_matrix(rng, 3, 4), random_matrix(rng, 3, 4)},
                       [](Tape& t, const std::vector<Var>& v) { return t.add(v[0], v[1]); }, 3) < tol);
  CHECK(max_grad_error({random_matrix(rng, 3, 4), random_matrix(rng, 1, 4)},
                       [](Tape& t, const std::vector<Var>& v) { return t.add_row(v[0], v[1]); }, 4) < tol);
  CHECK(max_grad_error({random_matrix(rng, 3, 4)},
                       [](Tape& t, const std::vector<Var>& v) { return t.scale(t.relu(v[0]), 2.5); }, 5) < tol);
  CHECK(max_grad_error({random_matrix(rng, 3, 6), random_matrix(rng, 1, 6, 0.5, 1.5), random_matrix(rng, 1, 6)},
                       [](Tape& t, const std::vector<Var>& v) { return t.layer_norm(v[0], v[1], v[2]); }, 6) < tol);
  CHECK(max_grad_error({random_matrix(rng, 3, 6)},
                       [](Tape& t, const std::vector<Var>& v) {
                         const std::vector<Var> p = {t.slice_cols(v[0], 4, 2), t.slice_cols(v[0], 0, 3)};
                         return t.concat_cols(p);
                       }, 7) < tol);
  CHECK(max_grad_error({random_matrix(rng, 9, 2)},
                       [](Tape& t, const std::vector<Var>& v) { return t.column_to_square(v[0], 1, 3); }, 8) < tol);
  CHECK(max_grad_error({random_matrix(rng, 5, 3)},
                       [](Tape& t, const std::vector<Var>& v) {
                         const std::vector<int> rows = {4, 0, 4};
                         return t.gather_rows(v[0], rows);
                       }, 9) < tol);
  for (bool causal : {false, true}) {
    CHECK(max_grad_error({random_matrix(rng, 4, 4, -2, 2)},
                         [causal](Tape& t, const std::vector<Var>& v) { return t.softmax_rows(v[0], causal); },
                         10) < tol);
  }
  CHECK(max_grad_error({random_matrix(rng, 4, 4, -2, 2), random_matrix(rng, 4, 4, 0.1, 2.0)},
                       [](Tape& t, const std::vector<Var>& v) { return t.fused_attention(v[0], v[1]); }, 11) < tol);
  CHECK(max_grad_error({random_matrix(rng, 4, 5, -2, 2)},
                       [](Tape& t, const std::vector<Var>& v) {
                         const std::vector<int> targets = {1, 0, 4, 2};
                         return t.cross_entropy(v[0], targets, 2, 3.0);
                       }, 12) < tol);
}

TEST_CASE("cross entropy value") {
  Tape t;
  Matrix z = Matrix::Zero(2, 4);
  const std::vector<int> targets = {1, 3};
  const Var loss = t.cross_entropy(t.constant(z), targets, -1, 2.0);
  CHECK(t.value(loss)(0, 0) == doctest::Approx(std::log(4.0)));
}
