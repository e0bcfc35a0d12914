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

#include "subicap/geometry.hpp"

#include <cmath>
#include <string>

#include "subicap/error.hpp"

namespace subicap {

void validate_regions(const RegionSet& regions, size_t d_in) {
  if (regions.empty()) throw Error(ErrorKind::kShapeMismatch, "region set is empty");
  const size_t dim = d_in ? d_in : regions.front().appearance.size();
  for (size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (!(r.box.w > 0.0) || !(r.box.h > 0.0)) {
      throw Error(ErrorKind::kShapeMismatch,
                  "region " + std::to_string(i) + " has a non-positive width or height");
    }
    if (r.appearance.size() != dim) {
      throw Error(ErrorKind::kShapeMismatch, "region " + std::to_string(i) + " appearance has " +
                                                 std::to_string(r.appearance.size()) +
                                                 " dims, expected " + std::to_string(dim));
    }
  }
}

Displacement displacement(const Region& l, const Region& m) {
  const Box& a = l.box;
  const Box& b = m.box;
  return {std::log(std::max(std::abs(b.x - a.x), kDisplacementEpsilon) / a.w),
          std::log(std::max(std::abs(b.y - a.y), kDisplacementEpsilon) / a.h),
          std::log(b.w / a.w), std::log(b.h / a.h)};
}

std::vector<double> positional_embed(const Displacement& lambda, size_t dim) {
  if (dim == 0 || dim % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument, "geometry embedding dim must be even and positive");
  }
  std::vector<double> out;
  out.reserve(4 * dim);
  for (double v : lambda) {
    for (size_t i = 0; i < dim / 2; ++i) {
      const double freq =
          std::pow(kGeometryWaveBase, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
      out.push_back(std::sin(v * freq));
      out.push_back(std::cos(v * freq));
    }
  }
  return out;
}

Matrix geometry_embedding(const RegionSet& regions, size_t dim) {
  const auto n = static_cast<Eigen::Index>(regions.size());
  Matrix out(n * n, static_cast<Eigen::Index>(4 * dim));
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index m = 0; m < n; ++m) {
      const auto feat = positional_embed(
          displacement(regions[static_cast<size_t>(l)], regions[static_cast<size_t>(m)]), dim);
      for (size_t k = 0; k < feat.size(); ++k) out(l * n + m, static_cast<Eigen::Index>(k)) = feat[k];
    }
  }
  return out;
}

Matrix geometric_weights(const RegionSet& regions, const Matrix& w_g, size_t dim,
                         Eigen::Index column) {
  if (w_g.rows() != static_cast<Eigen::Index>(4 * dim) || column >= w_g.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "W_G must have 4·dim rows");
  }
  const auto n = static_cast<Eigen::Index>(regions.size());
  const Matrix emb = geometry_embedding(regions, dim);
  const Eigen::VectorXd flat = (emb * w_g.col(column)).cwiseMax(0.0);
  Matrix out(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index m = 0; m < n; ++m) out(l, m) = flat(l * n + m);
  }
  return out;
}

}  // namespace subicap
