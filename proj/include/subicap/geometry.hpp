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

// Region boxes and the pairwise geometry features fed to encoder attention.

#ifndef SUBICAP_GEOMETRY_HPP_
#define SUBICAP_GEOMETRY_HPP_

#include <array>
#include <vector>

#include "subicap/autograd.hpp"

namespace subicap {

// Lower clamp on |Δx| and |Δy| before taking logs.
inline constexpr double kDisplacementEpsilon = 1e-3;
// Wavelength base of the sinusoidal geometry embedding.
inline constexpr double kGeometryWaveBase = 1000.0;

struct Box {
  double x = 0.0;  // center
  double y = 0.0;
  double w = 1.0;  // > 0
  double h = 1.0;  // > 0

  bool operator==(const Box&) const = default;
};

struct Region {
  Box box;
  std::vector<double> appearance;

  bool operator==(const Region&) const = default;
};

using RegionSet = std::vector<Region>;

// Throws Error(kShapeMismatch) on an empty set, non-positive sizes or ragged
// appearance vectors; `d_in` of 0 skips the dimension check.
void validate_regions(const RegionSet& regions, size_t d_in = 0);

using Displacement = std::array<double, 4>;

// (log(max(|Δx|,ε)/w_l), log(max(|Δy|,ε)/h_l), log(w_m/w_l), log(h_m/h_l))
Displacement displacement(const Region& l, const Region& m);

// Each component expands to `dim` interleaved features
// (sin(v·f_0), cos(v·f_0), sin(v·f_1), ...) with f_i = base^(-2i/dim).
// Output length 4·dim, component-major.
std::vector<double> positional_embed(const Displacement& lambda, size_t dim);

// Row l·N+m holds positional_embed(displacement(l, m)); shape N²×4·dim.
Matrix geometry_embedding(const RegionSet& regions, size_t dim);

// ReLU(embedding · w_g) reshaped to N×N for a single column of w_g.
Matrix geometric_weights(const RegionSet& regions, const Matrix& w_g, size_t dim,
                         Eigen::Index column = 0);

}  // namespace subicap

#endif  // SUBICAP_GEOMETRY_HPP_
