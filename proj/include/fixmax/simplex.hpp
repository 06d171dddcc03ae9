// Copyright 2026 the fixmax authors
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
//
// Geometry of standard probability simplices and their products: validated
// points, metrics, and lattice enumeration. Everything here is a pure value
// type, immutable after construction and safe to share across threads.

#ifndef FIXMAX_SIMPLEX_HPP
#define FIXMAX_SIMPLEX_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace fixmax {

// Default validation tolerance on |sum(weights) - 1|.
inline constexpr double kSimplexSumTolerance = 1e-12;
// Weights this far below zero are treated as rounding noise and clamped.
inline constexpr double kNegativeWeightSlack = -1e-15;

// A point of a standard simplex: probability weights over pure strategies.
struct MixedStrategy {
  std::vector<double> weights;

  std::size_t dim() const { return weights.size(); }
};

// A profile (pair of mixed strategies); the product space the solver works on.
struct ProductPoint {
  MixedStrategy row;
  MixedStrategy col;
};

enum class Norm {
  kEuclidean,  // Euclidean norm on the concatenation of all coordinates.
  kMaxAbs,     // max over coordinate gaps
};

struct MetricConfig {
  Norm norm = Norm::kEuclidean;
};

// Validates and builds a MixedStrategy. Rejects negative weights (beyond a
// -1e-15 slack, which gets clamped to zero) and sums farther than `tolerance`
// from 1. Never renormalizes.
MixedStrategy make_mixed(std::vector<double> weights,
                         double tolerance = kSimplexSumTolerance);

ProductPoint make_product(MixedStrategy row, MixedStrategy col);

// True iff `m` satisfies the simplex invariants under the given tolerance.
bool is_valid_mixed(const MixedStrategy& m,
                    double tolerance = kSimplexSumTolerance);
bool is_valid_product(const ProductPoint& x,
                      double tolerance = kSimplexSumTolerance);

double distance(const MixedStrategy& a, const MixedStrategy& b,
                const MetricConfig& cfg = {});
double distance(const ProductPoint& x, const ProductPoint& y,
                const MetricConfig& cfg = {});

// All simplex points whose weights are integer multiples of 1/mesh, in
// lexicographic order of the integer numerator lists. Count is
// C(mesh + dim - 1, dim - 1).
std::vector<MixedStrategy> grid_points(int dim, std::int64_t mesh);

// All product-grid points of the given mesh (per factor) within `radius` of
// `x`, plus `x` itself; never empty. Grid points come first in lexicographic
// numerator order; `x` is appended unless it coincides with one of them.
std::vector<ProductPoint> local_grid(const ProductPoint& x, double radius,
                                     std::int64_t mesh,
                                     const MetricConfig& cfg = {});

namespace lattice {

// Visits every composition of `total` into `dim` nonnegative parts, in
// lexicographic order. The span passed to `fn` is reused between calls.
void for_each_composition(int dim, std::int64_t total,
                          const std::function<void(const std::int64_t*)>& fn);

// Same, restricted per coordinate to [lo[i], hi[i]]. Prunes branches whose
// remaining coordinates cannot reach `total`.
void for_each_composition_window(
    int dim, std::int64_t total, const std::int64_t* lo,
    const std::int64_t* hi, const std::function<void(const std::int64_t*)>& fn);

std::int64_t composition_count(int dim, std::int64_t total);

}  // namespace lattice

}  // namespace fixmax

#endif  // FIXMAX_SIMPLEX_HPP
