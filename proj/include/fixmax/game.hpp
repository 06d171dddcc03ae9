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
// Finite two-player zero-sum games in mixed strategies: payoffs, guaranteed
// payoffs, the excess-response self-map whose fixed points are exactly the
// equilibria, and the solver built on the fixed-point engine.

#ifndef FIXMAX_GAME_HPP
#define FIXMAX_GAME_HPP

#include <cstdint>
#include <vector>

#include "fixmax/engine.hpp"
#include "fixmax/errors.hpp"
#include "fixmax/kernels.hpp"
#include "fixmax/simplex.hpp"

namespace fixmax {

// Row player's payoff matrix M; the column player receives -M.
struct ZeroSumGame {
  int rows = 0;
  int cols = 0;
  std::vector<double> payoffs;  // row-major, rows*cols entries, all finite

  static ZeroSumGame from_rows(const std::vector<std::vector<double>>& data);

  double at(int i, int j) const {
    return payoffs[static_cast<std::size_t>(i) * cols + j];
  }
  kernels::GameView view() const {
    return kernels::GameView{rows, cols, payoffs.data()};
  }
  double max_abs_payoff() const;
};

// Total positive payoff excesses at a profile: how much the best pure rows
// exceed the expected payoff, and how much the best pure columns undercut it.
// Both vanish exactly at equilibria.
struct ExcessPair {
  double row_excess = 0.0;  // lambda
  double col_excess = 0.0;  // lambda_prime
};

struct DualityCheck {
  double v_a = 0.0;  // guaranteed payoff of the row player at p
  double v_b = 0.0;  // guaranteed payoff of the column player at q
  double gap = 0.0;  // v_b - v_a, nonnegative
};

struct EquilibriumResult {
  ProductPoint profile;
  double value = 0.0;
  double lambda = 0.0;
  double lambda_prime = 0.0;
  double v_a = 0.0;
  double v_b = 0.0;
  double duality_gap = 0.0;
  double residual = 0.0;
  double tol_lambda = 0.0;
  bool certified = false;
  RefinementTrace trace;
};

// The converged profile's excesses exceed the certification tolerance.
class EquilibriumNotCertified : public Error {
 public:
  explicit EquilibriumNotCertified(EquilibriumResult partial);

  EquilibriumResult partial;
};

struct SolveOptions {
  double epsilon_target = 1e-4;
  double delta_target = 1e-2;
  int max_stages = 46;
  std::int64_t base_mesh = kDefaultBaseMesh;
  int max_refinements = kDefaultMaxRefinements;
  MetricConfig metric;
};

// M(p, q) = sum_i sum_j p_i M(i,j) q_j
double expected_payoff(const ZeroSumGame& g, const ProductPoint& x);

// M(a_i, q) and M(p, b_j)
double payoff_row_pure(const ZeroSumGame& g, int i, const MixedStrategy& q);
double payoff_col_pure(const ZeroSumGame& g, const MixedStrategy& p, int j);

// v_A(p) = min_j M(p, b_j); v_B(q) = max_i M(a_i, q). Bilinearity puts the
// inf/sup over the opponent's simplex at a vertex.
double guaranteed_payoff_a(const ZeroSumGame& g, const MixedStrategy& p);
double guaranteed_payoff_b(const ZeroSumGame& g, const MixedStrategy& q);

// The excess-response self-map of P x Q: each player's weight on a pure
// strategy grows with that strategy's positive payoff excess over the current
// expected payoff, then renormalizes. Outputs always satisfy the simplex
// invariants (the denominators are 1 + total excess).
MapUnderTest excess_response_map(const ZeroSumGame& g);

ExcessPair total_excess(const ZeroSumGame& g, const ProductPoint& x);

// Pointwise weak duality: gap >= 0 for every (p, q).
DualityCheck check_duality(const ZeroSumGame& g, const MixedStrategy& p,
                           const MixedStrategy& q);

// Certification tolerance: unit-free in the payoff scale.
double certification_tolerance(const ZeroSumGame& g);

// Refines the excess-response map to a fixed point and certifies it by the
// excesses: success requires lambda, lambda_prime <= 1e-6 * (1 + max|M|).
// The epsilon schedule keeps halving past epsilon_target until the
// certificate passes or max_stages run out (then EquilibriumNotCertified).
EquilibriumResult solve_game(const ZeroSumGame& g, const SolveOptions& opts = {});

// Sequential-uniqueness probe applied to the game's excess-response map.
UniquenessReport probe_equilibrium_uniqueness(
    const ZeroSumGame& g, double delta, const std::vector<double>& epsilons,
    std::int64_t mesh, const MetricConfig& cfg = {});

// Evaluates every report quantity at an arbitrary profile, without any
// certification requirement. The trace is left empty.
EquilibriumResult evaluate_profile(const ZeroSumGame& g,
                                   const ProductPoint& profile,
                                   const MetricConfig& cfg = {});

}  // namespace fixmax

#endif  // FIXMAX_GAME_HPP
