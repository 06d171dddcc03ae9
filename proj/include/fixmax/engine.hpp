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
// Approximate-fixed-point search for uniformly continuous self-maps of a
// product of two simplices, refinement of approximate fixed points along a
// halving tolerance schedule, and an empirical probe of the
// sequential-uniqueness hypothesis (all residual sets computed on grids).

#ifndef FIXMAX_ENGINE_HPP
#define FIXMAX_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fixmax/errors.hpp"
#include "fixmax/simplex.hpp"

namespace fixmax {

// A self-map of a product simplex under study. `apply` must be deterministic,
// side-effect-free, and return valid simplex weights; it is safe to call from
// several threads at once. `batch_residual`, when set, evaluates the
// fixed-point residual of many candidates in one call (coordinate-major SoA
// layout, see kernels.hpp) and must agree bit-for-bit with the per-point path.
struct MapUnderTest {
  int rows = 0;
  int cols = 0;
  std::function<void(const double* p, const double* q, double* p_out,
                     double* q_out)>
      apply;
  std::function<void(std::size_t count, const double* p_soa,
                     const double* q_soa, bool max_norm, double* out)>
      batch_residual;
  // Optional: candidate fixed points near a given point. The search snaps
  // suggestions to its grid and scores them like any other candidate, so a
  // wrong suggestion costs nothing and a good one accelerates convergence in
  // ill-conditioned residual valleys.
  std::function<std::vector<ProductPoint>(const ProductPoint&)> suggest;

  // Convenience wrapper; validates the output simplex invariants in debug
  // builds.
  ProductPoint evaluate(const ProductPoint& x) const;
};

// A certified approximate fixed point: residual < epsilon_requested.
struct ApproxFixedPoint {
  ProductPoint point;
  double residual = 0.0;
  double epsilon_requested = 0.0;
};

// History of a refinement run along a strictly decreasing epsilon schedule.
// cauchy_moduli[k] is the max pairwise distance among iterates k..end.
struct RefinementTrace {
  std::vector<ApproxFixedPoint> iterates;
  std::vector<double> epsilon_schedule;
  std::vector<double> cauchy_moduli;
  bool converged = false;
  ProductPoint final_point;
};

enum class UniquenessVerdict { kConsistent, kViolated, kInconclusive };

// One row of the uniqueness probe: the near-fixed-point set S_eps on the
// grid, its diameter, and the pair of members attaining it. An empty S_eps
// has diameter 0 and carries the minimum-residual grid point as witness.
struct SeparationRow {
  double epsilon = 0.0;
  double diameter = 0.0;
  ProductPoint witness_a;
  ProductPoint witness_b;
  std::int64_t member_count = 0;
};

struct UniquenessReport {
  double delta = 0.0;
  std::int64_t mesh = 0;  // grid resolution the diameters were measured on
  std::vector<SeparationRow> rows;
  UniquenessVerdict verdict = UniquenessVerdict::kInconclusive;
};

// Bounded search ended with every incumbent's residual still >= epsilon.
// Signals either an insufficient budget or a map violating the continuity
// contract; carries the best incumbent found.
class NoApproxFixedPointFound : public Error {
 public:
  NoApproxFixedPointFound(ProductPoint best_point, double best_residual,
                          double epsilon);

  ProductPoint best_point;
  double best_residual;
  double epsilon;
};

// The stage budget ran out before the epsilon schedule reached its target.
class BudgetExhausted : public Error {
 public:
  explicit BudgetExhausted(RefinementTrace partial);

  RefinementTrace partial;
};

inline constexpr std::int64_t kDefaultBaseMesh = 16;
inline constexpr int kDefaultMaxRefinements = 36;
// Meshes past 2^40 place grid points closer than residual evaluation can
// resolve in double precision; refinement stops doubling there.
inline constexpr std::int64_t kMaxMesh = std::int64_t{1} << 40;

// distance(x, F(x)): zero exactly at fixed points.
double residual(const MapUnderTest& F, const ProductPoint& x,
                const MetricConfig& cfg = {});

// Grid-argmin search: sweep the full product grid at base_mesh, then refine
// on local windows around the incumbents at doubled mesh and halved radius
// until the residual drops below epsilon. The search keeps one incumbent per
// simplex face and polls windows until stable before each mesh doubling, so
// boundary-supported fixed points survive coarse stages and incumbents can
// walk shallow residual valleys. max_refinements bounds the number of mesh
// doublings. Deterministic (lexicographic tie-break on numerator lists).
// Throws NoApproxFixedPointFound when the budget runs out.
ApproxFixedPoint find_approx_fixed_point(const MapUnderTest& F, double epsilon,
                                         std::int64_t base_mesh,
                                         int max_refinements,
                                         const MetricConfig& cfg = {});

// Runs find_approx_fixed_point along epsilon_n = 2^-n until epsilon_n falls
// below epsilon_target. converged additionally requires the last two iterates
// to lie within delta_target of each other. Throws BudgetExhausted if
// max_stages run out first.
RefinementTrace refine_to_fixed_point(
    const MapUnderTest& F, double epsilon_target, double delta_target,
    int max_stages, const MetricConfig& cfg = {},
    std::int64_t base_mesh = kDefaultBaseMesh,
    int max_refinements = kDefaultMaxRefinements);

// For each epsilon (strictly decreasing), measures the diameter of the grid
// set S_eps = {x : residual(x) < eps}. Verdicts: consistent when diameters
// shrink below delta, violated when they stagnate above it, inconclusive
// otherwise.
UniquenessReport probe_sequential_uniqueness(
    const MapUnderTest& F, double delta, const std::vector<double>& epsilons,
    std::int64_t mesh, const MetricConfig& cfg = {});

namespace engine_detail {

// Shared schedule driver. Stages stop once epsilon_n < epsilon_target and
// (if set) the selector accepts one of the candidates; `stop_satisfied`
// reports whether that happened within the budgets. The trace always records
// the per-stage residual argmin; an accepted candidate is returned alongside
// in `selected`.
struct ScheduleResult {
  RefinementTrace trace;
  bool stop_satisfied = false;
  std::optional<ApproxFixedPoint> selected;
};

// Offered every candidate the search holds with residual below
// epsilon_target, best residual first, once per stage past the target.
// Returns the index to accept (the schedule stops and the pick is reported
// as `selected`) or -1 to refine further. When the schedule cannot refine
// any more (stage budget or grid resolution exhausted) the selector is
// consulted once more with final_call = true. Scanning the whole list
// matters: the residual argmin is not always the best-certified point when
// residual valleys flatten faster than the certificate.
using StageSelector =
    std::function<int(const std::vector<ApproxFixedPoint>&, bool final_call)>;

ScheduleResult refine_schedule(const MapUnderTest& F, double epsilon_target,
                               double delta_target, int max_stages,
                               const MetricConfig& cfg, std::int64_t base_mesh,
                               int max_refinements,
                               const StageSelector& selector);

}  // namespace engine_detail

}  // namespace fixmax

#endif  // FIXMAX_ENGINE_HPP
