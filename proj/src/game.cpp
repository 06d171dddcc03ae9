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

#include "fixmax/game.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <utility>

namespace fixmax {

namespace {

void check_profile(const ZeroSumGame& g, const ProductPoint& x) {
  if (static_cast<int>(x.row.dim()) != g.rows ||
      static_cast<int>(x.col.dim()) != g.cols) {
    throw DimensionMismatch("profile dimensions do not match the game");
  }
}

// Stack scratch for small games, heap fallback above the batch limit.
struct Scratch {
  double stack[4 * kernels::kMaxBatchDim];
  std::vector<double> heap;

  double* get(int needed) {
    if (needed <= 4 * kernels::kMaxBatchDim) return stack;
    heap.resize(static_cast<std::size_t>(needed));
    return heap.data();
  }
};

}  // namespace

ZeroSumGame ZeroSumGame::from_rows(
    const std::vector<std::vector<double>>& data) {
  if (data.empty() || data.front().empty()) {
    throw InvalidArgument("payoff matrix must have at least one row and "
                          "one column");
  }
  ZeroSumGame g;
  g.rows = static_cast<int>(data.size());
  g.cols = static_cast<int>(data.front().size());
  g.payoffs.reserve(static_cast<std::size_t>(g.rows) * g.cols);
  for (const auto& row : data) {
    if (static_cast<int>(row.size()) != g.cols) {
      throw InvalidArgument("ragged payoff matrix");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw InvalidArgument("payoff entries must be finite");
      }
      g.payoffs.push_back(v);
    }
  }
  return g;
}

double ZeroSumGame::max_abs_payoff() const {
  double m = 0.0;
  for (double v : payoffs) {
    const double a = std::abs(v);
    m = a > m ? a : m;
  }
  return m;
}

double expected_payoff(const ZeroSumGame& g, const ProductPoint& x) {
  check_profile(g, x);
  Scratch s;
  double* row_vals = s.get(g.rows);
  kernels::row_payoffs(g.view(), x.col.weights.data(), row_vals);
  return kernels::dot_seq(x.row.weights.data(), row_vals, g.rows);
}

double payoff_row_pure(const ZeroSumGame& g, int i, const MixedStrategy& q) {
  if (i < 0 || i >= g.rows) throw InvalidArgument("row index out of range");
  if (static_cast<int>(q.dim()) != g.cols) {
    throw DimensionMismatch("column strategy does not match the game");
  }
  return kernels::dot_seq(g.payoffs.data() + static_cast<std::size_t>(i) * g.cols,
                          q.weights.data(), g.cols);
}

double payoff_col_pure(const ZeroSumGame& g, const MixedStrategy& p, int j) {
  if (j < 0 || j >= g.cols) throw InvalidArgument("column index out of range");
  if (static_cast<int>(p.dim()) != g.rows) {
    throw DimensionMismatch("row strategy does not match the game");
  }
  double acc = 0.0;
  for (int i = 0; i < g.rows; ++i) acc += p.weights[static_cast<std::size_t>(i)] * g.at(i, j);
  return acc;
}

double guaranteed_payoff_a(const ZeroSumGame& g, const MixedStrategy& p) {
  if (static_cast<int>(p.dim()) != g.rows) {
    throw DimensionMismatch("row strategy does not match the game");
  }
  Scratch s;
  double* col_vals = s.get(g.cols);
  kernels::col_payoffs(g.view(), p.weights.data(), col_vals);
  double worst = col_vals[0];
  for (int j = 1; j < g.cols; ++j) {
    worst = col_vals[j] < worst ? col_vals[j] : worst;
  }
  return worst;
}

double guaranteed_payoff_b(const ZeroSumGame& g, const MixedStrategy& q) {
  if (static_cast<int>(q.dim()) != g.cols) {
    throw DimensionMismatch("column strategy does not match the game");
  }
  Scratch s;
  double* row_vals = s.get(g.rows);
  kernels::row_payoffs(g.view(), q.weights.data(), row_vals);
  double best = row_vals[0];
  for (int i = 1; i < g.rows; ++i) {
    best = row_vals[i] > best ? row_vals[i] : best;
  }
  return best;
}

namespace {

// In-place Gaussian elimination with partial pivoting on a dense n x n
// system. Returns false when the pivot collapses.
bool solve_linear(std::vector<double> A, std::vector<double> b, int n,
                  std::vector<double>& out) {
  double scale = 0.0;
  for (double v : A) scale = std::abs(v) > scale ? std::abs(v) : scale;
  const double tiny = 1e-12 * (1.0 + scale);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(A[static_cast<std::size_t>(r) * n + col]) >
          std::abs(A[static_cast<std::size_t>(pivot) * n + col])) {
        pivot = r;
      }
    }
    if (std::abs(A[static_cast<std::size_t>(pivot) * n + col]) <= tiny) {
      return false;
    }
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(A[static_cast<std::size_t>(col) * n + c],
                  A[static_cast<std::size_t>(pivot) * n + c]);
      }
      std::swap(b[static_cast<std::size_t>(col)],
                b[static_cast<std::size_t>(pivot)]);
    }
    const double inv = 1.0 / A[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = A[static_cast<std::size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) {
        A[static_cast<std::size_t>(r) * n + c] -=
            f * A[static_cast<std::size_t>(col) * n + c];
      }
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  out.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c) {
      acc -= A[static_cast<std::size_t>(r) * n + c] * out[static_cast<std::size_t>(c)];
    }
    out[static_cast<std::size_t>(r)] = acc / A[static_cast<std::size_t>(r) * n + r];
  }
  return true;
}

// Solve the equalized-payoff system on the square support pair (I, J):
// every supported column payoff equals the value at p, every supported row
// payoff equals it at q, probabilities sum to one. A valid solution is the
// exact equilibrium whenever (I, J) is the true support.
bool solve_support_system(const kernels::GameView& g, const std::vector<int>& I,
                          const std::vector<int>& J, ProductPoint& out) {
  const int k = static_cast<int>(I.size());
  const int n = k + 1;
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sol;

  // unknowns: q over J, then the value
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      A[static_cast<std::size_t>(r) * n + c] = g.at(I[static_cast<std::size_t>(r)], J[static_cast<std::size_t>(c)]);
    }
    A[static_cast<std::size_t>(r) * n + k] = -1.0;
  }
  for (int c = 0; c < k; ++c) A[static_cast<std::size_t>(k) * n + c] = 1.0;
  b[static_cast<std::size_t>(k)] = 1.0;
  if (!solve_linear(A, b, n, sol)) return false;
  std::vector<double> q_vals(sol.begin(), sol.begin() + k);

  // unknowns: p over I, then the value
  std::fill(A.begin(), A.end(), 0.0);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      A[static_cast<std::size_t>(r) * n + c] = g.at(I[static_cast<std::size_t>(c)], J[static_cast<std::size_t>(r)]);
    }
    A[static_cast<std::size_t>(r) * n + k] = -1.0;
  }
  for (int c = 0; c < k; ++c) A[static_cast<std::size_t>(k) * n + c] = 1.0;
  if (!solve_linear(A, b, n, sol)) return false;

  auto assemble = [](int dim, const std::vector<int>& support,
                     const double* vals, std::vector<double>& weights) {
    weights.assign(static_cast<std::size_t>(dim), 0.0);
    double sum = 0.0;
    for (std::size_t c = 0; c < support.size(); ++c) {
      double w = vals[c];
      if (w < -1e-6) return false;  // infeasible support
      if (w < 0.0) w = 0.0;
      weights[static_cast<std::size_t>(support[c])] = w;
      sum += w;
    }
    if (!(std::abs(sum - 1.0) <= 1e-6)) return false;
    for (double& w : weights) w /= sum;
    return true;
  };
  ProductPoint cand;
  if (!assemble(g.rows, I, sol.data(), cand.row.weights)) return false;
  if (!assemble(g.cols, J, q_vals.data(), cand.col.weights)) return false;
  out = std::move(cand);
  return true;
}

// Candidate equilibria read off a point's local payoff data: for a ladder of
// thresholds, take the rows within thr of the best row payoff and the
// columns within thr of the best column reply, trim to a square support
// pair, and solve it.
std::vector<ProductPoint> support_suggestions(const kernels::GameView& g,
                                              double payoff_scale,
                                              const ProductPoint& x) {
  std::vector<ProductPoint> out;
  double row_vals[kernels::kMaxBatchDim];
  double col_vals[kernels::kMaxBatchDim];
  kernels::row_payoffs(g, x.col.weights.data(), row_vals);
  kernels::col_payoffs(g, x.row.weights.data(), col_vals);
  double best_row = row_vals[0], best_col = col_vals[0];
  for (int i = 1; i < g.rows; ++i) {
    best_row = row_vals[i] > best_row ? row_vals[i] : best_row;
  }
  for (int j = 1; j < g.cols; ++j) {
    best_col = col_vals[j] < best_col ? col_vals[j] : best_col;
  }

  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (double tau : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double thr = tau * payoff_scale;
    std::vector<int> I, J;
    for (int i = 0; i < g.rows; ++i) {
      if (row_vals[i] >= best_row - thr) I.push_back(i);
    }
    for (int j = 0; j < g.cols; ++j) {
      if (col_vals[j] <= best_col + thr) J.push_back(j);
    }
    const std::size_t k = std::min(I.size(), J.size());
    if (k == 0) continue;
    auto trim = [k](std::vector<int>& idx, const double* vals, bool descending) {
      if (idx.size() == k) return;
      std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (vals[a] != vals[b]) {
          return descending ? vals[a] > vals[b] : vals[a] < vals[b];
        }
        return a < b;
      });
      idx.resize(k);
      std::sort(idx.begin(), idx.end());
    };
    trim(I, row_vals, /*descending=*/true);
    trim(J, col_vals, /*descending=*/false);

    std::uint64_t mask_i = 0, mask_j = 0;
    for (int i : I) mask_i |= std::uint64_t{1} << i;
    for (int j : J) mask_j |= std::uint64_t{1} << j;
    if (!seen.insert({mask_i, mask_j}).second) continue;

    ProductPoint cand;
    if (solve_support_system(g, I, J, cand)) {
      out.push_back(std::move(cand));
    }
  }
  return out;
}

}  // namespace

MapUnderTest excess_response_map(const ZeroSumGame& g) {
  if (g.rows < 1 || g.cols < 1 ||
      g.payoffs.size() != static_cast<std::size_t>(g.rows) * g.cols) {
    throw InvalidArgument("malformed game");
  }
  auto data = std::make_shared<const std::vector<double>>(g.payoffs);
  const int m = g.rows;
  const int n = g.cols;

  MapUnderTest map;
  map.rows = m;
  map.cols = n;
  map.apply = [data, m, n](const double* p, const double* q, double* p_out,
                           double* q_out) {
    const kernels::GameView view{m, n, data->data()};
    double e, lr, lc;
    if (m <= kernels::kMaxBatchDim && n <= kernels::kMaxBatchDim) {
      double rv[kernels::kMaxBatchDim], re[kernels::kMaxBatchDim];
      double cv[kernels::kMaxBatchDim], ce[kernels::kMaxBatchDim];
      kernels::excess_response_one(view, p, q, rv, cv, re, ce, p_out, q_out,
                                   &e, &lr, &lc);
    } else {
      std::vector<double> rv(static_cast<std::size_t>(m));
      std::vector<double> re(static_cast<std::size_t>(m));
      std::vector<double> cv(static_cast<std::size_t>(n));
      std::vector<double> ce(static_cast<std::size_t>(n));
      kernels::excess_response_one(view, p, q, rv.data(), cv.data(), re.data(),
                                   ce.data(), p_out, q_out, &e, &lr, &lc);
    }
  };
  if (m <= kernels::kMaxBatchDim && n <= kernels::kMaxBatchDim) {
    map.batch_residual = [data, m, n](std::size_t count, const double* p_soa,
                                      const double* q_soa, bool max_norm,
                                      double* out) {
      kernels::residual_batch(kernels::GameView{m, n, data->data()}, count,
                              p_soa, q_soa, max_norm, out);
    };
    const double scale = 1.0 + g.max_abs_payoff();
    map.suggest = [data, m, n, scale](const ProductPoint& x) {
      return support_suggestions(kernels::GameView{m, n, data->data()}, scale,
                                 x);
    };
  }
  return map;
}

ExcessPair total_excess(const ZeroSumGame& g, const ProductPoint& x) {
  check_profile(g, x);
  Scratch s;
  double* row_vals = s.get(2 * (g.rows + g.cols));
  double* row_ex = row_vals + g.rows;
  double* col_vals = row_ex + g.rows;
  double* col_ex = col_vals + g.cols;
  const kernels::GameView view = g.view();
  kernels::row_payoffs(view, x.col.weights.data(), row_vals);
  const double e = kernels::dot_seq(x.row.weights.data(), row_vals, g.rows);
  ExcessPair out;
  out.row_excess = kernels::excess_above(row_vals, g.rows, e, row_ex);
  kernels::col_payoffs(view, x.row.weights.data(), col_vals);
  out.col_excess = kernels::excess_below(col_vals, g.cols, e, col_ex);
  return out;
}

DualityCheck check_duality(const ZeroSumGame& g, const MixedStrategy& p,
                           const MixedStrategy& q) {
  DualityCheck out;
  out.v_a = guaranteed_payoff_a(g, p);
  out.v_b = guaranteed_payoff_b(g, q);
  out.gap = out.v_b - out.v_a;
  return out;
}

double certification_tolerance(const ZeroSumGame& g) {
  return 1e-6 * (1.0 + g.max_abs_payoff());
}

EquilibriumNotCertified::EquilibriumNotCertified(EquilibriumResult partial_)
    : Error("equilibrium certificate failed: excesses " +
            std::to_string(partial_.lambda) + ", " +
            std::to_string(partial_.lambda_prime) + " exceed tolerance " +
            std::to_string(partial_.tol_lambda)),
      partial(std::move(partial_)) {}

namespace {

EquilibriumResult build_result(const ZeroSumGame& g, ProductPoint profile,
                               double profile_residual, RefinementTrace trace,
                               double tol) {
  EquilibriumResult r;
  r.profile = std::move(profile);
  r.value = expected_payoff(g, r.profile);
  const ExcessPair ex = total_excess(g, r.profile);
  r.lambda = ex.row_excess;
  r.lambda_prime = ex.col_excess;
  const DualityCheck dc = check_duality(g, r.profile.row, r.profile.col);
  r.v_a = dc.v_a;
  r.v_b = dc.v_b;
  r.duality_gap = dc.gap;
  r.residual = profile_residual;
  r.tol_lambda = tol;
  r.certified = r.lambda <= tol && r.lambda_prime <= tol;
  r.trace = std::move(trace);
  return r;
}

}  // namespace

EquilibriumResult solve_game(const ZeroSumGame& g, const SolveOptions& opts) {
  const MapUnderTest map = excess_response_map(g);
  const double tol = certification_tolerance(g);
  // Certification scans every candidate the stage holds: the residual argmin
  // is not always the best-certified point. Once some candidate certifies,
  // a few more stages chase excesses down to the polish goal (the game value
  // is only pinned to within max(lambda, lambda') of truth); these stages
  // are nearly free when the search already sits in the final basin.
  const double polish_goal = 1e-7 * (1.0 + g.max_abs_payoff());

  auto selector = [&](const std::vector<ApproxFixedPoint>& candidates,
                      bool final_call) -> int {
    int best_certified = -1;
    double best_excess = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const ExcessPair ex = total_excess(g, candidates[k].point);
      if (!(ex.row_excess <= tol && ex.col_excess <= tol)) continue;
      const double sum = ex.row_excess + ex.col_excess;
      if (sum <= polish_goal) return static_cast<int>(k);
      if (sum < best_excess) {
        best_excess = sum;
        best_certified = static_cast<int>(k);
      }
    }
    return final_call ? best_certified : -1;
  };
  engine_detail::ScheduleResult sched = engine_detail::refine_schedule(
      map, opts.epsilon_target, opts.delta_target, opts.max_stages,
      opts.metric, opts.base_mesh, opts.max_refinements, selector);

  ProductPoint profile = sched.selected ? sched.selected->point
                                        : sched.trace.final_point;
  const double profile_residual =
      sched.selected ? sched.selected->residual
                     : (sched.trace.iterates.empty()
                            ? residual(map, profile, opts.metric)
                            : sched.trace.iterates.back().residual);
  EquilibriumResult result =
      build_result(g, std::move(profile), profile_residual,
                   std::move(sched.trace), tol);
  if (!result.certified) {
    throw EquilibriumNotCertified(std::move(result));
  }
  return result;
}

UniquenessReport probe_equilibrium_uniqueness(const ZeroSumGame& g,
                                              double delta,
                                              const std::vector<double>& epsilons,
                                              std::int64_t mesh,
                                              const MetricConfig& cfg) {
  return probe_sequential_uniqueness(excess_response_map(g), delta, epsilons,
                                     mesh, cfg);
}

EquilibriumResult evaluate_profile(const ZeroSumGame& g,
                                   const ProductPoint& profile,
                                   const MetricConfig& cfg) {
  check_profile(g, profile);
  RefinementTrace trace;
  trace.final_point = profile;
  const double res = residual(excess_response_map(g), profile, cfg);
  return build_result(g, profile, res, std::move(trace),
                      certification_tolerance(g));
}

}  // namespace fixmax
