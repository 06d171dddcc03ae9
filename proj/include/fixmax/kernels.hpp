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
// Arithmetic kernels behind the solver's hot loops, with a scalar reference
// implementation and an AVX2 variant selected at runtime. Both variants are
// bit-identical by construction: SIMD lanes hold independent candidates, every
// per-candidate operation runs in the same order as the scalar code, and all
// translation units are built with -ffp-contract=off so no path fuses
// multiply-adds. The inline functions below define the reference semantics.

#ifndef FIXMAX_KERNELS_HPP
#define FIXMAX_KERNELS_HPP

#include <cmath>
#include <cstddef>

namespace fixmax::kernels {

// Payoff matrix view, row-major: payoffs[i * cols + j].
struct GameView {
  int rows = 0;
  int cols = 0;
  const double* payoffs = nullptr;

  double at(int i, int j) const { return payoffs[i * cols + j]; }
};

// Batch kernels keep per-strategy accumulators on the stack up to this
// dimension; larger games take the generic per-point path in the engine.
inline constexpr int kMaxBatchDim = 32;

enum class Backend { kScalar, kAvx2 };

Backend active_backend();
// Force a backend (tests); throws InvalidArgument if unavailable on this CPU.
void set_backend(Backend backend);
bool avx2_supported();
const char* backend_name(Backend backend);

// ---------------------------------------------------------------------------
// Canonical single-point reference semantics (inline, shared by scalar batch
// kernels and by every cold path in the library).

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline double dot_seq(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// out[i] = sum_j M[i][j] * q[j]
inline void row_payoffs(const GameView& g, const double* q, double* out) {
  for (int i = 0; i < g.rows; ++i) {
    out[i] = dot_seq(g.payoffs + static_cast<std::size_t>(i) * g.cols, q,
                     g.cols);
  }
}

// out[j] = sum_i p[i] * M[i][j]
inline void col_payoffs(const GameView& g, const double* p, double* out) {
  for (int j = 0; j < g.cols; ++j) {
    double acc = 0.0;
    for (int i = 0; i < g.rows; ++i) acc += p[i] * g.at(i, j);
    out[j] = acc;
  }
}

// out[i] = max(vals[i] - pivot, 0); returns the total.
inline double excess_above(const double* vals, int n, double pivot,
                           double* out) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = positive_part(vals[i] - pivot);
    total += out[i];
  }
  return total;
}

// out[i] = max(pivot - vals[i], 0); returns the total.
inline double excess_below(const double* vals, int n, double pivot,
                           double* out) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = positive_part(pivot - vals[i]);
    total += out[i];
  }
  return total;
}

// out[i] = (base[i] + excess[i]) * inv_denom
inline void boost_normalize(const double* base, const double* excess, int n,
                            double inv_denom, double* out) {
  for (int i = 0; i < n; ++i) out[i] = (base[i] + excess[i]) * inv_denom;
}

inline double sumsq_diff(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double maxabs_diff(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(a[i] - b[i]);
    acc = d > acc ? d : acc;
  }
  return acc;
}

// Excess-response update at one profile. `row_vals`/`col_vals` receive the
// pure-strategy payoffs, `row_ex`/`col_ex` the positive excesses; writes the
// boosted, renormalized profile into p_out/q_out. Returns nothing extra: the
// totals land in *row_total / *col_total.
inline void excess_response_one(const GameView& g, const double* p,
                                const double* q, double* row_vals,
                                double* col_vals, double* row_ex,
                                double* col_ex, double* p_out, double* q_out,
                                double* expected, double* row_total,
                                double* col_total) {
  row_payoffs(g, q, row_vals);
  const double e = dot_seq(p, row_vals, g.rows);
  const double lr = excess_above(row_vals, g.rows, e, row_ex);
  col_payoffs(g, p, col_vals);
  const double lc = excess_below(col_vals, g.cols, e, col_ex);
  boost_normalize(p, row_ex, g.rows, 1.0 / (1.0 + lr), p_out);
  boost_normalize(q, col_ex, g.cols, 1.0 / (1.0 + lc), q_out);
  *expected = e;
  *row_total = lr;
  *col_total = lc;
}

// Distance from (p,q) to its excess-response image; the quantity the grid
// sweeps minimize. Caller provides scratch of size >= 4*rows + 4*cols.
inline double excess_response_residual_one(const GameView& g, const double* p,
                                           const double* q, bool max_norm,
                                           double* scratch) {
  double* row_vals = scratch;
  double* row_ex = row_vals + g.rows;
  double* p_out = row_ex + g.rows;
  double* col_vals = p_out + g.rows;
  double* col_ex = col_vals + g.cols;
  double* q_out = col_ex + g.cols;
  double e, lr, lc;
  excess_response_one(g, p, q, row_vals, col_vals, row_ex, col_ex, p_out,
                      q_out, &e, &lr, &lc);
  if (max_norm) {
    const double a = maxabs_diff(p_out, p, g.rows);
    const double b = maxabs_diff(q_out, q, g.cols);
    return b > a ? b : a;
  }
  return std::sqrt(sumsq_diff(p_out, p, g.rows) +
                   sumsq_diff(q_out, q, g.cols));
}

// Metric between the cloud point at column `j` and `query` (squared for the
// Euclidean norm). Cloud layout is coordinate-major: coord d of point j sits
// at soa[d * count + j].
inline double pair_metric(int dim, const double* soa, std::size_t count,
                          std::size_t j, const double* query, bool max_norm) {
  double acc = 0.0;
  if (max_norm) {
    for (int d = 0; d < dim; ++d) {
      const double diff =
          std::abs(soa[static_cast<std::size_t>(d) * count + j] - query[d]);
      acc = diff > acc ? diff : acc;
    }
    return acc;
  }
  for (int d = 0; d < dim; ++d) {
    const double diff = soa[static_cast<std::size_t>(d) * count + j] - query[d];
    acc += diff * diff;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Dispatched batch kernels. Candidate layout is coordinate-major (SoA):
// p_soa[i * count + c] is row-weight i of candidate c.

// out[c] = excess-response residual of candidate c. Requires
// rows, cols <= kMaxBatchDim.
void residual_batch(const GameView& g, std::size_t count, const double* p_soa,
                    const double* q_soa, bool max_norm, double* out);

// max over candidates of (min_j col_payoff_j): the lower minimax bound the
// row player can guarantee on this candidate set.
double sweep_best_row_guarantee(const GameView& g, std::size_t count,
                                const double* p_soa);

// min over candidates of (max_i row_payoff_i): the upper bound from the
// column player's side.
double sweep_best_col_guarantee(const GameView& g, std::size_t count,
                                const double* q_soa);

// max over cloud columns [j0, j1) of pair_metric(dim, soa, count, j, query).
double block_metric_max(int dim, const double* soa, std::size_t count,
                        std::size_t j0, std::size_t j1, const double* query,
                        bool max_norm);

}  // namespace fixmax::kernels

#endif  // FIXMAX_KERNELS_HPP
