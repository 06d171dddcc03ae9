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
// AVX2 kernels. Four candidates ride in the four lanes of a __m256d; within a
// lane every operation happens in the same order as the scalar reference, so
// results are bit-identical to kernels::scalar (this TU is also built with
// -ffp-contract=off; mul and add stay separate instructions).

#include <limits>

#include "kernels_internal.hpp"

#if defined(FIXMAX_HAVE_AVX2)

#include <immintrin.h>

namespace fixmax::kernels::avx2 {

namespace {

// max(x, +0.0), matching the scalar `x > 0.0 ? x : 0.0` bit-for-bit:
// VMAXPD returns the second operand when inputs compare equal, so -0.0 maps
// to +0.0 exactly like the scalar branch.
inline __m256d positive_part4(__m256d x) {
  return _mm256_max_pd(x, _mm256_setzero_pd());
}

inline __m256d abs4(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

inline double reduce_max(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  double best = lanes[0];
  for (int i = 1; i < 4; ++i) best = lanes[i] > best ? lanes[i] : best;
  return best;
}

inline double reduce_min(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  double best = lanes[0];
  for (int i = 1; i < 4; ++i) best = lanes[i] < best ? lanes[i] : best;
  return best;
}

}  // namespace

void residual_batch(const GameView& g, std::size_t count, const double* p_soa,
                    const double* q_soa, bool max_norm, double* out) {
  const int m = g.rows;
  const int n = g.cols;
  const std::size_t main = count - count % 4;
  __m256d p[kMaxBatchDim];
  __m256d q[kMaxBatchDim];
  __m256d rx[kMaxBatchDim];  // row payoffs, then row excesses in place
  __m256d fx[kMaxBatchDim];  // column excesses
  const __m256d one = _mm256_set1_pd(1.0);

  for (std::size_t c = 0; c < main; c += 4) {
    for (int i = 0; i < m; ++i)
      p[i] = _mm256_loadu_pd(p_soa + static_cast<std::size_t>(i) * count + c);
    for (int j = 0; j < n; ++j)
      q[j] = _mm256_loadu_pd(q_soa + static_cast<std::size_t>(j) * count + c);

    for (int i = 0; i < m; ++i) {
      __m256d acc = _mm256_setzero_pd();
      const double* mrow = g.payoffs + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(mrow[j]), q[j]));
      rx[i] = acc;
    }
    __m256d expected = _mm256_setzero_pd();
    for (int i = 0; i < m; ++i)
      expected = _mm256_add_pd(expected, _mm256_mul_pd(p[i], rx[i]));

    __m256d row_total = _mm256_setzero_pd();
    for (int i = 0; i < m; ++i) {
      rx[i] = positive_part4(_mm256_sub_pd(rx[i], expected));
      row_total = _mm256_add_pd(row_total, rx[i]);
    }
    __m256d col_total = _mm256_setzero_pd();
    for (int j = 0; j < n; ++j) {
      __m256d acc = _mm256_setzero_pd();
      for (int i = 0; i < m; ++i)
        acc = _mm256_add_pd(acc,
                            _mm256_mul_pd(p[i], _mm256_set1_pd(g.at(i, j))));
      fx[j] = positive_part4(_mm256_sub_pd(expected, acc));
      col_total = _mm256_add_pd(col_total, fx[j]);
    }
    const __m256d invp = _mm256_div_pd(one, _mm256_add_pd(one, row_total));
    const __m256d invq = _mm256_div_pd(one, _mm256_add_pd(one, col_total));

    if (max_norm) {
      __m256d best = _mm256_setzero_pd();
      for (int i = 0; i < m; ++i) {
        const __m256d moved =
            _mm256_mul_pd(_mm256_add_pd(p[i], rx[i]), invp);
        best = _mm256_max_pd(abs4(_mm256_sub_pd(moved, p[i])), best);
      }
      for (int j = 0; j < n; ++j) {
        const __m256d moved =
            _mm256_mul_pd(_mm256_add_pd(q[j], fx[j]), invq);
        best = _mm256_max_pd(abs4(_mm256_sub_pd(moved, q[j])), best);
      }
      _mm256_storeu_pd(out + c, best);
    } else {
      // Two partial sums added at the end, matching the reference grouping
      // sqrt(sumsq(rows) + sumsq(cols)) bit-for-bit.
      __m256d acc_p = _mm256_setzero_pd();
      for (int i = 0; i < m; ++i) {
        const __m256d moved =
            _mm256_mul_pd(_mm256_add_pd(p[i], rx[i]), invp);
        const __m256d d = _mm256_sub_pd(moved, p[i]);
        acc_p = _mm256_add_pd(acc_p, _mm256_mul_pd(d, d));
      }
      __m256d acc_q = _mm256_setzero_pd();
      for (int j = 0; j < n; ++j) {
        const __m256d moved =
            _mm256_mul_pd(_mm256_add_pd(q[j], fx[j]), invq);
        const __m256d d = _mm256_sub_pd(moved, q[j]);
        acc_q = _mm256_add_pd(acc_q, _mm256_mul_pd(d, d));
      }
      _mm256_storeu_pd(out + c,
                       _mm256_sqrt_pd(_mm256_add_pd(acc_p, acc_q)));
    }
  }

  if (main < count) {
    double ps[kMaxBatchDim];
    double qs[kMaxBatchDim];
    double scratch[8 * kMaxBatchDim];
    for (std::size_t c = main; c < count; ++c) {
      for (int i = 0; i < m; ++i)
        ps[i] = p_soa[static_cast<std::size_t>(i) * count + c];
      for (int j = 0; j < n; ++j)
        qs[j] = q_soa[static_cast<std::size_t>(j) * count + c];
      out[c] = excess_response_residual_one(g, ps, qs, max_norm, scratch);
    }
  }
}

double sweep_best_row_guarantee(const GameView& g, std::size_t count,
                                const double* p_soa) {
  const int m = g.rows;
  const int n = g.cols;
  const std::size_t main = count - count % 4;
  __m256d p[kMaxBatchDim];
  __m256d best4 = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < main; c += 4) {
    for (int i = 0; i < m; ++i)
      p[i] = _mm256_loadu_pd(p_soa + static_cast<std::size_t>(i) * count + c);
    __m256d worst = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    for (int j = 0; j < n; ++j) {
      __m256d acc = _mm256_setzero_pd();
      for (int i = 0; i < m; ++i)
        acc = _mm256_add_pd(acc,
                            _mm256_mul_pd(p[i], _mm256_set1_pd(g.at(i, j))));
      worst = _mm256_min_pd(acc, worst);
    }
    best4 = _mm256_max_pd(worst, best4);
  }
  double best = main > 0 ? reduce_max(best4)
                         : -std::numeric_limits<double>::infinity();
  if (main < count) {
    double ps[kMaxBatchDim];
    for (std::size_t c = main; c < count; ++c) {
      for (int i = 0; i < m; ++i)
        ps[i] = p_soa[static_cast<std::size_t>(i) * count + c];
      double worst = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += ps[i] * g.at(i, j);
        worst = acc < worst ? acc : worst;
      }
      best = worst > best ? worst : best;
    }
  }
  return best;
}

double sweep_best_col_guarantee(const GameView& g, std::size_t count,
                                const double* q_soa) {
  const int m = g.rows;
  const int n = g.cols;
  const std::size_t main = count - count % 4;
  __m256d q[kMaxBatchDim];
  __m256d best4 = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < main; c += 4) {
    for (int j = 0; j < n; ++j)
      q[j] = _mm256_loadu_pd(q_soa + static_cast<std::size_t>(j) * count + c);
    __m256d worst = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (int i = 0; i < m; ++i) {
      __m256d acc = _mm256_setzero_pd();
      const double* mrow = g.payoffs + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(mrow[j]), q[j]));
      worst = _mm256_max_pd(acc, worst);
    }
    best4 = _mm256_min_pd(worst, best4);
  }
  double best = main > 0 ? reduce_min(best4)
                         : std::numeric_limits<double>::infinity();
  if (main < count) {
    double qs[kMaxBatchDim];
    for (std::size_t c = main; c < count; ++c) {
      for (int j = 0; j < n; ++j)
        qs[j] = q_soa[static_cast<std::size_t>(j) * count + c];
      double worst = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double acc =
            dot_seq(g.payoffs + static_cast<std::size_t>(i) * n, qs, n);
        worst = acc > worst ? acc : worst;
      }
      best = worst < best ? worst : best;
    }
  }
  return best;
}

double block_metric_max(int dim, const double* soa, std::size_t count,
                        std::size_t j0, std::size_t j1, const double* query,
                        bool max_norm) {
  double best = 0.0;
  std::size_t j = j0;
  const std::size_t main_end = j0 + (j1 - j0) / 4 * 4;
  if (main_end > j0) {
    __m256d best4 = _mm256_setzero_pd();
    for (; j < main_end; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      if (max_norm) {
        for (int d = 0; d < dim; ++d) {
          const __m256d pts =
              _mm256_loadu_pd(soa + static_cast<std::size_t>(d) * count + j);
          const __m256d diff =
              abs4(_mm256_sub_pd(pts, _mm256_set1_pd(query[d])));
          acc = _mm256_max_pd(diff, acc);
        }
      } else {
        for (int d = 0; d < dim; ++d) {
          const __m256d pts =
              _mm256_loadu_pd(soa + static_cast<std::size_t>(d) * count + j);
          const __m256d diff = _mm256_sub_pd(pts, _mm256_set1_pd(query[d]));
          acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
      }
      best4 = _mm256_max_pd(acc, best4);
    }
    best = reduce_max(best4);
  }
  for (; j < j1; ++j) {
    const double d = pair_metric(dim, soa, count, j, query, max_norm);
    best = d > best ? d : best;
  }
  return best;
}

}  // namespace fixmax::kernels::avx2

#endif  // FIXMAX_HAVE_AVX2
