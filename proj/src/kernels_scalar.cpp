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
// Scalar reference kernels. Each candidate is processed with exactly the
// arithmetic sequence defined by the inline reference functions; the AVX2
// variants replay the same sequence four candidates at a time.

#include <limits>

#include "kernels_internal.hpp"

namespace fixmax::kernels::scalar {

void residual_batch(const GameView& g, std::size_t count, const double* p_soa,
                    const double* q_soa, bool max_norm, double* out) {
  const int m = g.rows;
  const int n = g.cols;
  double p[kMaxBatchDim];
  double q[kMaxBatchDim];
  double scratch[8 * kMaxBatchDim];
  for (std::size_t c = 0; c < count; ++c) {
    for (int i = 0; i < m; ++i) p[i] = p_soa[static_cast<std::size_t>(i) * count + c];
    for (int j = 0; j < n; ++j) q[j] = q_soa[static_cast<std::size_t>(j) * count + c];
    out[c] = excess_response_residual_one(g, p, q, max_norm, scratch);
  }
}

double sweep_best_row_guarantee(const GameView& g, std::size_t count,
                                const double* p_soa) {
  const int m = g.rows;
  const int n = g.cols;
  double p[kMaxBatchDim];
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < count; ++c) {
    for (int i = 0; i < m; ++i) p[i] = p_soa[static_cast<std::size_t>(i) * count + c];
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += p[i] * g.at(i, j);
      worst = acc < worst ? acc : worst;
    }
    best = worst > best ? worst : best;
  }
  return best;
}

double sweep_best_col_guarantee(const GameView& g, std::size_t count,
                                const double* q_soa) {
  const int m = g.rows;
  const int n = g.cols;
  double q[kMaxBatchDim];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < count; ++c) {
    for (int j = 0; j < n; ++j) q[j] = q_soa[static_cast<std::size_t>(j) * count + c];
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double acc =
          dot_seq(g.payoffs + static_cast<std::size_t>(i) * g.cols, q, n);
      worst = acc > worst ? acc : worst;
    }
    best = worst < best ? worst : best;
  }
  return best;
}

double block_metric_max(int dim, const double* soa, std::size_t count,
                        std::size_t j0, std::size_t j1, const double* query,
                        bool max_norm) {
  double best = 0.0;
  for (std::size_t j = j0; j < j1; ++j) {
    const double d = pair_metric(dim, soa, count, j, query, max_norm);
    best = d > best ? d : best;
  }
  return best;
}

}  // namespace fixmax::kernels::scalar
