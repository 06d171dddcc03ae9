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

#ifndef FIXMAX_KERNELS_INTERNAL_HPP
#define FIXMAX_KERNELS_INTERNAL_HPP

#include "fixmax/kernels.hpp"

namespace fixmax::kernels::scalar {

void residual_batch(const GameView& g, std::size_t count, const double* p_soa,
                    const double* q_soa, bool max_norm, double* out);
double sweep_best_row_guarantee(const GameView& g, std::size_t count,
                                const double* p_soa);
double sweep_best_col_guarantee(const GameView& g, std::size_t count,
                                const double* q_soa);
double block_metric_max(int dim, const double* soa, std::size_t count,
                        std::size_t j0, std::size_t j1, const double* query,
                        bool max_norm);

}  // namespace fixmax::kernels::scalar

#if defined(FIXMAX_HAVE_AVX2)
namespace fixmax::kernels::avx2 {

void residual_batch(const GameView& g, std::size_t count, const double* p_soa,
                    const double* q_soa, bool max_norm, double* out);
double sweep_best_row_guarantee(const GameView& g, std::size_t count,
                                const double* p_soa);
double sweep_best_col_guarantee(const GameView& g, std::size_t count,
                                const double* q_soa);
double block_metric_max(int dim, const double* soa, std::size_t count,
                        std::size_t j0, std::size_t j1, const double* query,
                        bool max_norm);

}  // namespace fixmax::kernels::avx2
#endif  // FIXMAX_HAVE_AVX2

#endif  // FIXMAX_KERNELS_INTERNAL_HPP
