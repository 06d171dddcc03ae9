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

#include "fixmax/errors.hpp"
#include "kernels_internal.hpp"

namespace fixmax::kernels {

namespace {

Backend detect_backend() {
#if defined(FIXMAX_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return Backend::kAvx2;
#endif
  return Backend::kScalar;
}

Backend g_backend = detect_backend();

}  // namespace

bool avx2_supported() {
#if defined(FIXMAX_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend active_backend() { return g_backend; }

void set_backend(Backend backend) {
  if (backend == Backend::kAvx2 && !avx2_supported()) {
    throw InvalidArgument("AVX2 backend not available on this CPU");
  }
  g_backend = backend;
}

const char* backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

void residual_batch(const GameView& g, std::size_t count, const double* p_soa,
                    const double* q_soa, bool max_norm, double* out) {
#if defined(FIXMAX_HAVE_AVX2)
  if (g_backend == Backend::kAvx2) {
    avx2::residual_batch(g, count, p_soa, q_soa, max_norm, out);
    return;
  }
#endif
  scalar::residual_batch(g, count, p_soa, q_soa, max_norm, out);
}

double sweep_best_row_guarantee(const GameView& g, std::size_t count,
                                const double* p_soa) {
#if defined(FIXMAX_HAVE_AVX2)
  if (g_backend == Backend::kAvx2) {
    return avx2::sweep_best_row_guarantee(g, count, p_soa);
  }
#endif
  return scalar::sweep_best_row_guarantee(g, count, p_soa);
}

double sweep_best_col_guarantee(const GameView& g, std::size_t count,
                                const double* q_soa) {
#if defined(FIXMAX_HAVE_AVX2)
  if (g_backend == Backend::kAvx2) {
    return avx2::sweep_best_col_guarantee(g, count, q_soa);
  }
#endif
  return scalar::sweep_best_col_guarantee(g, count, q_soa);
}

double block_metric_max(int dim, const double* soa, std::size_t count,
                        std::size_t j0, std::size_t j1, const double* query,
                        bool max_norm) {
#if defined(FIXMAX_HAVE_AVX2)
  if (g_backend == Backend::kAvx2) {
    return avx2::block_metric_max(dim, soa, count, j0, j1, query, max_norm);
  }
#endif
  return scalar::block_metric_max(dim, soa, count, j0, j1, query, max_norm);
}

}  // namespace fixmax::kernels
