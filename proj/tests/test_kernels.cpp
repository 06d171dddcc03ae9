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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "fixmax/kernels.hpp"
#include "test_util.hpp"

using namespace fixmax;
namespace k = fixmax::kernels;

namespace {

struct SoaBatch {
  std::size_t count = 0;
  std::vector<double> p_soa;
  std::vector<double> q_soa;
};

SoaBatch random_batch(std::mt19937_64& r, int m, int n, std::size_t count) {
  SoaBatch b;
  b.count = count;
  b.p_soa.resize(static_cast<std::size_t>(m) * count);
  b.q_soa.resize(static_cast<std::size_t>(n) * count);
  for (std::size_t c = 0; c < count; ++c) {
    const MixedStrategy p = testutil::random_mixed(r, m);
    const MixedStrategy q = testutil::random_mixed(r, n);
    for (int i = 0; i < m; ++i)
      b.p_soa[static_cast<std::size_t>(i) * count + c] = p.weights[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j)
      b.q_soa[static_cast<std::size_t>(j) * count + c] = q.weights[static_cast<std::size_t>(j)];
  }
  return b;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("reference payoff helpers on a known matrix") {
  const ZeroSumGame g = testutil::matching_pennies();
  const k::GameView view = g.view();
  const double q[2] = {0.75, 0.25};
  double rows[2];
  k::row_payoffs(view, q, rows);
  CHECK(rows[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rows[1] == doctest::Approx(-0.5).epsilon(1e-15));

  const double p[2] = {0.75, 0.25};
  double cols[2];
  k::col_payoffs(view, p, cols);
  CHECK(cols[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cols[1] == doctest::Approx(-0.5).epsilon(1e-15));

  CHECK(k::dot_seq(p, rows, 2) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("excess response at a pure matching-pennies profile") {
  const ZeroSumGame g = testutil::matching_pennies();
  const double p[2] = {1.0, 0.0};
  const double q[2] = {1.0, 0.0};
  double rv[2], cv[2], re[2], ce[2], p_out[2], q_out[2];
  double e, lr, lc;
  k::excess_response_one(g.view(), p, q, rv, cv, re, ce, p_out, q_out, &e,
                         &lr, &lc);
  CHECK(e == 1.0);
  CHECK(lr == 0.0);
  CHECK(lc == 2.0);
  CHECK(p_out[0] == 1.0);
  CHECK(p_out[1] == 0.0);
  CHECK(q_out[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(q_out[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  double scratch[8 * k::kMaxBatchDim];
  const double res = k::excess_response_residual_one(g.view(), p, q, false,
                                                     scratch);
  CHECK(res == doctest::Approx(std::sqrt(8.0 / 9.0)).epsilon(1e-15));
}

TEST_CASE("positive part matches the SIMD max convention on signed zero") {
  CHECK(k::positive_part(-0.0) == 0.0);
  CHECK(!std::signbit(k::positive_part(-0.0)));
  CHECK(k::positive_part(3.5) == 3.5);
  CHECK(k::positive_part(-2.0) == 0.0);
}

TEST_CASE("scalar batch equals the single-point reference bit for bit") {
  auto r = testutil::rng(11);
  for (int m : {1, 2, 3, 4, 7}) {
    for (int n : {1, 2, 5}) {
      const ZeroSumGame g = testutil::random_int_game(r, m, n);
      const SoaBatch b = random_batch(r, m, n, 37);
      for (bool max_norm : {false, true}) {
        std::vector<double> batch(b.count);
        k::set_backend(k::Backend::kScalar);
        k::residual_batch(g.view(), b.count, b.p_soa.data(), b.q_soa.data(),
                          max_norm, batch.data());
        double pv[k::kMaxBatchDim], qv[k::kMaxBatchDim];
        double scratch[8 * k::kMaxBatchDim];
        for (std::size_t c = 0; c < b.count; ++c) {
          for (int i = 0; i < m; ++i)
            pv[i] = b.p_soa[static_cast<std::size_t>(i) * b.count + c];
          for (int j = 0; j < n; ++j)
            qv[j] = b.q_soa[static_cast<std::size_t>(j) * b.count + c];
          const double one = k::excess_response_residual_one(
              g.view(), pv, qv, max_norm, scratch);
          CHECK(batch[c] == one);
        }
      }
    }
  }
}

TEST_CASE("avx2 kernels are bit-identical to the scalar reference") {
  if (!k::avx2_supported()) {
    MESSAGE("AVX2 not available; dispatch stays on the scalar backend");
    CHECK(k::active_backend() == k::Backend::kScalar);
    return;
  }
  auto r = testutil::rng(12);
  // counts cover the remainder lanes 0..3 and a few full blocks
  const std::size_t counts[] = {1, 2, 3, 4, 5, 7, 8, 63, 64, 1003};
  for (int m : {1, 2, 3, 4, 6}) {
    for (int n : {1, 2, 4, 9}) {
      const ZeroSumGame g = testutil::random_int_game(r, m, n);
      for (std::size_t count : counts) {
        const SoaBatch b = random_batch(r, m, n, count);
        for (bool max_norm : {false, true}) {
          std::vector<double> scalar_out(count), avx_out(count);
          k::set_backend(k::Backend::kScalar);
          k::residual_batch(g.view(), count, b.p_soa.data(), b.q_soa.data(),
                            max_norm, scalar_out.data());
          k::set_backend(k::Backend::kAvx2);
          k::residual_batch(g.view(), count, b.p_soa.data(), b.q_soa.data(),
                            max_norm, avx_out.data());
          CHECK(bitwise_equal(scalar_out, avx_out));
        }
        k::set_backend(k::Backend::kScalar);
        const double lo_s =
            k::sweep_best_row_guarantee(g.view(), count, b.p_soa.data());
        const double hi_s =
            k::sweep_best_col_guarantee(g.view(), count, b.q_soa.data());
        k::set_backend(k::Backend::kAvx2);
        const double lo_v =
            k::sweep_best_row_guarantee(g.view(), count, b.p_soa.data());
        const double hi_v =
            k::sweep_best_col_guarantee(g.view(), count, b.q_soa.data());
        CHECK(lo_s == lo_v);
        CHECK(hi_s == hi_v);
      }
    }
  }
  k::set_backend(k::avx2_supported() ? k::Backend::kAvx2 : k::Backend::kScalar);
}

TEST_CASE("block metric max agrees across backends and with pair_metric") {
  auto r = testutil::rng(13);
  const int dim = 5;
  const std::size_t count = 517;  // not a multiple of the lane width
  std::vector<double> soa(static_cast<std::size_t>(dim) * count);
  for (double& v : soa) v = testutil::unit(r) * 2.0 - 1.0;
  std::vector<double> query(static_cast<std::size_t>(dim));
  for (double& v : query) v = testutil::unit(r);

  for (bool max_norm : {false, true}) {
    k::set_backend(k::Backend::kScalar);
    const double scalar_max =
        k::block_metric_max(dim, soa.data(), count, 3, count, query.data(),
                            max_norm);
    double brute = 0.0;
    for (std::size_t j = 3; j < count; ++j) {
      const double d =
          k::pair_metric(dim, soa.data(), count, j, query.data(), max_norm);
      brute = d > brute ? d : brute;
    }
    CHECK(scalar_max == brute);
    if (k::avx2_supported()) {
      k::set_backend(k::Backend::kAvx2);
      const double simd_max =
          k::block_metric_max(dim, soa.data(), count, 3, count, query.data(),
                              max_norm);
      CHECK(simd_max == scalar_max);
    }
  }
  k::set_backend(k::avx2_supported() ? k::Backend::kAvx2 : k::Backend::kScalar);
}

TEST_CASE("backend switching is explicit and validated") {
  const k::Backend original = k::active_backend();
  k::set_backend(k::Backend::kScalar);
  CHECK(k::active_backend() == k::Backend::kScalar);
  CHECK(std::string(k::backend_name(k::Backend::kScalar)) == "scalar");
  CHECK(std::string(k::backend_name(k::Backend::kAvx2)) == "avx2");
  if (!k::avx2_supported()) {
    CHECK_THROWS_AS(k::set_backend(k::Backend::kAvx2), InvalidArgument);
  }
  k::set_backend(original);
}
