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
#include <vector>

#include "fixmax/game.hpp"
#include "fixmax/kernels.hpp"
#include "test_util.hpp"

using namespace fixmax;

namespace {

ProductPoint center22() {
  return ProductPoint{make_mixed({0.5, 0.5}), make_mixed({0.5, 0.5})};
}

ZeroSumGame saddle_game() {
  return ZeroSumGame::from_rows({{2.0, 1.0}, {0.0, -1.0}});
}

ZeroSumGame constant_game(double c) {
  return ZeroSumGame::from_rows({{c, c}, {c, c}});
}

}  // namespace

TEST_CASE("game construction validates shape and entries") {
  CHECK_THROWS_AS(ZeroSumGame::from_rows({{1.0, 2.0}, {3.0}}),
                  InvalidArgument);
  CHECK_THROWS_AS(ZeroSumGame::from_rows({}), InvalidArgument);
  CHECK_THROWS_AS(
      ZeroSumGame::from_rows({{1.0, std::numeric_limits<double>::infinity()}}),
      InvalidArgument);
  const ZeroSumGame g = testutil::matching_pennies();
  CHECK(g.rows == 2);
  CHECK(g.cols == 2);
  CHECK(g.max_abs_payoff() == 1.0);
}

TEST_CASE("expected payoff matches the table and the closed form") {
  const ZeroSumGame mp = testutil::matching_pennies();
  const ProductPoint both_x{make_mixed({1.0, 0.0}), make_mixed({1.0, 0.0})};
  CHECK(expected_payoff(mp, both_x) == 1.0);
  CHECK(expected_payoff(mp, center22()) == 0.0);
  const ProductPoint skew{make_mixed({0.75, 0.25}), make_mixed({0.75, 0.25})};
  CHECK(expected_payoff(mp, skew) == doctest::Approx(0.25).epsilon(1e-15));

  // closed form (2p-1)(2q-1) across a small grid, plus a direct double sum
  for (const MixedStrategy& p : grid_points(2, 8)) {
    for (const MixedStrategy& q : grid_points(2, 8)) {
      const ProductPoint x{p, q};
      const double closed =
          (2.0 * p.weights[0] - 1.0) * (2.0 * q.weights[0] - 1.0);
      double brute = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          brute += p.weights[static_cast<std::size_t>(i)] * mp.at(i, j) *
                   q.weights[static_cast<std::size_t>(j)];
      const double v = expected_payoff(mp, x);
      CHECK(v == doctest::Approx(closed).epsilon(1e-12));
      CHECK(v == doctest::Approx(brute).epsilon(1e-12));
    }
  }

  const ProductPoint wrong{make_mixed({1.0, 0.0, 0.0}), make_mixed({1.0, 0.0})};
  CHECK_THROWS_AS(expected_payoff(mp, wrong), DimensionMismatch);
}

TEST_CASE("pure-strategy payoffs match the stated sums") {
  const ZeroSumGame mp = testutil::matching_pennies();
  const MixedStrategy q = make_mixed({0.75, 0.25});
  CHECK(payoff_row_pure(mp, 0, q) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(payoff_row_pure(mp, 1, q) == doctest::Approx(-0.5).epsilon(1e-15));

  // a vertex opponent picks out the matrix column
  auto r = testutil::rng(41);
  const ZeroSumGame g = testutil::random_int_game(r, 3, 4);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> e(4, 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    const MixedStrategy vertex = make_mixed(e);
    for (int i = 0; i < 3; ++i) {
      CHECK(payoff_row_pure(g, i, vertex) == g.at(i, j));
    }
  }
  CHECK_THROWS_AS(payoff_row_pure(mp, 2, q), InvalidArgument);
  CHECK_THROWS_AS(payoff_col_pure(mp, q, -1), InvalidArgument);
}

TEST_CASE("guaranteed payoffs at the worked points") {
  const ZeroSumGame mp = testutil::matching_pennies();
  CHECK(guaranteed_payoff_a(mp, make_mixed({0.5, 0.5})) == 0.0);
  CHECK(guaranteed_payoff_a(mp, make_mixed({1.0, 0.0})) == -1.0);
  const ZeroSumGame c = constant_game(3.25);
  auto r = testutil::rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const MixedStrategy p = testutil::random_mixed(r, 2);
    const MixedStrategy q = testutil::random_mixed(r, 2);
    CHECK(guaranteed_payoff_a(c, p) == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(guaranteed_payoff_b(c, q) == doctest::Approx(3.25).epsilon(1e-12));
  }
}

TEST_CASE("vertex attainment: the min over the simplex is a vertex min") {
  auto r = testutil::rng(43);
  for (auto [m, n] : {std::pair{2, 2}, std::pair{2, 3}}) {
    const ZeroSumGame g = testutil::random_int_game(r, m, n);
    const auto qgrid = grid_points(n, 100);
    for (int trial = 0; trial < 10; ++trial) {
      const MixedStrategy p = testutil::random_mixed(r, m);
      const double va = guaranteed_payoff_a(g, p);
      double brute = std::numeric_limits<double>::infinity();
      for (const MixedStrategy& q : qgrid) {
        const double v = expected_payoff(g, ProductPoint{p, q});
        brute = v < brute ? v : brute;
      }
      CHECK(va <= brute + 1e-12);
      CHECK(va >= brute - 1e-9);  // grid attains the vertex min
    }
  }
}

TEST_CASE("excess response map at the worked profiles") {
  const ZeroSumGame mp = testutil::matching_pennies();
  const MapUnderTest gamma = excess_response_map(mp);

  const ProductPoint eq = center22();
  const ProductPoint at_eq = gamma.evaluate(eq);
  CHECK(at_eq.row.weights == eq.row.weights);
  CHECK(at_eq.col.weights == eq.col.weights);

  const ProductPoint vertex{make_mixed({1.0, 0.0}), make_mixed({1.0, 0.0})};
  const ProductPoint moved = gamma.evaluate(vertex);
  CHECK(moved.row.weights == std::vector<double>{1.0, 0.0});
  CHECK(moved.col.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(moved.col.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("excess response map preserves the simplex invariants") {
  auto r = testutil::rng(44);
  for (auto [m, n] : {std::pair{2, 2}, std::pair{3, 3}, std::pair{4, 2}}) {
    const ZeroSumGame g = testutil::random_int_game(r, m, n);
    const MapUnderTest gamma = excess_response_map(g);
    for (int trial = 0; trial < 1000; ++trial) {
      const ProductPoint x = testutil::random_profile(r, m, n);
      const ProductPoint y = gamma.evaluate(x);
      double sum_p = 0.0, sum_q = 0.0;
      for (double w : y.row.weights) {
        CHECK(w >= 0.0);  // numerators are sums of nonnegative terms
        sum_p += w;
      }
      for (double w : y.col.weights) {
        CHECK(w >= 0.0);
        sum_q += w;
      }
      CHECK(std::abs(sum_p - 1.0) <= 1e-12);
      CHECK(std::abs(sum_q - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("excesses at the worked profiles") {
  const ZeroSumGame mp = testutil::matching_pennies();
  const ExcessPair at_eq = total_excess(mp, center22());
  CHECK(at_eq.row_excess == 0.0);
  CHECK(at_eq.col_excess == 0.0);

  const ProductPoint vertex{make_mixed({1.0, 0.0}), make_mixed({1.0, 0.0})};
  const ExcessPair at_vertex = total_excess(mp, vertex);
  CHECK(at_vertex.row_excess == 0.0);
  CHECK(at_vertex.col_excess == 2.0);

  auto r = testutil::rng(45);
  const ZeroSumGame c = constant_game(-2.5);
  for (int trial = 0; trial < 100; ++trial) {
    // random weights only sum to 1 up to rounding, so the excesses pick up
    // noise at the 1e-15 scale
    const ExcessPair e = total_excess(c, testutil::random_profile(r, 2, 2));
    CHECK(e.row_excess <= 1e-12);
    CHECK(e.col_excess <= 1e-12);
  }
}

TEST_CASE("zero residual coincides with zero excesses on grids") {
  auto r = testutil::rng(46);
  std::vector<ZeroSumGame> games = {testutil::matching_pennies(),
                                    testutil::random_int_game(r, 2, 2),
                                    testutil::random_int_game(r, 3, 3)};
  for (const ZeroSumGame& g : games) {
    const MapUnderTest gamma = excess_response_map(g);
    const auto pgrid = grid_points(g.rows, 50);
    const auto qgrid = grid_points(g.cols, 50);
    std::size_t zero_count = 0;
    for (const MixedStrategy& p : pgrid) {
      for (const MixedStrategy& q : qgrid) {
        const ProductPoint x{p, q};
        const double res = residual(gamma, x);
        const ExcessPair e = total_excess(g, x);
        const bool excess_zero = e.row_excess <= 1e-10 && e.col_excess <= 1e-10;
        const bool res_zero = res <= 1e-10;
        CHECK(res_zero == excess_zero);
        zero_count += res_zero ? 1 : 0;
      }
    }
    (void)zero_count;
  }
}

TEST_CASE("weak duality holds pointwise") {
  auto r = testutil::rng(47);
  for (auto [m, n] : {std::pair{2, 2}, std::pair{3, 4}}) {
    const ZeroSumGame g = testutil::random_int_game(r, m, n);
    for (int trial = 0; trial < 1000; ++trial) {
      const MixedStrategy p = testutil::random_mixed(r, m);
      const MixedStrategy q = testutil::random_mixed(r, n);
      const DualityCheck dc = check_duality(g, p, q);
      const double v = expected_payoff(g, ProductPoint{p, q});
      CHECK(dc.v_a <= v + 1e-12);
      CHECK(v <= dc.v_b + 1e-12);
      CHECK(dc.gap >= -1e-12);
    }
  }

  const ZeroSumGame mp = testutil::matching_pennies();
  const DualityCheck at_eq =
      check_duality(mp, make_mixed({0.5, 0.5}), make_mixed({0.5, 0.5}));
  CHECK(at_eq.gap == 0.0);
  const DualityCheck at_vertex =
      check_duality(mp, make_mixed({1.0, 0.0}), make_mixed({1.0, 0.0}));
  CHECK(at_vertex.v_a == -1.0);
  CHECK(at_vertex.v_b == 1.0);
  CHECK(at_vertex.gap == 2.0);
}

TEST_CASE("expected payoff is bilinear") {
  auto r = testutil::rng(48);
  const ZeroSumGame g = testutil::random_int_game(r, 3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const MixedStrategy p1 = testutil::random_mixed(r, 3);
    const MixedStrategy p2 = testutil::random_mixed(r, 3);
    const MixedStrategy q = testutil::random_mixed(r, 3);
    const double t = testutil::unit(r);
    std::vector<double> blend(3);
    for (int i = 0; i < 3; ++i)
      blend[static_cast<std::size_t>(i)] =
          t * p1.weights[static_cast<std::size_t>(i)] +
          (1.0 - t) * p2.weights[static_cast<std::size_t>(i)];
    const MixedStrategy pm = make_mixed(blend, 1e-9);
    const double lhs = expected_payoff(g, ProductPoint{pm, q});
    const double rhs = t * expected_payoff(g, ProductPoint{p1, q}) +
                       (1.0 - t) * expected_payoff(g, ProductPoint{p2, q});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("the zero-excess set is invariant under positive affine rescaling") {
  auto r = testutil::rng(49);
  for (auto [m, n] : {std::pair{2, 2}, std::pair{3, 3}}) {
    const ZeroSumGame g = testutil::random_int_game(r, m, n);
    ZeroSumGame shifted = g;
    for (double& v : shifted.payoffs) v = 2.0 * v + 3.0;
    const auto pgrid = grid_points(m, 20);
    const auto qgrid = grid_points(n, 20);
    for (const MixedStrategy& p : pgrid) {
      for (const MixedStrategy& q : qgrid) {
        const ProductPoint x{p, q};
        const ExcessPair a = total_excess(g, x);
        const ExcessPair b = total_excess(shifted, x);
        const bool zero_a = a.row_excess <= 1e-10 && a.col_excess <= 1e-10;
        const bool zero_b = b.row_excess <= 1e-10 && b.col_excess <= 1e-10;
        CHECK(zero_a == zero_b);
      }
    }
  }
}

TEST_CASE("solve_game reproduces the matching-pennies equilibrium") {
  const ZeroSumGame mp = testutil::matching_pennies();
  const EquilibriumResult res = solve_game(mp);
  CHECK(res.certified);
  CHECK(std::abs(res.value) < 1e-2);
  CHECK(distance(res.profile, center22()) < 1e-2);
  CHECK(res.lambda <= certification_tolerance(mp));
  CHECK(res.lambda_prime <= certification_tolerance(mp));
  CHECK(res.duality_gap >= -1e-9);
  CHECK(std::abs(expected_payoff(mp, res.profile) - res.value) <= 1e-12);
  CHECK(res.trace.converged);
}

TEST_CASE("solve_game finds the pure saddle") {
  const EquilibriumResult res = solve_game(saddle_game());
  CHECK(res.certified);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.profile.row.weights[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.profile.col.weights[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solve_game on a constant game certifies any profile") {
  const EquilibriumResult res = solve_game(constant_game(2.5));
  CHECK(res.certified);
  CHECK(res.value == 2.5);
  CHECK(res.lambda == 0.0);
  CHECK(res.lambda_prime == 0.0);
  CHECK(res.duality_gap == 0.0);
}

TEST_CASE("solve_game is deterministic") {
  auto r = testutil::rng(50);
  const ZeroSumGame g = testutil::random_int_game(r, 3, 3);
  const EquilibriumResult a = solve_game(g);
  const EquilibriumResult b = solve_game(g);
  CHECK(a.profile.row.weights == b.profile.row.weights);
  CHECK(a.profile.col.weights == b.profile.col.weights);
  CHECK(a.value == b.value);
  CHECK(a.lambda == b.lambda);
  CHECK(a.lambda_prime == b.lambda_prime);
  CHECK(a.residual == b.residual);
  CHECK(a.trace.iterates.size() == b.trace.iterates.size());
}

TEST_CASE("solve_game propagates an exhausted stage budget") {
  SolveOptions opts;
  opts.max_stages = 3;  // cannot reach eps 1e-4
  CHECK_THROWS_AS(solve_game(testutil::matching_pennies(), opts),
                  BudgetExhausted);
}

TEST_CASE("uniqueness probe on games") {
  const UniquenessReport mp_rep = probe_equilibrium_uniqueness(
      testutil::matching_pennies(), 0.1, {1e-1, 1e-2, 1e-3}, 100);
  CHECK(mp_rep.verdict == UniquenessVerdict::kConsistent);

  const UniquenessReport const_rep = probe_equilibrium_uniqueness(
      constant_game(1.0), 0.1, {1e-1, 1e-2, 1e-3}, 40);
  CHECK(const_rep.verdict == UniquenessVerdict::kViolated);

  // saddle game: cross-check the first row against brute-force enumeration
  const ZeroSumGame sg = saddle_game();
  const UniquenessReport sg_rep =
      probe_equilibrium_uniqueness(sg, 0.1, {1e-1, 1e-2}, 50);
  const MapUnderTest gamma = excess_response_map(sg);
  const auto side = grid_points(2, 50);
  std::int64_t brute_count = 0;
  double brute_diam = 0.0;
  std::vector<ProductPoint> members;
  for (const MixedStrategy& p : side)
    for (const MixedStrategy& q : side) {
      const ProductPoint x{p, q};
      if (residual(gamma, x) < 1e-1) {
        ++brute_count;
        members.push_back(x);
      }
    }
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const double d = distance(members[i], members[j]);
      brute_diam = d > brute_diam ? d : brute_diam;
    }
  REQUIRE(!sg_rep.rows.empty());
  CHECK(sg_rep.rows[0].member_count == brute_count);
  CHECK(sg_rep.rows[0].diameter == doctest::Approx(brute_diam).epsilon(1e-12));
  for (std::size_t k = 1; k < sg_rep.rows.size(); ++k) {
    CHECK(sg_rep.rows[k].epsilon < sg_rep.rows[k - 1].epsilon);
  }
}

TEST_CASE("support suggestions are valid profiles and find known equilibria") {
  const ZeroSumGame mp = testutil::matching_pennies();
  const MapUnderTest gamma = excess_response_map(mp);
  REQUIRE(gamma.suggest);

  auto r = testutil::rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    for (const ProductPoint& s :
         gamma.suggest(testutil::random_profile(r, 2, 2))) {
      CHECK(is_valid_product(s, 1e-9));
    }
  }

  // near the equilibrium both strategies are near-best replies, so the
  // full-support system fires and solves the game exactly
  const ProductPoint near_center{make_mixed({0.52, 0.48}),
                                 make_mixed({0.47, 0.53})};
  bool found_center = false;
  for (const ProductPoint& s : gamma.suggest(near_center)) {
    found_center = found_center ||
                   (std::abs(s.row.weights[0] - 0.5) <= 1e-12 &&
                    std::abs(s.col.weights[0] - 0.5) <= 1e-12);
  }
  CHECK(found_center);
}

TEST_CASE("solve_game reports an uncertified profile when stages are short") {
  // this game needs schedule stages past the epsilon target before the
  // excesses drop below tolerance
  const ZeroSumGame g = ZeroSumGame::from_rows({{3.0, -1.0}, {-2.0, 1.0}});
  SolveOptions opts;
  opts.max_stages = 15;
  try {
    solve_game(g, opts);
    FAIL("expected EquilibriumNotCertified");
  } catch (const EquilibriumNotCertified& e) {
    CHECK(!e.partial.certified);
    CHECK(e.partial.lambda + e.partial.lambda_prime >
          certification_tolerance(g));
    CHECK(is_valid_product(e.partial.profile, 1e-9));
  }
  opts.max_stages = 46;
  const EquilibriumResult full = solve_game(g, opts);
  CHECK(full.certified);
  CHECK(std::abs(full.value - 1.0 / 7.0) <= 1e-6);
}

TEST_CASE("evaluate_profile fills a full report without certification") {
  const ZeroSumGame mp = testutil::matching_pennies();
  const ProductPoint vertex{make_mixed({1.0, 0.0}), make_mixed({1.0, 0.0})};
  const EquilibriumResult res = evaluate_profile(mp, vertex);
  CHECK(!res.certified);
  CHECK(res.value == 1.0);
  CHECK(res.lambda == 0.0);
  CHECK(res.lambda_prime == 2.0);
  CHECK(res.v_a == -1.0);
  CHECK(res.v_b == 1.0);
  CHECK(res.duality_gap == 2.0);
  CHECK(res.residual == doctest::Approx(std::sqrt(8.0 / 9.0)).epsilon(1e-14));
}
