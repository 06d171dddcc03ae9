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
// Independent ground truth for small games: an exhaustive grid bracket of the
// game value and the closed form for 2x2 games. Deliberately slow and simple;
// kept apart from the solver so the two can check each other.

#ifndef FIXMAX_ORACLE_HPP
#define FIXMAX_ORACLE_HPP

#include <cstdint>

#include "fixmax/game.hpp"
#include "fixmax/simplex.hpp"

namespace fixmax {

// Exhaustive enumeration stays under a second within these limits; larger
// requests are rejected.
inline constexpr int kOracleMaxStrategies = 4;
inline constexpr std::int64_t kOracleMaxMesh = 400;

// [lower, upper] always contains the game value: lower is the best row
// guarantee over the p-grid, upper the best column guarantee over the q-grid.
struct ValueBracket {
  double lower = 0.0;
  double upper = 0.0;
  std::int64_t mesh = 0;
};

ValueBracket grid_minimax(const ZeroSumGame& g, std::int64_t mesh);

struct Solution2x2 {
  double value = 0.0;
  ProductPoint profile;
  bool pure = false;  // solved by a saddle point rather than the mixed formula
};

// Pure saddle point when one exists, otherwise the completely mixed solution
// value (ad - bc) / (a - b - c + d). Degenerate no-saddle games with a zero
// denominator cannot occur for real payoffs; the fallback returns the best
// maximin vertex.
Solution2x2 closed_form_2x2(const ZeroSumGame& g);

}  // namespace fixmax

#endif  // FIXMAX_ORACLE_HPP
