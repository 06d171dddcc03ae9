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

#include "fixmax/oracle.hpp"

#include <vector>

#include "fixmax/errors.hpp"
#include "fixmax/kernels.hpp"

namespace fixmax {

namespace {

constexpr std::size_t kChunk = 2048;

// Best guarantee over one side's full grid, streamed through the sweep
// kernels in SoA chunks.
double sweep_side(const ZeroSumGame& g, int dim, std::int64_t mesh,
                  bool row_side) {
  std::vector<double> soa(static_cast<std::size_t>(dim) * kChunk);
  std::vector<double> chunk_results;
  std::size_t fill = 0;
  const double inv = 1.0 / static_cast<double>(mesh);
  const kernels::GameView view = g.view();

  auto flush = [&](std::size_t cnt) {
    if (cnt == 0) return;
    if (cnt < kChunk) {
      for (int d = 1; d < dim; ++d) {
        for (std::size_t c = 0; c < cnt; ++c) {
          soa[static_cast<std::size_t>(d) * cnt + c] =
              soa[static_cast<std::size_t>(d) * kChunk + c];
        }
      }
    }
    chunk_results.push_back(
        row_side ? kernels::sweep_best_row_guarantee(view, cnt, soa.data())
                 : kernels::sweep_best_col_guarantee(view, cnt, soa.data()));
  };

  lattice::for_each_composition(dim, mesh, [&](const std::int64_t* nums) {
    for (int d = 0; d < dim; ++d) {
      soa[static_cast<std::size_t>(d) * kChunk + fill] =
          static_cast<double>(nums[d]) * inv;
    }
    if (++fill == kChunk) {
      flush(fill);
      fill = 0;
    }
  });
  flush(fill);

  double best = chunk_results.front();
  for (double v : chunk_results) {
    if (row_side) {
      best = v > best ? v : best;
    } else {
      best = v < best ? v : best;
    }
  }
  return best;
}

}  // namespace

ValueBracket grid_minimax(const ZeroSumGame& g, std::int64_t mesh) {
  if (g.rows > kOracleMaxStrategies || g.cols > kOracleMaxStrategies) {
    throw OracleLimitExceeded("oracle limit exceeded: at most " +
                              std::to_string(kOracleMaxStrategies) +
                              " strategies per player");
  }
  if (mesh < 1 || mesh > kOracleMaxMesh) {
    throw OracleLimitExceeded("oracle limit exceeded: mesh must be in [1, " +
                              std::to_string(kOracleMaxMesh) + "]");
  }
  ValueBracket b;
  b.mesh = mesh;
  b.lower = sweep_side(g, g.rows, mesh, /*row_side=*/true);
  b.upper = sweep_side(g, g.cols, mesh, /*row_side=*/false);
  return b;
}

Solution2x2 closed_form_2x2(const ZeroSumGame& g) {
  if (g.rows != 2 || g.cols != 2) {
    throw InvalidArgument("closed form requires a 2x2 game");
  }
  const double a = g.at(0, 0), b = g.at(0, 1);
  const double c = g.at(1, 0), d = g.at(1, 1);

  // Saddle point first (weak inequalities, first hit in row-major order):
  // an entry that is the minimum of its row and the maximum of its column.
  const double row_min[2] = {a < b ? a : b, c < d ? c : d};
  const double col_max[2] = {a > c ? a : c, b > d ? b : d};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double v = g.at(i, j);
      if (v == row_min[i] && v == col_max[j]) {
        Solution2x2 s;
        s.value = v;
        s.pure = true;
        s.profile.row.weights = {i == 0 ? 1.0 : 0.0, i == 0 ? 0.0 : 1.0};
        s.profile.col.weights = {j == 0 ? 1.0 : 0.0, j == 0 ? 0.0 : 1.0};
        return s;
      }
    }
  }

  const double denom = a - b - c + d;
  if (denom == 0.0) {
    // Unreachable for real payoffs (no saddle forces denom != 0); return the
    // best maximin vertex rather than divide.
    Solution2x2 s;
    const int i = row_min[0] >= row_min[1] ? 0 : 1;
    const int j = col_max[0] <= col_max[1] ? 0 : 1;
    s.value = row_min[i];
    s.pure = true;
    s.profile.row.weights = {i == 0 ? 1.0 : 0.0, i == 0 ? 0.0 : 1.0};
    s.profile.col.weights = {j == 0 ? 1.0 : 0.0, j == 0 ? 0.0 : 1.0};
    return s;
  }
  Solution2x2 s;
  s.value = (a * d - b * c) / denom;
  const double p0 = (d - c) / denom;
  const double q0 = (d - b) / denom;
  s.profile.row.weights = {p0, 1.0 - p0};
  s.profile.col.weights = {q0, 1.0 - q0};
  return s;
}

}  // namespace fixmax
