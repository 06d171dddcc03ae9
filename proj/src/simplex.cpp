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

#include "fixmax/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "fixmax/errors.hpp"

namespace fixmax {

MixedStrategy make_mixed(std::vector<double> weights, double tolerance) {
  if (weights.empty()) {
    throw InvalidArgument("mixed strategy needs at least one weight");
  }
  if (!(tolerance > 0.0)) {
    throw InvalidArgument("validation tolerance must be positive");
  }
  double sum = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w)) {
      throw InvalidStrategy("non-finite weight");
    }
    if (w < kNegativeWeightSlack) {
      throw InvalidStrategy("negative weight " + std::to_string(w));
    }
    if (w < 0.0) w = 0.0;  // inside the slack band: rounding noise
    sum += w;
  }
  if (!(std::abs(sum - 1.0) <= tolerance)) {
    throw InvalidStrategy("weights sum to " + std::to_string(sum) +
                          ", not 1 within tolerance");
  }
  return MixedStrategy{std::move(weights)};
}

ProductPoint make_product(MixedStrategy row, MixedStrategy col) {
  return ProductPoint{std::move(row), std::move(col)};
}

bool is_valid_mixed(const MixedStrategy& m, double tolerance) {
  if (m.weights.empty()) return false;
  double sum = 0.0;
  for (double w : m.weights) {
    if (!std::isfinite(w) || w < 0.0) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

bool is_valid_product(const ProductPoint& x, double tolerance) {
  return is_valid_mixed(x.row, tolerance) && is_valid_mixed(x.col, tolerance);
}

namespace {

double sumsq_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (d > acc) acc = d;
  }
  return acc;
}

}  // namespace

double distance(const MixedStrategy& a, const MixedStrategy& b,
                const MetricConfig& cfg) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("mixed strategies of different dimension");
  }
  if (cfg.norm == Norm::kMaxAbs) return max_gap(a.weights, b.weights);
  return std::sqrt(sumsq_gap(a.weights, b.weights));
}

double distance(const ProductPoint& x, const ProductPoint& y,
                const MetricConfig& cfg) {
  if (x.row.dim() != y.row.dim() || x.col.dim() != y.col.dim()) {
    throw DimensionMismatch("product points of different dimension");
  }
  if (cfg.norm == Norm::kMaxAbs) {
    return std::max(max_gap(x.row.weights, y.row.weights),
                    max_gap(x.col.weights, y.col.weights));
  }
  return std::sqrt(sumsq_gap(x.row.weights, y.row.weights) +
                   sumsq_gap(x.col.weights, y.col.weights));
}

namespace lattice {

void for_each_composition(int dim, std::int64_t total,
                          const std::function<void(const std::int64_t*)>& fn) {
  if (dim < 1) throw InvalidArgument("composition dimension must be >= 1");
  if (total < 0) throw InvalidArgument("composition total must be >= 0");
  std::vector<std::int64_t> nums(static_cast<std::size_t>(dim), 0);
  std::function<void(int, std::int64_t)> rec = [&](int pos,
                                                   std::int64_t remaining) {
    if (pos == dim - 1) {
      nums[static_cast<std::size_t>(pos)] = remaining;
      fn(nums.data());
      return;
    }
    for (std::int64_t v = 0; v <= remaining; ++v) {
      nums[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, remaining - v);
    }
  };
  rec(0, total);
}

void for_each_composition_window(
    int dim, std::int64_t total, const std::int64_t* lo, const std::int64_t* hi,
    const std::function<void(const std::int64_t*)>& fn) {
  if (dim < 1) throw InvalidArgument("composition dimension must be >= 1");
  std::vector<std::int64_t> nums(static_cast<std::size_t>(dim), 0);
  // suffix_hi[i] = sum of hi[i..dim), to prune infeasible prefixes
  std::vector<std::int64_t> suffix_hi(static_cast<std::size_t>(dim) + 1, 0);
  std::vector<std::int64_t> suffix_lo(static_cast<std::size_t>(dim) + 1, 0);
  for (int i = dim - 1; i >= 0; --i) {
    suffix_hi[static_cast<std::size_t>(i)] =
        suffix_hi[static_cast<std::size_t>(i) + 1] + hi[i];
    suffix_lo[static_cast<std::size_t>(i)] =
        suffix_lo[static_cast<std::size_t>(i) + 1] + lo[i];
  }
  std::function<void(int, std::int64_t)> rec = [&](int pos,
                                                   std::int64_t remaining) {
    if (pos == dim - 1) {
      if (remaining >= lo[pos] && remaining <= hi[pos]) {
        nums[static_cast<std::size_t>(pos)] = remaining;
        fn(nums.data());
      }
      return;
    }
    const std::int64_t lo_here = std::max(
        lo[pos], remaining - suffix_hi[static_cast<std::size_t>(pos) + 1]);
    const std::int64_t hi_here = std::min(
        hi[pos], remaining - suffix_lo[static_cast<std::size_t>(pos) + 1]);
    for (std::int64_t v = lo_here; v <= hi_here; ++v) {
      nums[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, remaining - v);
    }
  };
  if (total >= 0) rec(0, total);
}

std::int64_t composition_count(int dim, std::int64_t total) {
  // C(total + dim - 1, dim - 1), exact in int64 for the sizes we allow
  std::int64_t n = total + dim - 1;
  std::int64_t k = dim - 1;
  if (k > n - k) k = n - k;
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

}  // namespace lattice

std::vector<MixedStrategy> grid_points(int dim, std::int64_t mesh) {
  if (dim < 1) throw InvalidArgument("grid dimension must be >= 1");
  if (mesh < 1) throw InvalidArgument("grid mesh must be >= 1");
  std::vector<MixedStrategy> out;
  out.reserve(static_cast<std::size_t>(lattice::composition_count(dim, mesh)));
  const double inv = 1.0 / static_cast<double>(mesh);
  lattice::for_each_composition(dim, mesh, [&](const std::int64_t* nums) {
    std::vector<double> w(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      w[static_cast<std::size_t>(i)] = static_cast<double>(nums[i]) * inv;
    }
    out.push_back(make_mixed(std::move(w)));
  });
  return out;
}

namespace {

// Per-coordinate numerator window for lattice points within `radius` of the
// real-valued coordinates `center` (necessary condition for either norm).
void coordinate_window(const std::vector<double>& center, double radius,
                       std::int64_t mesh, std::vector<std::int64_t>& lo,
                       std::vector<std::int64_t>& hi) {
  lo.resize(center.size());
  hi.resize(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    const double lo_real = (center[i] - radius) * static_cast<double>(mesh);
    const double hi_real = (center[i] + radius) * static_cast<double>(mesh);
    std::int64_t l = static_cast<std::int64_t>(std::ceil(lo_real - 1e-9));
    std::int64_t h = static_cast<std::int64_t>(std::floor(hi_real + 1e-9));
    lo[i] = std::clamp<std::int64_t>(l, 0, mesh);
    hi[i] = std::clamp<std::int64_t>(h, 0, mesh);
    if (hi[i] < lo[i]) hi[i] = lo[i] - 1;  // empty window
  }
}

}  // namespace

std::vector<ProductPoint> local_grid(const ProductPoint& x, double radius,
                                     std::int64_t mesh,
                                     const MetricConfig& cfg) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (mesh < 1) throw InvalidArgument("grid mesh must be >= 1");
  const int m = static_cast<int>(x.row.dim());
  const int n = static_cast<int>(x.col.dim());
  const double inv = 1.0 / static_cast<double>(mesh);

  std::vector<std::int64_t> lo, hi;
  std::vector<MixedStrategy> rows, cols;
  coordinate_window(x.row.weights, radius, mesh, lo, hi);
  lattice::for_each_composition_window(
      m, mesh, lo.data(), hi.data(), [&](const std::int64_t* nums) {
        std::vector<double> w(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) w[static_cast<std::size_t>(i)] =
            static_cast<double>(nums[i]) * inv;
        rows.push_back(MixedStrategy{std::move(w)});
      });
  coordinate_window(x.col.weights, radius, mesh, lo, hi);
  lattice::for_each_composition_window(
      n, mesh, lo.data(), hi.data(), [&](const std::int64_t* nums) {
        std::vector<double> w(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] =
            static_cast<double>(nums[j]) * inv;
        cols.push_back(MixedStrategy{std::move(w)});
      });

  std::vector<ProductPoint> out;
  bool saw_x = false;
  for (const MixedStrategy& r : rows) {
    for (const MixedStrategy& c : cols) {
      ProductPoint cand{r, c};
      if (distance(cand, x, cfg) <= radius) {
        saw_x = saw_x || (r.weights == x.row.weights &&
                          c.weights == x.col.weights);
        out.push_back(std::move(cand));
      }
    }
  }
  if (!saw_x) out.push_back(x);
  return out;
}

}  // namespace fixmax
