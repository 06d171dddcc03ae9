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

#include "fixmax/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <set>

#include "fixmax/kernels.hpp"

namespace fixmax {

namespace {

constexpr std::size_t kChunk = 2048;
// Full-product sweeps and probe member sets beyond these sizes are outside
// the desk-scale envelope this engine targets.
constexpr std::int64_t kMaxProductPoints = 100'000'000;
constexpr std::int64_t kMaxProbeMembers = 500'000;
// Local re-search window, in cells of the current mesh, per coordinate.
// Narrower above eight total strategies: window products grow as
// (2w+1)^(m+n-2) and the wider box stops paying for itself.
std::int64_t window_cells(int rows, int cols) {
  return rows + cols <= 8 ? 3 : 2;
}

bool use_max_norm(const MetricConfig& cfg) { return cfg.norm == Norm::kMaxAbs; }

// One side of the product lattice, flattened: point k occupies
// coords[k*dim .. k*dim+dim) and nums[k*dim .. ).
struct FactorGrid {
  int dim = 0;
  std::int64_t mesh = 0;
  std::int64_t count = 0;
  std::vector<double> coords;
  std::vector<std::int64_t> nums;

  const double* point(std::int64_t k) const {
    return coords.data() + static_cast<std::size_t>(k) * dim;
  }
  const std::int64_t* numerators(std::int64_t k) const {
    return nums.data() + static_cast<std::size_t>(k) * dim;
  }
};

FactorGrid build_full_factor(int dim, std::int64_t mesh) {
  FactorGrid g;
  g.dim = dim;
  g.mesh = mesh;
  g.count = lattice::composition_count(dim, mesh);
  g.coords.reserve(static_cast<std::size_t>(g.count) * dim);
  g.nums.reserve(static_cast<std::size_t>(g.count) * dim);
  const double inv = 1.0 / static_cast<double>(mesh);
  lattice::for_each_composition(dim, mesh, [&](const std::int64_t* n) {
    for (int i = 0; i < dim; ++i) {
      g.nums.push_back(n[i]);
      g.coords.push_back(static_cast<double>(n[i]) * inv);
    }
  });
  return g;
}

FactorGrid build_window_factor(int dim, std::int64_t mesh,
                               const std::int64_t* center,
                               std::int64_t cells) {
  FactorGrid g;
  g.dim = dim;
  g.mesh = mesh;
  std::vector<std::int64_t> lo(static_cast<std::size_t>(dim));
  std::vector<std::int64_t> hi(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    lo[static_cast<std::size_t>(i)] =
        std::max<std::int64_t>(0, center[i] - cells);
    hi[static_cast<std::size_t>(i)] =
        std::min<std::int64_t>(mesh, center[i] + cells);
  }
  const double inv = 1.0 / static_cast<double>(mesh);
  lattice::for_each_composition_window(
      dim, mesh, lo.data(), hi.data(), [&](const std::int64_t* n) {
        for (int i = 0; i < dim; ++i) {
          g.nums.push_back(n[i]);
          g.coords.push_back(static_cast<double>(n[i]) * inv);
        }
      });
  g.count = static_cast<std::int64_t>(g.nums.size()) / dim;
  return g;
}

// Residuals of every admitted (ip, iq) pair, in lexicographic order of the
// pair of numerator lists; `sink` sees them in that order. Uses the map's
// batch hook when present and the game is small enough.
class ProductSweeper {
 public:
  ProductSweeper(const MapUnderTest& F, const MetricConfig& cfg)
      : map_(F),
        max_norm_(use_max_norm(cfg)),
        batched_(F.batch_residual && F.rows <= kernels::kMaxBatchDim &&
                 F.cols <= kernels::kMaxBatchDim) {
    p_soa_.resize(static_cast<std::size_t>(F.rows) * kChunk);
    q_soa_.resize(static_cast<std::size_t>(F.cols) * kChunk);
    out_.resize(kChunk);
    pair_ip_.resize(kChunk);
    pair_iq_.resize(kChunk);
    if (!batched_) {
      eval_p_.resize(static_cast<std::size_t>(F.rows));
      eval_q_.resize(static_cast<std::size_t>(F.cols));
    }
  }

  template <typename Admit, typename Sink>
  void run(const FactorGrid& P, const FactorGrid& Q, Admit&& admit,
           Sink&& sink) {
    std::size_t fill = 0;
    for (std::int64_t ip = 0; ip < P.count; ++ip) {
      const double* pc = P.point(ip);
      for (std::int64_t iq = 0; iq < Q.count; ++iq) {
        if (!admit(ip, iq)) continue;
        for (int i = 0; i < map_.rows; ++i) {
          p_soa_[static_cast<std::size_t>(i) * kChunk + fill] = pc[i];
        }
        const double* qc = Q.point(iq);
        for (int j = 0; j < map_.cols; ++j) {
          q_soa_[static_cast<std::size_t>(j) * kChunk + fill] = qc[j];
        }
        pair_ip_[fill] = ip;
        pair_iq_[fill] = iq;
        if (++fill == kChunk) {
          flush(fill, sink);
          fill = 0;
        }
      }
    }
    if (fill > 0) flush(fill, sink);
  }

 private:
  template <typename Sink>
  void flush(std::size_t cnt, Sink&& sink) {
    if (batched_) {
      if (cnt < kChunk) {
        // repack to stride == cnt; ascending rows never overwrite a source
        // row that is still to be read
        for (int i = 1; i < map_.rows; ++i) {
          std::memmove(p_soa_.data() + static_cast<std::size_t>(i) * cnt,
                       p_soa_.data() + static_cast<std::size_t>(i) * kChunk,
                       cnt * sizeof(double));
        }
        for (int j = 1; j < map_.cols; ++j) {
          std::memmove(q_soa_.data() + static_cast<std::size_t>(j) * cnt,
                       q_soa_.data() + static_cast<std::size_t>(j) * kChunk,
                       cnt * sizeof(double));
        }
      }
      map_.batch_residual(cnt, p_soa_.data(), q_soa_.data(), max_norm_,
                          out_.data());
      if (cnt < kChunk) {
        // restore the chunk stride for the next fill
        for (int i = map_.rows - 1; i >= 1; --i) {
          std::memmove(p_soa_.data() + static_cast<std::size_t>(i) * kChunk,
                       p_soa_.data() + static_cast<std::size_t>(i) * cnt,
                       cnt * sizeof(double));
        }
        for (int j = map_.cols - 1; j >= 1; --j) {
          std::memmove(q_soa_.data() + static_cast<std::size_t>(j) * kChunk,
                       q_soa_.data() + static_cast<std::size_t>(j) * cnt,
                       cnt * sizeof(double));
        }
      }
    } else {
      for (std::size_t c = 0; c < cnt; ++c) {
        double pl[kernels::kMaxBatchDim];
        double ql[kernels::kMaxBatchDim];
        const bool small = map_.rows <= kernels::kMaxBatchDim &&
                           map_.cols <= kernels::kMaxBatchDim;
        double* pv = small ? pl : eval_scratch_p(cnt);
        double* qv = small ? ql : eval_scratch_q(cnt);
        for (int i = 0; i < map_.rows; ++i)
          pv[i] = p_soa_[static_cast<std::size_t>(i) * kChunk + c];
        for (int j = 0; j < map_.cols; ++j)
          qv[j] = q_soa_[static_cast<std::size_t>(j) * kChunk + c];
        map_.apply(pv, qv, eval_p_.data(), eval_q_.data());
        if (max_norm_) {
          const double a = kernels::maxabs_diff(eval_p_.data(), pv, map_.rows);
          const double b = kernels::maxabs_diff(eval_q_.data(), qv, map_.cols);
          out_[c] = b > a ? b : a;
        } else {
          out_[c] =
              std::sqrt(kernels::sumsq_diff(eval_p_.data(), pv, map_.rows) +
                        kernels::sumsq_diff(eval_q_.data(), qv, map_.cols));
        }
      }
    }
    for (std::size_t c = 0; c < cnt; ++c) {
      sink(pair_ip_[c], pair_iq_[c], out_[c]);
    }
  }

  double* eval_scratch_p(std::size_t) {
    big_p_.resize(static_cast<std::size_t>(map_.rows));
    return big_p_.data();
  }
  double* eval_scratch_q(std::size_t) {
    big_q_.resize(static_cast<std::size_t>(map_.cols));
    return big_q_.data();
  }

  const MapUnderTest& map_;
  bool max_norm_;
  bool batched_;
  std::vector<double> p_soa_, q_soa_, out_;
  std::vector<std::int64_t> pair_ip_, pair_iq_;
  std::vector<double> eval_p_, eval_q_, big_p_, big_q_;
};

ProductPoint point_from_factors(const FactorGrid& P, std::int64_t ip,
                                const FactorGrid& Q, std::int64_t iq) {
  ProductPoint x;
  x.row.weights.assign(P.point(ip), P.point(ip) + P.dim);
  x.col.weights.assign(Q.point(iq), Q.point(iq) + Q.dim);
  return x;
}

void check_map(const MapUnderTest& F) {
  if (F.rows < 1 || F.cols < 1) {
    throw InvalidArgument("map dimensions must be >= 1");
  }
  if (!F.apply) throw InvalidArgument("map has no apply function");
}

// Bitmask of zero coordinates; identifies the face of the product simplex a
// candidate lies on.
std::uint64_t face_signature(const std::int64_t* nums, int dim) {
  std::uint64_t sig = 0;
  for (int i = 0; i < dim && i < 32; ++i) {
    if (nums[i] == 0) sig |= std::uint64_t{1} << i;
  }
  return sig;
}

struct BeamSlot {
  std::vector<std::int64_t> nums_p, nums_q;
  double residual = std::numeric_limits<double>::infinity();

  std::uint64_t signature(int m, int n) const {
    return face_signature(nums_p.data(), m) |
           (face_signature(nums_q.data(), n) << 32);
  }
  // Stratum = how many coordinates vanish on each side. Pruning keeps the
  // best slot of every stratum, so faces of any codimension stay represented
  // however well the interior scores.
  std::uint64_t stratum() const {
    std::uint64_t zp = 0, zq = 0;
    for (std::int64_t v : nums_p) zp += v == 0 ? 1 : 0;
    for (std::int64_t v : nums_q) zq += v == 0 ? 1 : 0;
    return (zp << 8) | zq;
  }
  bool lex_less(const BeamSlot& other) const {
    if (nums_p != other.nums_p) return nums_p < other.nums_p;
    return nums_q < other.nums_q;
  }
};

// Grid-argmin refinement with one incumbent per simplex face. The best
// candidate of every zero-pattern survives pruning (up to kBeamWidth slots),
// so an equilibrium supported on a face is not lost when an interior basin
// looks better at coarse meshes. Deterministic throughout: sweeps run in
// lexicographic order, updates are strict improvements, and ranking ties
// break on numerator lists.
class FaceBeamSearch {
 public:
  static constexpr std::size_t kBeamWidth = 16;
  static constexpr int kMaxDriftSteps = 64;

  FaceBeamSearch(const MapUnderTest& F, const MetricConfig& cfg,
                 std::int64_t base_mesh, int max_refinements)
      : map_(F),
        cfg_(cfg),
        sweeper_(F, cfg),
        base_mesh_(base_mesh),
        max_refinements_(max_refinements),
        window_(window_cells(F.rows, F.cols)) {
    base_sweep();
  }

  // Continue refining until the best residual drops below epsilon, the round
  // budget runs out, or the mesh hits the double-precision cap. Returns true
  // on success. Calling again with a smaller epsilon resumes where the
  // previous call stopped; the visited states match a fresh search
  // bit-for-bit because every round is a deterministic function of the
  // round number.
  bool run_until(double epsilon) {
    while (!(best().residual < epsilon)) {
      if (rounds_done_ >= max_refinements_ || mesh_ > kMaxMesh / 2) {
        return false;
      }
      refine_round();
    }
    return true;
  }

  const BeamSlot& best() const { return beam_.front(); }

  ProductPoint slot_point(const BeamSlot& b) const {
    ProductPoint x;
    const double inv = 1.0 / static_cast<double>(mesh_);
    x.row.weights.resize(b.nums_p.size());
    x.col.weights.resize(b.nums_q.size());
    for (std::size_t i = 0; i < b.nums_p.size(); ++i) {
      x.row.weights[i] = static_cast<double>(b.nums_p[i]) * inv;
    }
    for (std::size_t j = 0; j < b.nums_q.size(); ++j) {
      x.col.weights[j] = static_cast<double>(b.nums_q[j]) * inv;
    }
    return x;
  }

  ProductPoint best_point() const { return slot_point(best()); }

  // Every held candidate with residual below eps, best first.
  std::vector<ApproxFixedPoint> candidates_below(double eps) const {
    std::vector<ApproxFixedPoint> out;
    for (const BeamSlot& slot : beam_) {
      if (slot.residual < eps) {
        out.push_back(ApproxFixedPoint{slot_point(slot), slot.residual, eps});
      }
    }
    return out;
  }

 private:
  using SlotMap = std::map<std::uint64_t, BeamSlot>;

  void base_sweep() {
    FactorGrid P = build_full_factor(map_.rows, base_mesh_);
    FactorGrid Q = build_full_factor(map_.cols, base_mesh_);
    if (P.count > kMaxProductPoints / std::max<std::int64_t>(Q.count, 1)) {
      throw InvalidArgument("base grid too large; reduce mesh or dimensions");
    }
    mesh_ = base_mesh_;
    SlotMap slots;
    sweeper_.run(
        P, Q, [](std::int64_t, std::int64_t) { return true; },
        [&](std::int64_t ip, std::int64_t iq, double res) {
          consider(slots, P, ip, Q, iq, res);
        });
    prune(slots);
  }

  void refine_round() {
    mesh_ *= 2;
    ++rounds_done_;
    for (BeamSlot& slot : beam_) {
      // coordinates are unchanged by the doubled mesh (2n / 2k rounds to the
      // same double as n / k), so carried residuals stay valid
      for (auto& v : slot.nums_p) v *= 2;
      for (auto& v : slot.nums_q) v *= 2;
    }
    // Poll until no slot moves at this mesh before doubling again. Without
    // the drift phase the halving windows freeze each slot's absolute
    // position early, and a slot cannot walk the length of a shallow
    // residual valley.
    for (int step = 0; step < kMaxDriftSteps; ++step) {
      SlotMap slots;
      for (const BeamSlot& slot : beam_) consider_slot(slots, slot);
      for (const BeamSlot& slot : beam_) {
        FactorGrid WP = build_window_factor(map_.rows, mesh_,
                                            slot.nums_p.data(), window_);
        FactorGrid WQ = build_window_factor(map_.cols, mesh_,
                                            slot.nums_q.data(), window_);
        sweeper_.run(
            WP, WQ, [](std::int64_t, std::int64_t) { return true; },
            [&](std::int64_t ip, std::int64_t iq, double res) {
              consider(slots, WP, ip, WQ, iq, res);
            });
        suggestion_poll(slots, slot);
      }
      if (!prune(slots)) break;  // stable at this mesh
    }
  }

  // Ask the map for candidate fixed points near a slot, snap them to the
  // current mesh, and enter them like any other grid candidate. Anisotropic
  // residual valleys (conditioning in the thousands happens for games whose
  // equilibria have large denominators) defeat axis-aligned polling; a good
  // suggestion lands the beam inside the final basin in one step, and a bad
  // one simply loses on residual.
  void suggestion_poll(SlotMap& slots, const BeamSlot& slot) {
    if (!map_.suggest) return;
    ProductPoint at;
    const double inv = 1.0 / static_cast<double>(mesh_);
    at.row.weights.resize(slot.nums_p.size());
    at.col.weights.resize(slot.nums_q.size());
    for (std::size_t i = 0; i < slot.nums_p.size(); ++i) {
      at.row.weights[i] = static_cast<double>(slot.nums_p[i]) * inv;
    }
    for (std::size_t j = 0; j < slot.nums_q.size(); ++j) {
      at.col.weights[j] = static_cast<double>(slot.nums_q[j]) * inv;
    }
    for (const ProductPoint& s : map_.suggest(at)) {
      if (static_cast<int>(s.row.dim()) != map_.rows ||
          static_cast<int>(s.col.dim()) != map_.cols) {
        continue;
      }
      BeamSlot cand;
      cand.nums_p = snap_to_mesh(s.row.weights, mesh_);
      cand.nums_q = snap_to_mesh(s.col.weights, mesh_);
      cand.residual = eval_candidate(cand);
      consider_slot(slots, cand);
    }
  }

  double eval_candidate(const BeamSlot& cand) {
    const double inv = 1.0 / static_cast<double>(mesh_);
    std::vector<double> pw(cand.nums_p.size());
    std::vector<double> qw(cand.nums_q.size());
    for (std::size_t i = 0; i < pw.size(); ++i) {
      pw[i] = static_cast<double>(cand.nums_p[i]) * inv;
    }
    for (std::size_t j = 0; j < qw.size(); ++j) {
      qw[j] = static_cast<double>(cand.nums_q[j]) * inv;
    }
    // same canonical arithmetic as the sweep path
    std::vector<double> fp(pw.size()), fq(qw.size());
    map_.apply(pw.data(), qw.data(), fp.data(), fq.data());
    if (cfg_.norm == Norm::kMaxAbs) {
      const double a = kernels::maxabs_diff(fp.data(), pw.data(),
                                            static_cast<int>(pw.size()));
      const double b = kernels::maxabs_diff(fq.data(), qw.data(),
                                            static_cast<int>(qw.size()));
      return b > a ? b : a;
    }
    return std::sqrt(
        kernels::sumsq_diff(fp.data(), pw.data(), static_cast<int>(pw.size())) +
        kernels::sumsq_diff(fq.data(), qw.data(), static_cast<int>(qw.size())));
  }

  // Largest-remainder rounding onto the lattice; keeps the numerator sum
  // exact and never produces a negative weight.
  static std::vector<std::int64_t> snap_to_mesh(const std::vector<double>& w,
                                                std::int64_t mesh) {
    const std::size_t dim = w.size();
    std::vector<std::int64_t> nums(dim);
    std::vector<std::pair<double, std::size_t>> remainders(dim);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double scaled =
          std::max(0.0, std::min(1.0, w[i])) * static_cast<double>(mesh);
      nums[i] = static_cast<std::int64_t>(scaled);
      if (nums[i] > mesh) nums[i] = mesh;
      assigned += nums[i];
      remainders[i] = {scaled - static_cast<double>(nums[i]), i};
    }
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    std::int64_t leftover = mesh - assigned;
    for (std::size_t k = 0; leftover > 0; k = (k + 1) % dim, --leftover) {
      ++nums[remainders[k].second];
    }
    for (std::size_t k = 0; leftover < 0; k = (k + 1) % dim) {
      auto& v = nums[remainders[dim - 1 - k % dim].second];
      if (v > 0) {
        --v;
        ++leftover;
      }
    }
    return nums;
  }

  void consider(SlotMap& slots, const FactorGrid& P, std::int64_t ip,
                const FactorGrid& Q, std::int64_t iq, double res) {
    BeamSlot cand;
    cand.nums_p.assign(P.numerators(ip), P.numerators(ip) + P.dim);
    cand.nums_q.assign(Q.numerators(iq), Q.numerators(iq) + Q.dim);
    cand.residual = res;
    consider_slot(slots, cand);
  }

  void consider_slot(SlotMap& slots, const BeamSlot& cand) {
    const std::uint64_t sig = cand.signature(map_.rows, map_.cols);
    auto [it, inserted] = slots.try_emplace(sig, cand);
    if (!inserted && (cand.residual < it->second.residual ||
                      (cand.residual == it->second.residual &&
                       cand.lex_less(it->second)))) {
      it->second = cand;
    }
  }

  // Replaces the beam with the pruned slot map; returns whether anything
  // changed (exact comparison, all quantities are deterministic). Keeps the
  // best slot of every zero-count stratum first, then fills the remaining
  // width by residual rank.
  bool prune(SlotMap& slots) {
    std::vector<BeamSlot> sorted;
    sorted.reserve(slots.size());
    for (auto& [sig, slot] : slots) sorted.push_back(std::move(slot));
    std::sort(sorted.begin(), sorted.end(),
              [](const BeamSlot& a, const BeamSlot& b) {
                if (a.residual != b.residual) return a.residual < b.residual;
                return a.lex_less(b);
              });
    std::vector<bool> keep(sorted.size(), false);
    std::set<std::uint64_t> seen_strata;
    std::size_t kept = 0;
    for (std::size_t k = 0; k < sorted.size() && kept < kBeamWidth; ++k) {
      if (seen_strata.insert(sorted[k].stratum()).second) {
        keep[k] = true;
        ++kept;
      }
    }
    for (std::size_t k = 0; k < sorted.size() && kept < kBeamWidth; ++k) {
      if (!keep[k]) {
        keep[k] = true;
        ++kept;
      }
    }
    std::vector<BeamSlot> next;
    next.reserve(kept);
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (keep[k]) next.push_back(std::move(sorted[k]));
    }
    bool changed = next.size() != beam_.size();
    for (std::size_t k = 0; !changed && k < next.size(); ++k) {
      changed = next[k].residual != beam_[k].residual ||
                next[k].nums_p != beam_[k].nums_p ||
                next[k].nums_q != beam_[k].nums_q;
    }
    beam_ = std::move(next);
    return changed;
  }

  const MapUnderTest& map_;
  MetricConfig cfg_;
  ProductSweeper sweeper_;
  std::int64_t base_mesh_;
  int max_refinements_;
  std::int64_t window_;
  std::int64_t mesh_ = 0;
  int rounds_done_ = 0;
  std::vector<BeamSlot> beam_;
};

}  // namespace

ProductPoint MapUnderTest::evaluate(const ProductPoint& x) const {
  if (static_cast<int>(x.row.dim()) != rows ||
      static_cast<int>(x.col.dim()) != cols) {
    throw DimensionMismatch("point dimensions do not match the map");
  }
  ProductPoint out;
  out.row.weights.resize(static_cast<std::size_t>(rows));
  out.col.weights.resize(static_cast<std::size_t>(cols));
  apply(x.row.weights.data(), x.col.weights.data(), out.row.weights.data(),
        out.col.weights.data());
  assert(is_valid_product(out) && "map produced an invalid product point");
  return out;
}

NoApproxFixedPointFound::NoApproxFixedPointFound(ProductPoint best_point_,
                                                 double best_residual_,
                                                 double epsilon_)
    : Error("no approximate fixed point with residual < " +
            std::to_string(epsilon_) + " found (best residual " +
            std::to_string(best_residual_) + ")"),
      best_point(std::move(best_point_)),
      best_residual(best_residual_),
      epsilon(epsilon_) {}

BudgetExhausted::BudgetExhausted(RefinementTrace partial_)
    : Error("refinement stage budget exhausted before reaching the epsilon "
            "target"),
      partial(std::move(partial_)) {}

double residual(const MapUnderTest& F, const ProductPoint& x,
                const MetricConfig& cfg) {
  return distance(x, F.evaluate(x), cfg);
}

namespace {

void check_search_args(double epsilon, std::int64_t base_mesh,
                       int max_refinements) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (base_mesh < 1) throw InvalidArgument("base mesh must be >= 1");
  if (max_refinements < 0) {
    throw InvalidArgument("max refinements must be >= 0");
  }
}

}  // namespace

ApproxFixedPoint find_approx_fixed_point(const MapUnderTest& F, double epsilon,
                                         std::int64_t base_mesh,
                                         int max_refinements,
                                         const MetricConfig& cfg) {
  check_map(F);
  check_search_args(epsilon, base_mesh, max_refinements);
  FaceBeamSearch search(F, cfg, base_mesh, max_refinements);
  if (!search.run_until(epsilon)) {
    throw NoApproxFixedPointFound(search.best_point(), search.best().residual,
                                  epsilon);
  }
  return ApproxFixedPoint{search.best_point(), search.best().residual,
                          epsilon};
}

namespace {

void finish_trace(RefinementTrace& trace, double delta_target,
                  const MetricConfig& cfg, bool target_reached) {
  const std::size_t n = trace.iterates.size();
  trace.cauchy_moduli.assign(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double acc = (k + 1 < n) ? trace.cauchy_moduli[k + 1] : 0.0;
    for (std::size_t j = k + 1; j < n; ++j) {
      const double d =
          distance(trace.iterates[k].point, trace.iterates[j].point, cfg);
      acc = d > acc ? d : acc;
    }
    trace.cauchy_moduli[k] = acc;
  }
  if (n > 0) trace.final_point = trace.iterates.back().point;
  bool close = true;
  if (n >= 2) {
    close = distance(trace.iterates[n - 1].point, trace.iterates[n - 2].point,
                     cfg) <= delta_target;
  }
  trace.converged = target_reached && close;
}

}  // namespace

namespace engine_detail {

ScheduleResult refine_schedule(const MapUnderTest& F, double epsilon_target,
                               double delta_target, int max_stages,
                               const MetricConfig& cfg, std::int64_t base_mesh,
                               int max_refinements,
                               const StageSelector& selector) {
  check_map(F);
  if (!(epsilon_target > 0.0)) {
    throw InvalidArgument("epsilon target must be positive");
  }
  if (!(delta_target > 0.0)) {
    throw InvalidArgument("delta target must be positive");
  }
  if (max_stages < 1) throw InvalidArgument("max stages must be >= 1");
  check_search_args(epsilon_target, base_mesh, max_refinements);

  // One continuous search serves every stage: a stage-n restart would replay
  // the identical deterministic rounds and stop at the same state, so
  // resuming from the previous stage's state yields bit-identical iterates
  // at a fraction of the cost.
  FaceBeamSearch search(F, cfg, base_mesh, max_refinements);
  RefinementTrace trace;
  bool target_reached = false;
  bool stop_satisfied = false;
  std::optional<ApproxFixedPoint> selected;
  for (int n = 0; n < max_stages; ++n) {
    const double eps_n = std::ldexp(1.0, -n);
    if (!search.run_until(eps_n)) {
      // Past the target the schedule is only being extended to satisfy the
      // caller's selector; running out of grid is not a stage failure.
      if (target_reached) break;
      throw NoApproxFixedPointFound(search.best_point(),
                                    search.best().residual, eps_n);
    }
    trace.epsilon_schedule.push_back(eps_n);
    trace.iterates.push_back(ApproxFixedPoint{search.best_point(),
                                              search.best().residual, eps_n});
    if (!(eps_n < epsilon_target)) continue;
    target_reached = true;
    if (!selector) {
      stop_satisfied = true;
      break;
    }
    std::vector<ApproxFixedPoint> candidates =
        search.candidates_below(epsilon_target);
    const int pick = selector(candidates, /*final_call=*/false);
    if (pick >= 0 && pick < static_cast<int>(candidates.size())) {
      selected = std::move(candidates[static_cast<std::size_t>(pick)]);
      stop_satisfied = true;
      break;
    }
  }
  if (target_reached && selector && !selected) {
    // No stage satisfied the selector and nothing is left to refine: offer
    // the final candidate set once more.
    std::vector<ApproxFixedPoint> candidates =
        search.candidates_below(epsilon_target);
    const int pick = selector(candidates, /*final_call=*/true);
    if (pick >= 0 && pick < static_cast<int>(candidates.size())) {
      selected = std::move(candidates[static_cast<std::size_t>(pick)]);
      stop_satisfied = true;
    }
  }
  finish_trace(trace, delta_target, cfg, target_reached);
  if (!target_reached) {
    throw BudgetExhausted(std::move(trace));
  }
  return ScheduleResult{std::move(trace), stop_satisfied, std::move(selected)};
}

}  // namespace engine_detail

RefinementTrace refine_to_fixed_point(const MapUnderTest& F,
                                      double epsilon_target,
                                      double delta_target, int max_stages,
                                      const MetricConfig& cfg,
                                      std::int64_t base_mesh,
                                      int max_refinements) {
  return engine_detail::refine_schedule(F, epsilon_target, delta_target,
                                        max_stages, cfg, base_mesh,
                                        max_refinements, nullptr)
      .trace;
}

namespace {

struct DiameterScan {
  double metric_best = 0.0;  // squared for the Euclidean norm
  std::int64_t a = -1;
  std::int64_t b = -1;
};

// Exact max pairwise metric over the cloud with first-attaining witness,
// identical to the naive double loop; bounding boxes only skip blocks that
// provably cannot exceed the current best.
DiameterScan cloud_diameter(int dim, std::int64_t count,
                            const std::vector<double>& soa, bool max_norm) {
  DiameterScan out;
  if (count <= 0) return out;
  constexpr std::int64_t kBlock = 512;
  const std::int64_t nblocks = (count + kBlock - 1) / kBlock;
  std::vector<double> lo(static_cast<std::size_t>(nblocks) * dim);
  std::vector<double> hi(static_cast<std::size_t>(nblocks) * dim);
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t j0 = b * kBlock;
    const std::int64_t j1 = std::min(count, j0 + kBlock);
    for (int d = 0; d < dim; ++d) {
      const double* col =
          soa.data() + static_cast<std::size_t>(d) * count;
      double mn = col[j0], mx = col[j0];
      for (std::int64_t j = j0 + 1; j < j1; ++j) {
        mn = col[j] < mn ? col[j] : mn;
        mx = col[j] > mx ? col[j] : mx;
      }
      lo[static_cast<std::size_t>(b) * dim + d] = mn;
      hi[static_cast<std::size_t>(b) * dim + d] = mx;
    }
  }

  std::vector<double> query(static_cast<std::size_t>(dim));
  double best = -1.0;
  for (std::int64_t i = 0; i < count; ++i) {
    for (int d = 0; d < dim; ++d) {
      query[static_cast<std::size_t>(d)] =
          soa[static_cast<std::size_t>(d) * count + i];
    }
    for (std::int64_t b = i / kBlock; b < nblocks; ++b) {
      const std::int64_t j0 = std::max(i + 1, b * kBlock);
      const std::int64_t j1 = std::min(count, (b + 1) * kBlock);
      if (j0 >= j1) continue;
      if (best >= 0.0) {
        double ub = 0.0;
        for (int d = 0; d < dim; ++d) {
          const double q = query[static_cast<std::size_t>(d)];
          const double dl =
              std::abs(q - lo[static_cast<std::size_t>(b) * dim + d]);
          const double dh =
              std::abs(q - hi[static_cast<std::size_t>(b) * dim + d]);
          const double w = dl > dh ? dl : dh;
          if (max_norm) {
            ub = w > ub ? w : ub;
          } else {
            ub += w * w;
          }
        }
        if (ub <= best) continue;
      }
      const double block_max = kernels::block_metric_max(
          dim, soa.data(), static_cast<std::size_t>(count),
          static_cast<std::size_t>(j0), static_cast<std::size_t>(j1),
          query.data(), max_norm);
      if (block_max > best) {
        for (std::int64_t j = j0; j < j1; ++j) {
          const double d = kernels::pair_metric(
              dim, soa.data(), static_cast<std::size_t>(count),
              static_cast<std::size_t>(j), query.data(), max_norm);
          if (d > best) {
            best = d;
            out.a = i;
            out.b = j;
          }
        }
      }
    }
  }
  out.metric_best = best > 0.0 ? best : 0.0;
  return out;
}

}  // namespace

UniquenessReport probe_sequential_uniqueness(const MapUnderTest& F,
                                             double delta,
                                             const std::vector<double>& epsilons,
                                             std::int64_t mesh,
                                             const MetricConfig& cfg) {
  check_map(F);
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (mesh < 1) throw InvalidArgument("mesh must be >= 1");
  if (epsilons.empty()) throw InvalidArgument("epsilon list must be nonempty");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) {
      throw InvalidArgument("epsilon list entries must be positive");
    }
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) {
      throw InvalidArgument("epsilon list must be strictly decreasing");
    }
  }

  FactorGrid P = build_full_factor(F.rows, mesh);
  FactorGrid Q = build_full_factor(F.cols, mesh);
  if (P.count > kMaxProductPoints / std::max<std::int64_t>(Q.count, 1)) {
    throw InvalidArgument("probe grid too large; reduce mesh or dimensions");
  }

  struct Member {
    std::int64_t ip, iq;
    double residual;
  };
  std::vector<Member> members;
  const double eps_max = epsilons.front();
  double min_res = std::numeric_limits<double>::infinity();
  std::int64_t min_ip = 0, min_iq = 0;
  bool any = false;

  ProductSweeper sweeper(F, cfg);
  sweeper.run(
      P, Q, [](std::int64_t, std::int64_t) { return true; },
      [&](std::int64_t ip, std::int64_t iq, double res) {
        if (!any || res < min_res) {
          any = true;
          min_res = res;
          min_ip = ip;
          min_iq = iq;
        }
        if (res < eps_max) {
          if (static_cast<std::int64_t>(members.size()) >= kMaxProbeMembers) {
            throw InvalidArgument(
                "probe near-fixed-point set too large; reduce mesh or raise "
                "epsilons");
          }
          members.push_back(Member{ip, iq, res});
        }
      });

  UniquenessReport report;
  report.delta = delta;
  report.mesh = mesh;
  const bool max_norm = use_max_norm(cfg);
  const int dim = F.rows + F.cols;
  const ProductPoint fallback_witness = point_from_factors(P, min_ip, Q, min_iq);

  std::vector<std::size_t> subset(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) subset[k] = k;
  for (double eps : epsilons) {
    std::vector<std::size_t> keep;
    keep.reserve(subset.size());
    for (std::size_t idx : subset) {
      if (members[idx].residual < eps) keep.push_back(idx);
    }
    subset = std::move(keep);

    SeparationRow row;
    row.epsilon = eps;
    row.member_count = static_cast<std::int64_t>(subset.size());
    if (subset.empty()) {
      row.diameter = 0.0;
      row.witness_a = fallback_witness;
      row.witness_b = fallback_witness;
    } else {
      const std::int64_t cnt = static_cast<std::int64_t>(subset.size());
      std::vector<double> cloud(static_cast<std::size_t>(cnt) * dim);
      for (std::int64_t c = 0; c < cnt; ++c) {
        const Member& mem = members[subset[static_cast<std::size_t>(c)]];
        const double* pr = P.point(mem.ip);
        const double* qc = Q.point(mem.iq);
        for (int d = 0; d < F.rows; ++d) {
          cloud[static_cast<std::size_t>(d) * cnt + c] = pr[d];
        }
        for (int d = 0; d < F.cols; ++d) {
          cloud[static_cast<std::size_t>(F.rows + d) * cnt + c] = qc[d];
        }
      }
      DiameterScan scan = cloud_diameter(dim, cnt, cloud, max_norm);
      if (scan.a < 0) {
        row.diameter = 0.0;
        const Member& only = members[subset[0]];
        row.witness_a = point_from_factors(P, only.ip, Q, only.iq);
        row.witness_b = row.witness_a;
      } else {
        row.diameter =
            max_norm ? scan.metric_best : std::sqrt(scan.metric_best);
        const Member& ma = members[subset[static_cast<std::size_t>(scan.a)]];
        const Member& mb = members[subset[static_cast<std::size_t>(scan.b)]];
        row.witness_a = point_from_factors(P, ma.ip, Q, ma.iq);
        row.witness_b = point_from_factors(P, mb.ip, Q, mb.iq);
      }
    }
    report.rows.push_back(std::move(row));
  }

  // Verdict. Nested subsets make the measured diameters nonincreasing
  // exactly; the 1e-12 slack only covers the final sqrt.
  bool nonincreasing = true;
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    if (report.rows[k].diameter > report.rows[k - 1].diameter + 1e-12) {
      nonincreasing = false;
    }
  }
  const double final_diameter = report.rows.back().diameter;
  bool stagnated = false;
  if (report.rows.size() >= 2) {
    const double prev = report.rows[report.rows.size() - 2].diameter;
    stagnated = std::abs(final_diameter - prev) <= 1e-9;
  }
  if (nonincreasing && final_diameter <= delta) {
    report.verdict = UniquenessVerdict::kConsistent;
  } else if (final_diameter > delta && stagnated) {
    report.verdict = UniquenessVerdict::kViolated;
  } else {
    report.verdict = UniquenessVerdict::kInconclusive;
  }
  return report;
}

}  // namespace fixmax
