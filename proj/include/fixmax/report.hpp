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
// Game-file parsing and machine-readable reports. Reports are emitted with a
// fixed key order and decimal numbers at 17 significant digits, so identical
// inputs produce byte-identical documents and every double survives the
// round trip.

#ifndef FIXMAX_REPORT_HPP
#define FIXMAX_REPORT_HPP

#include <optional>
#include <string>

#include "fixmax/engine.hpp"
#include "fixmax/game.hpp"
#include "fixmax/oracle.hpp"

namespace fixmax {

struct GameFile {
  ZeroSumGame game;
  std::optional<std::string> name;
};

// {"payoffs": [[...], ...], "name": optional string}
GameFile parse_game(const std::string& json_text);
GameFile load_game(const std::string& path);
std::string game_to_json(const ZeroSumGame& g,
                         const std::optional<std::string>& name = {});

// Number formatting used by every emitter: shortest %.17g decimal form.
std::string format_double(double v);

const char* norm_name(Norm n);
Norm parse_norm(const std::string& name);

struct SolveConfig {
  double epsilon_target = 1e-4;
  double delta_target = 1e-2;
  std::int64_t base_mesh = kDefaultBaseMesh;
  int max_stages = 40;
  int max_refinements = kDefaultMaxRefinements;
  Norm norm = Norm::kEuclidean;

  SolveOptions to_options() const;
};

// The solve report: profile, value, excesses, guarantees, duality gap,
// residual, converged flag, and an echo of the configuration (including the
// epsilon schedule that was actually run).
std::string emit_solve_report(const EquilibriumResult& result, bool converged,
                              const SolveConfig& cfg);

std::string emit_probe_report(const UniquenessReport& report,
                              const std::vector<double>& epsilons,
                              const SolveConfig& cfg);

std::string emit_oracle_report(const ValueBracket& bracket);

const char* verdict_name(UniquenessVerdict v);

// Re-reads a solve report and recomputes every derived number from the
// profile it contains. Returns a list of human-readable deviations beyond
// `tolerance`; empty means the report is self-consistent.
std::vector<std::string> verify_solve_report(const ZeroSumGame& g,
                                             const std::string& report_json,
                                             double tolerance = 1e-9);

}  // namespace fixmax

#endif  // FIXMAX_REPORT_HPP
