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
// Command-line front end. Exit codes are a stable contract:
//   0  success
//   2  input error (malformed file, bad flags, oracle limits)
//   3  solve did not certify (report still emitted, converged=false)
//   4  uniqueness probe verdict "violated"
//   1  verify found deviations / demo mismatch / internal error

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixmax/engine.hpp"
#include "fixmax/game.hpp"
#include "fixmax/kernels.hpp"
#include "fixmax/oracle.hpp"
#include "fixmax/report.hpp"

namespace {

using namespace fixmax;

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("cannot parse epsilon list entry '" + item + "'");
    }
  }
  if (out.empty()) throw ParseError("empty epsilon list");
  return out;
}

int cmd_solve(const std::string& path, const SolveConfig& cfg) {
  const GameFile gf = load_game(path);
  try {
    const EquilibriumResult result = solve_game(gf.game, cfg.to_options());
    std::fputs(emit_solve_report(result, result.trace.converged, cfg).c_str(),
               stdout);
    return 0;
  } catch (const EquilibriumNotCertified& e) {
    std::fputs(emit_solve_report(e.partial, false, cfg).c_str(), stdout);
    std::fprintf(stderr, "not certified: %s\n", e.what());
    return 3;
  } catch (const BudgetExhausted& e) {
    EquilibriumResult partial =
        evaluate_profile(gf.game, e.partial.final_point, cfg.to_options().metric);
    partial.trace = e.partial;
    std::fputs(emit_solve_report(partial, false, cfg).c_str(), stdout);
    std::fprintf(stderr, "budget exhausted: %s\n", e.what());
    return 3;
  } catch (const NoApproxFixedPointFound& e) {
    const EquilibriumResult partial =
        evaluate_profile(gf.game, e.best_point, cfg.to_options().metric);
    std::fputs(emit_solve_report(partial, false, cfg).c_str(), stdout);
    std::fprintf(stderr, "no approximate fixed point: %s\n", e.what());
    return 3;
  }
}

int cmd_probe(const std::string& path, double delta,
              const std::string& eps_list, std::int64_t mesh,
              SolveConfig cfg) {
  const GameFile gf = load_game(path);
  const std::vector<double> epsilons = parse_eps_list(eps_list);
  const UniquenessReport report = probe_equilibrium_uniqueness(
      gf.game, delta, epsilons, mesh, cfg.to_options().metric);
  cfg.base_mesh = mesh;  // echoed into the report
  std::fputs(emit_probe_report(report, epsilons, cfg).c_str(), stdout);
  return report.verdict == UniquenessVerdict::kViolated ? 4 : 0;
}

int cmd_oracle(const std::string& path, std::int64_t mesh) {
  const GameFile gf = load_game(path);
  const ValueBracket bracket = grid_minimax(gf.game, mesh);
  std::fputs(emit_oracle_report(bracket).c_str(), stdout);
  return 0;
}

int cmd_demo() {
  const ZeroSumGame pennies =
      ZeroSumGame::from_rows({{1.0, -1.0}, {-1.0, 1.0}});
  std::printf("matching pennies demo (kernel backend: %s)\n",
              kernels::backend_name(kernels::active_backend()));

  SolveConfig cfg;
  const EquilibriumResult result = solve_game(pennies, cfg.to_options());
  std::printf("solver:     value % .6f at p=(%.6f, %.6f), q=(%.6f, %.6f)\n",
              result.value, result.profile.row.weights[0],
              result.profile.row.weights[1], result.profile.col.weights[0],
              result.profile.col.weights[1]);
  std::printf("            lambda %.3e  lambda' %.3e  residual %.3e\n",
              result.lambda, result.lambda_prime, result.residual);

  const Solution2x2 exact = closed_form_2x2(pennies);
  std::printf("closed form: value % .6f at p=(%.6f, %.6f), q=(%.6f, %.6f)\n",
              exact.value, exact.profile.row.weights[0],
              exact.profile.row.weights[1], exact.profile.col.weights[0],
              exact.profile.col.weights[1]);

  const ValueBracket bracket = grid_minimax(pennies, 200);
  std::printf("grid bracket (mesh 200): [% .6f, % .6f]\n", bracket.lower,
              bracket.upper);

  const double gap = std::abs(result.value - exact.value);
  std::printf("solver vs closed form: |diff| = %.3e -> %s\n", gap,
              gap <= 1e-2 ? "ok" : "MISMATCH");
  return gap <= 1e-2 ? 0 : 1;
}

int cmd_verify(const std::string& game_path, const std::string& report_path) {
  const GameFile gf = load_game(game_path);
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw ParseError("cannot open report file: " + report_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::vector<std::string> deviations =
      verify_solve_report(gf.game, ss.str());
  if (deviations.empty()) {
    std::printf("report verified: all quantities reproduce within 1e-9\n");
    return 0;
  }
  for (const std::string& d : deviations) {
    std::fprintf(stderr, "deviation: %s\n", d.c_str());
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixmax: zero-sum game solver via constructive fixed points"};
  app.require_subcommand(1);

  std::string game_path, report_path;
  SolveConfig cfg;
  double probe_delta = 0.1;
  std::string eps_list = "1e-1,1e-2,1e-3";
  std::string norm = "euclidean";
  std::int64_t oracle_mesh = 200;
  std::int64_t probe_mesh = 64;

  CLI::App* solve = app.add_subcommand("solve", "solve a game file");
  solve->add_option("game", game_path, "game JSON file")->required();
  solve->add_option("--eps", cfg.epsilon_target, "residual target")
      ->capture_default_str();
  solve->add_option("--delta", cfg.delta_target, "Cauchy closeness target")
      ->capture_default_str();
  solve->add_option("--mesh", cfg.base_mesh, "base grid mesh")
      ->capture_default_str();
  solve->add_option("--norm", norm, "metric: euclidean or max")
      ->capture_default_str();
  solve->add_option("--max-stages", cfg.max_stages, "schedule stage budget")
      ->capture_default_str();
  solve
      ->add_option("--max-refinements", cfg.max_refinements,
                   "local refinement rounds per stage")
      ->capture_default_str();

  CLI::App* probe =
      app.add_subcommand("probe", "probe sequential uniqueness on a grid");
  probe->add_option("game", game_path, "game JSON file")->required();
  probe->add_option("--delta", probe_delta, "closeness threshold")
      ->capture_default_str();
  probe->add_option("--eps-list", eps_list, "decreasing residual thresholds")
      ->capture_default_str();
  probe->add_option("--mesh", probe_mesh, "grid mesh")->capture_default_str();
  probe->add_option("--norm", norm, "metric: euclidean or max")
      ->capture_default_str();

  CLI::App* oracle =
      app.add_subcommand("oracle", "bracket the game value on a grid");
  oracle->add_option("game", game_path, "game JSON file")->required();
  oracle->add_option("--mesh", oracle_mesh, "grid mesh")
      ->capture_default_str();

  CLI::App* demo =
      app.add_subcommand("demo", "run the built-in matching-pennies example");

  CLI::App* verify =
      app.add_subcommand("verify", "recompute a solve report from its profile");
  verify->add_option("game", game_path, "game JSON file")->required();
  verify->add_option("report", report_path, "solve report JSON file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.norm = parse_norm(norm);
    if (solve->parsed()) return cmd_solve(game_path, cfg);
    if (probe->parsed())
      return cmd_probe(game_path, probe_delta, eps_list, probe_mesh, cfg);
    if (oracle->parsed()) return cmd_oracle(game_path, oracle_mesh);
    if (demo->parsed()) return cmd_demo();
    if (verify->parsed()) return cmd_verify(game_path, report_path);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const OracleLimitExceeded& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const InvalidStrategy& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const DimensionMismatch& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
