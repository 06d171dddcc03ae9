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
// End-to-end tests against the installed CLI binary: exit-code contract,
// report shapes, determinism, and the self-verification loop.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fixmax/report.hpp"
#include "test_util.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "fixmax_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

CmdResult run_cli(const std::string& args) {
  const fs::path dir = work_dir();
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = std::string(FIXMAX_CLI_PATH) + " " + args + " > " +
                          out_file.string() + " 2> " + err_file.string();
  const int rc = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

fs::path write_game(const std::string& name, const std::string& payload) {
  const fs::path p = work_dir() / name;
  spit(p, payload);
  return p;
}

}  // namespace

TEST_CASE("solve emits a certified matching-pennies report and exit 0") {
  const fs::path game =
      write_game("mp.json", "{\"payoffs\": [[1,-1],[-1,1]]}");
  const CmdResult r = run_cli("solve " + game.string());
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(r.out);
  CHECK(std::abs(rep.at("value").get<double>()) <= 1e-2);
  CHECK(std::abs(rep.at("profile").at("row")[0].get<double>() - 0.5) <= 1e-2);
  CHECK(std::abs(rep.at("profile").at("col")[0].get<double>() - 0.5) <= 1e-2);
  CHECK(rep.at("converged").get<bool>());
  CHECK(rep.at("config").at("mesh").get<int>() == 16);
  CHECK(rep.at("config").at("norm").get<std::string>() == "euclidean");
  CHECK(rep.at("duality_gap").get<double>() >= -1e-9);
}

TEST_CASE("solve output is byte-identical across runs") {
  const fs::path game =
      write_game("det.json", "{\"payoffs\": [[3,-1],[-2,1]]}");
  const CmdResult a = run_cli("solve " + game.string());
  const CmdResult b = run_cli("solve " + game.string());
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());
}

TEST_CASE("solve input errors exit 2 with a diagnostic") {
  const fs::path ragged =
      write_game("ragged.json", "{\"payoffs\": [[1,2],[3]]}");
  const CmdResult r = run_cli("solve " + ragged.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("ragged payoff matrix") != std::string::npos);
  CHECK(r.out.empty());

  const fs::path textual =
      write_game("text.json", "{\"payoffs\": [[1,\"two\"]]}");
  CHECK(run_cli("solve " + textual.string()).exit_code == 2);

  CHECK(run_cli("solve /nonexistent/game.json").exit_code == 2);
  CHECK(run_cli("solve " + ragged.string() + " --norm manhattan").exit_code ==
        2);
  CHECK(run_cli("nonsense").exit_code == 2);
  CHECK(run_cli("solve").exit_code == 2);

  const fs::path ok = write_game("ok.json", "{\"payoffs\": [[1,-1],[-1,1]]}");
  CHECK(run_cli("solve " + ok.string() + " --mesh 0").exit_code == 2);
  CHECK(run_cli("solve " + ok.string() + " --eps -1").exit_code == 2);
}

TEST_CASE("solve exits 3 when the certificate cannot be met in budget") {
  const fs::path game =
      write_game("uncert.json", "{\"payoffs\": [[3,-1],[-2,1]]}");
  const CmdResult r = run_cli("solve " + game.string() + " --max-stages 15");
  CHECK(r.exit_code == 3);
  const json rep = json::parse(r.out);
  CHECK(!rep.at("converged").get<bool>());
  CHECK(r.err.find("not certified") != std::string::npos);
}

TEST_CASE("solve reports an exhausted budget with exit 3 and converged false") {
  const fs::path game =
      write_game("mp3.json", "{\"payoffs\": [[1,-1],[-1,1]]}");
  const CmdResult r = run_cli("solve " + game.string() + " --max-stages 3");
  CHECK(r.exit_code == 3);
  const json rep = json::parse(r.out);
  CHECK(!rep.at("converged").get<bool>());
  CHECK(r.err.find("budget exhausted") != std::string::npos);
}

TEST_CASE("solve on a constant game returns its payoff") {
  const fs::path game =
      write_game("const.json", "{\"payoffs\": [[3.25,3.25],[3.25,3.25]]}");
  const CmdResult r = run_cli("solve " + game.string());
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep.at("value").get<double>() == 3.25);
  CHECK(rep.at("lambda").get<double>() == 0.0);
  CHECK(rep.at("lambda_prime").get<double>() == 0.0);
}

TEST_CASE("probe exit codes follow the verdict") {
  const fs::path mp = write_game("mp_probe.json", "{\"payoffs\": [[1,-1],[-1,1]]}");
  const CmdResult consistent =
      run_cli("probe " + mp.string() + " --mesh 100 --delta 0.1");
  CHECK(consistent.exit_code == 0);
  const json rep = json::parse(consistent.out);
  CHECK(rep.at("verdict").get<std::string>() == "consistent");
  const auto& rows = rep.at("rows");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].at("epsilon").get<double>() <
          rows[k - 1].at("epsilon").get<double>());
  }

  const fs::path constant =
      write_game("const_probe.json", "{\"payoffs\": [[2,2],[2,2]]}");
  const CmdResult violated =
      run_cli("probe " + constant.string() + " --mesh 50 --delta 0.1");
  CHECK(violated.exit_code == 4);
  CHECK(json::parse(violated.out).at("verdict").get<std::string>() ==
        "violated");

  CHECK(run_cli("probe " + mp.string() + " --eps-list 1e-1,1e-1").exit_code ==
        2);
  CHECK(run_cli("probe " + mp.string() + " --eps-list bogus").exit_code == 2);
}

TEST_CASE("oracle brackets matching pennies tightly at mesh 200") {
  const fs::path mp = write_game("mp_oracle.json", "{\"payoffs\": [[1,-1],[-1,1]]}");
  const CmdResult r = run_cli("oracle " + mp.string() + " --mesh 200");
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(r.out);
  const double lower = rep.at("lower").get<double>();
  const double upper = rep.at("upper").get<double>();
  CHECK(lower <= 0.0);
  CHECK(upper >= 0.0);
  CHECK(upper - lower <= 0.02);
  CHECK(rep.at("mesh").get<int>() == 200);
}

TEST_CASE("oracle enforces its limits with exit 2") {
  std::string big = "{\"payoffs\": [";
  for (int i = 0; i < 5; ++i) {
    big += i > 0 ? ",[1,2,3,4,5]" : "[1,2,3,4,5]";
  }
  big += "]}";
  const fs::path game = write_game("big.json", big);
  const CmdResult r = run_cli("oracle " + game.string() + " --mesh 10");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("oracle limit exceeded") != std::string::npos);
}

TEST_CASE("demo runs the end-to-end comparison") {
  const CmdResult r = run_cli("demo");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("solver") != std::string::npos);
  CHECK(r.out.find("closed form") != std::string::npos);
}

TEST_CASE("verify accepts solver reports and rejects tampered ones") {
  const fs::path game =
      write_game("verify_game.json", "{\"payoffs\": [[3,-1],[-2,1]]}");
  const CmdResult solved = run_cli("solve " + game.string());
  REQUIRE(solved.exit_code == 0);
  const fs::path report = work_dir() / "verify_report.json";
  spit(report, solved.out);

  const CmdResult ok = run_cli("verify " + game.string() + " " + report.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("verified") != std::string::npos);

  std::string tampered = solved.out;
  const std::string key = "\"value\":";
  tampered.insert(tampered.find(key) + key.size(), "9");
  const fs::path bad = work_dir() / "tampered_report.json";
  spit(bad, tampered);
  const CmdResult caught = run_cli("verify " + game.string() + " " + bad.string());
  CHECK(caught.exit_code == 1);
  CHECK(caught.err.find("deviation") != std::string::npos);
}

TEST_CASE("solve honors the max norm flag") {
  const fs::path game =
      write_game("mp_max.json", "{\"payoffs\": [[1,-1],[-1,1]]}");
  const CmdResult r = run_cli("solve " + game.string() + " --norm max");
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep.at("config").at("norm").get<std::string>() == "max");
  CHECK(std::abs(rep.at("value").get<double>()) <= 1e-2);
}
