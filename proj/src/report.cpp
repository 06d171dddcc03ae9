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

#include "fixmax/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fixmax {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ParseError("invalid JSON");
  return j;
}

void append_weights(std::string& out, const std::vector<double>& w) {
  out += '[';
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(w[i]);
  }
  out += ']';
}

void append_profile(std::string& out, const ProductPoint& x) {
  out += "{\"row\":";
  append_weights(out, x.row.weights);
  out += ",\"col\":";
  append_weights(out, x.col.weights);
  out += '}';
}

std::string escape_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
  return out;
}

std::vector<double> parse_weight_array(const json& arr, const char* what) {
  if (!arr.is_array() || arr.empty()) {
    throw ParseError(std::string(what) + " must be a nonempty array");
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) {
      throw ParseError(std::string(what) + " entries must be numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* norm_name(Norm n) {
  return n == Norm::kMaxAbs ? "max" : "euclidean";
}

Norm parse_norm(const std::string& name) {
  if (name == "euclidean") return Norm::kEuclidean;
  if (name == "max") return Norm::kMaxAbs;
  throw ParseError("unknown norm '" + name + "' (expected euclidean or max)");
}

GameFile parse_game(const std::string& json_text) {
  const json j = parse_json(json_text);
  if (!j.is_object() || !j.contains("payoffs")) {
    throw ParseError("game file must be an object with a \"payoffs\" key");
  }
  const json& rows = j.at("payoffs");
  if (!rows.is_array() || rows.empty()) {
    throw ParseError("\"payoffs\" must be a nonempty array of rows");
  }
  std::vector<std::vector<double>> data;
  std::size_t width = 0;
  for (const auto& row : rows) {
    if (!row.is_array() || row.empty()) {
      throw ParseError("payoff rows must be nonempty arrays");
    }
    if (width == 0) width = row.size();
    if (row.size() != width) throw ParseError("ragged payoff matrix");
    std::vector<double> r;
    r.reserve(row.size());
    for (const auto& v : row) {
      if (!v.is_number()) throw ParseError("non-numeric payoff entry");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw ParseError("payoff entries must be finite");
      r.push_back(x);
    }
    data.push_back(std::move(r));
  }
  GameFile out;
  out.game = ZeroSumGame::from_rows(data);
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ParseError("\"name\" must be a string");
    out.name = j.at("name").get<std::string>();
  }
  return out;
}

GameFile load_game(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open game file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_game(ss.str());
}

std::string game_to_json(const ZeroSumGame& g,
                         const std::optional<std::string>& name) {
  std::string out = "{";
  if (name) {
    out += "\"name\":" + escape_string(*name) + ",";
  }
  out += "\"payoffs\":[";
  for (int i = 0; i < g.rows; ++i) {
    if (i > 0) out += ',';
    out += '[';
    for (int j = 0; j < g.cols; ++j) {
      if (j > 0) out += ',';
      out += format_double(g.at(i, j));
    }
    out += ']';
  }
  out += "]}";
  return out;
}

SolveOptions SolveConfig::to_options() const {
  SolveOptions opts;
  opts.epsilon_target = epsilon_target;
  opts.delta_target = delta_target;
  opts.base_mesh = base_mesh;
  opts.max_stages = max_stages;
  opts.max_refinements = max_refinements;
  opts.metric.norm = norm;
  return opts;
}

namespace {

void append_config(std::string& out, const SolveConfig& cfg,
                   const std::vector<double>& schedule) {
  out += "\"config\":{\"eps\":" + format_double(cfg.epsilon_target);
  out += ",\"delta\":" + format_double(cfg.delta_target);
  out += ",\"mesh\":" + std::to_string(cfg.base_mesh);
  out += ",\"norm\":\"" + std::string(norm_name(cfg.norm)) + "\"";
  out += ",\"max_stages\":" + std::to_string(cfg.max_stages);
  out += ",\"max_refinements\":" + std::to_string(cfg.max_refinements);
  out += ",\"schedule\":[";
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(schedule[i]);
  }
  out += "]}";
}

}  // namespace

std::string emit_solve_report(const EquilibriumResult& result, bool converged,
                              const SolveConfig& cfg) {
  std::string out = "{\"profile\":";
  append_profile(out, result.profile);
  out += ",\"value\":" + format_double(result.value);
  out += ",\"lambda\":" + format_double(result.lambda);
  out += ",\"lambda_prime\":" + format_double(result.lambda_prime);
  out += ",\"v_A\":" + format_double(result.v_a);
  out += ",\"v_B\":" + format_double(result.v_b);
  out += ",\"duality_gap\":" + format_double(result.duality_gap);
  out += ",\"residual\":" + format_double(result.residual);
  out += ",\"converged\":";
  out += converged ? "true" : "false";
  out += ',';
  append_config(out, cfg, result.trace.epsilon_schedule);
  out += "}\n";
  return out;
}

const char* verdict_name(UniquenessVerdict v) {
  switch (v) {
    case UniquenessVerdict::kConsistent: return "consistent";
    case UniquenessVerdict::kViolated: return "violated";
    default: return "inconclusive";
  }
}

std::string emit_probe_report(const UniquenessReport& report,
                              const std::vector<double>& epsilons,
                              const SolveConfig& cfg) {
  std::string out = "{\"delta\":" + format_double(report.delta);
  out += ",\"mesh\":" + std::to_string(report.mesh);
  out += ",\"norm\":\"" + std::string(norm_name(cfg.norm)) + "\"";
  out += ",\"eps_list\":[";
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(epsilons[i]);
  }
  out += "],\"rows\":[";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const SeparationRow& row = report.rows[i];
    if (i > 0) out += ',';
    out += "{\"epsilon\":" + format_double(row.epsilon);
    out += ",\"diameter\":" + format_double(row.diameter);
    out += ",\"count\":" + std::to_string(row.member_count);
    out += ",\"witness_a\":";
    append_profile(out, row.witness_a);
    out += ",\"witness_b\":";
    append_profile(out, row.witness_b);
    out += '}';
  }
  out += "],\"verdict\":\"";
  out += verdict_name(report.verdict);
  out += "\"}\n";
  return out;
}

std::string emit_oracle_report(const ValueBracket& bracket) {
  std::string out = "{\"lower\":" + format_double(bracket.lower);
  out += ",\"upper\":" + format_double(bracket.upper);
  out += ",\"mesh\":" + std::to_string(bracket.mesh);
  out += "}\n";
  return out;
}

std::vector<std::string> verify_solve_report(const ZeroSumGame& g,
                                             const std::string& report_json,
                                             double tolerance) {
  const json j = parse_json(report_json);
  if (!j.is_object() || !j.contains("profile")) {
    throw ParseError("report must be an object with a \"profile\" key");
  }
  const json& prof = j.at("profile");
  if (!prof.is_object() || !prof.contains("row") || !prof.contains("col")) {
    throw ParseError("report profile must carry \"row\" and \"col\" arrays");
  }
  ProductPoint x;
  x.row = make_mixed(parse_weight_array(prof.at("row"), "profile row"));
  x.col = make_mixed(parse_weight_array(prof.at("col"), "profile col"));

  MetricConfig cfg;
  if (j.contains("config") && j.at("config").contains("norm")) {
    cfg.norm = parse_norm(j.at("config").at("norm").get<std::string>());
  }

  const double value = expected_payoff(g, x);
  const ExcessPair ex = total_excess(g, x);
  const DualityCheck dc = check_duality(g, x.row, x.col);
  const double res = residual(excess_response_map(g), x, cfg);

  auto need = [&](const char* key) -> double {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw ParseError(std::string("report is missing numeric key \"") + key +
                       '"');
    }
    return j.at(key).get<double>();
  };

  std::vector<std::string> deviations;
  auto check = [&](const char* key, double recomputed) {
    const double reported = need(key);
    if (!(std::abs(reported - recomputed) <= tolerance)) {
      deviations.push_back(std::string(key) + ": reported " +
                           format_double(reported) + ", recomputed " +
                           format_double(recomputed));
    }
  };
  check("value", value);
  check("lambda", ex.row_excess);
  check("lambda_prime", ex.col_excess);
  check("v_A", dc.v_a);
  check("v_B", dc.v_b);
  check("duality_gap", dc.gap);
  check("residual", res);
  return deviations;
}

}  // namespace fixmax
