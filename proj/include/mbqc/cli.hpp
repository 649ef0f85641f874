// Copyright 2026 The mbqc-selftest authors
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

#ifndef MBQC_CLI_HPP
#define MBQC_CLI_HPP

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbqc/belltest.hpp"
#include "mbqc/certify.hpp"
#include "mbqc/delegation.hpp"
#include "mbqc/device.hpp"
#include "mbqc/graphs.hpp"
#include "mbqc/graphtest.hpp"
#include "mbqc/oracles.hpp"
#include "mbqc/stats.hpp"

namespace mbqc::cli {

inline constexpr const char* kToolVersion = "0.1.0";

namespace detail {

inline nlohmann::ordered_json envelope(const std::string& command,
                                       nlohmann::ordered_json params, std::uint64_t seed,
                                       nlohmann::ordered_json report, bool timestamp) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "cli_report";
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["params"] = std::move(params);
  j["seed"] = seed;
  j["report"] = std::move(report);
  if (timestamp) {
    const auto now = std::chrono::system_clock::now();
    j["timestamp"] =
        static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                      now.time_since_epoch())
                                      .count());
  }
  return j;
}

inline void emit(const nlohmann::ordered_json& j, const std::string& out_path,
                 std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot open output file: " + out_path);
    f << text;
  }
}

inline void check_probability(const std::string& name, double v) {
  if (!(v > 0.0 && v < 1.0))
    throw std::runtime_error(name + " must lie strictly between 0 and 1");
}

inline ColoredGraph load_graph(const std::string& graph_path, const std::string& lattice) {
  if (!graph_path.empty()) {
    std::ifstream f(graph_path);
    if (!f) throw std::runtime_error("cannot open graph file: " + graph_path);
    nlohmann::json j;
    f >> j;
    return graph_from_json(j);
  }
  if (!lattice.empty()) {
    const auto x = lattice.find('x');
    if (x == std::string::npos) throw std::runtime_error("lattice must look like ROWSxCOLS");
    const int rows = std::stoi(lattice.substr(0, x));
    const int cols = std::stoi(lattice.substr(x + 1));
    return triangular_lattice(rows, cols);
  }
  throw std::runtime_error("either --graph or --lattice is required");
}

inline DeviceModel bell_device_preset(const std::string& name, int site, double theta,
                                      double noise_p) {
  if (name == "honest") return devices::honest_bell();
  if (name == "product") return devices::product_state_bell();
  if (name == "rotated-obs") return devices::rotated_observables_bell(site, theta);
  if (name == "rotated-state") return devices::rotated_state_bell(theta);
  if (name == "depolarized") return devices::depolarized_bell(noise_p);
  if (name == "mixed") return devices::maximally_mixed_bell();
  if (name == "dim3") return devices::dim3_bell(theta);
  throw std::runtime_error("unknown device preset: " + name);
}

inline DeviceModel graph_device_preset(const ColoredGraph& g, const std::string& adversary,
                                       int site, double theta) {
  if (adversary == "none" || adversary == "honest") return devices::honest_graph(g);
  if (adversary == "corrupt-state") {
    if (g.edges.empty()) throw std::runtime_error("corrupt-state needs a graph with edges");
    return devices::missing_edge_graph(g, g.edges.front());
  }
  if (adversary == "z-flip") return devices::z_flip_graph(g, site);
  if (adversary == "rotate-obs") return devices::rotated_observables_graph(g, site, theta);
  throw std::runtime_error("unknown adversary: " + adversary);
}

}  // namespace detail

/// Entry point shared by the binary and the tests. Returns 0 when the
/// executed test passes (or the command has no verdict), 1 on a failed
/// verdict, 2 on usage errors.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-testing toolkit for measurement-based quantum computation"};
  app.require_subcommand(1);

  // bell-test
  auto* bell = app.add_subcommand("bell-test", "Run the 8-group Bell-state self-test");
  std::int64_t bt_m = 1000;
  double bt_c1 = 0.0, bt_beta = 0.9, bt_theta = 0.1, bt_noise = 0.02;
  std::uint64_t bt_seed = 1;
  int bt_site = 0;
  std::string bt_device = "honest", bt_out;
  bool bt_honest = false, bt_no_ts = false;
  bell->add_option("--m", bt_m, "copies per group");
  bell->add_option("--c1", bt_c1, "margin constant (0 = calibrate from --beta)");
  bell->add_option("--beta", bt_beta, "target acceptance probability for calibration");
  bell->add_option("--seed", bt_seed, "master seed");
  bell->add_flag("--honest", bt_honest, "shorthand for --device honest");
  bell->add_option("--device", bt_device,
                   "device preset: honest|product|rotated-obs|rotated-state|depolarized|mixed|dim3");
  bell->add_option("--site", bt_site, "site for rotated presets");
  bell->add_option("--theta", bt_theta, "rotation angle / dim3 leak");
  bell->add_option("--noise-p", bt_noise, "depolarization probability");
  bell->add_option("--out", bt_out, "write the JSON report here instead of stdout");
  bell->add_flag("--no-timestamp", bt_no_ts, "omit the timestamp (byte-stable output)");

  // graph-test
  auto* gt = app.add_subcommand("graph-test", "Run the graph-state self-test");
  std::string gt_graph, gt_lattice, gt_adversary = "none", gt_out, gt_csv;
  std::int64_t gt_m = 50;
  double gt_c1 = 0.0, gt_beta = 0.9, gt_theta = 0.1, gt_alpha = 0.05, gt_c2 = 1.0;
  std::uint64_t gt_seed = 1;
  int gt_site = 0;
  bool gt_no_ts = false;
  gt->add_option("--graph", gt_graph, "graph JSON file");
  gt->add_option("--lattice", gt_lattice, "triangular lattice ROWSxCOLS");
  gt->add_option("--m", gt_m, "copies per group");
  gt->add_option("--c1", gt_c1, "margin constant (0 = calibrate from --beta over all sites)");
  gt->add_option("--beta", gt_beta, "target acceptance probability for calibration");
  gt->add_option("--alpha", gt_alpha, "significance level for the certified guarantees");
  gt->add_option("--c2", gt_c2, "delta scale constant");
  gt->add_option("--seed", gt_seed, "master seed");
  gt->add_option("--adversary", gt_adversary, "none|corrupt-state|z-flip|rotate-obs");
  gt->add_option("--site", gt_site, "site for site-local adversaries");
  gt->add_option("--theta", gt_theta, "angle for rotate-obs");
  gt->add_option("--out", gt_out, "write the JSON report here instead of stdout");
  gt->add_option("--csv", gt_csv, "also write the per-site epsilon/delta table as CSV");
  gt->add_flag("--no-timestamp", gt_no_ts, "omit the timestamp");

  // delegate
  auto* dg = app.add_subcommand("delegate", "Run the delegated two-prover scenario");
  std::string dg_graph, dg_lattice, dg_scenario = "trusting", dg_p1 = "honest",
              dg_p2 = "honest", dg_out, dg_transcript, dg_config;
  std::int64_t dg_m = 10;
  double dg_c1 = 0.0, dg_beta = 0.9, dg_theta = 0.05;
  std::uint64_t dg_seed = 1;
  bool dg_no_ts = false;
  dg->add_option("--config", dg_config, "scenario configuration JSON file");
  dg->add_option("--graph", dg_graph, "graph JSON file");
  dg->add_option("--lattice", dg_lattice, "triangular lattice ROWSxCOLS");
  dg->add_option("--scenario", dg_scenario, "trusting|teleport");
  dg->add_option("--m", dg_m, "copies per group");
  dg->add_option("--c1", dg_c1, "margin constant (0 = calibrate)");
  dg->add_option("--beta", dg_beta, "target acceptance probability for calibration");
  dg->add_option("--seed", dg_seed, "master seed");
  dg->add_option("--p1", dg_p1, "prover 1 strategy: honest|product");
  dg->add_option("--p2", dg_p2, "prover 2 strategy: honest|rotated");
  dg->add_option("--theta", dg_theta, "angle for the rotated prover 2");
  dg->add_option("--out", dg_out, "write the JSON report here instead of stdout");
  dg->add_option("--transcript", dg_transcript, "write the JSONL transcript here");
  dg->add_flag("--no-timestamp", dg_no_ts, "omit the timestamp");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Size the c1 margin constant");
  double cal_beta = 0.9;
  std::int64_t cal_tests = 1, cal_sites = 1;
  std::string cal_out;
  bool cal_no_ts = false;
  cal->add_option("--beta", cal_beta, "target acceptance probability")->required();
  cal->add_option("--num-tests", cal_tests, "independent test instances");
  cal->add_option("--sites-n", cal_sites, "tested sites");
  cal->add_option("--out", cal_out, "write the JSON report here instead of stdout");
  cal->add_flag("--no-timestamp", cal_no_ts, "omit the timestamp");

  // bounds
  auto* bd = app.add_subcommand("bounds", "Evaluate the certification bound formulas");
  int bd_n = 1, bd_s = 4;
  double bd_delta = 0.0, bd_alpha = 0.05;
  std::int64_t bd_m = 100;
  std::string bd_out, bd_csv, bd_sweep;
  bool bd_no_ts = false;
  bd->add_option("--n", bd_n, "number of sites")->required();
  bd->add_option("--delta", bd_delta, "per-site deviation")->required();
  bd->add_option("--alpha", bd_alpha, "significance level");
  bd->add_option("--m", bd_m, "copies per group");
  bd->add_option("--s", bd_s, "observable-set size");
  bd->add_option("--sweep-delta", bd_sweep, "CSV sweep lo:hi:steps");
  bd->add_option("--csv", bd_csv, "write the sweep CSV here");
  bd->add_option("--out", bd_out, "write the JSON report here instead of stdout");
  bd->add_flag("--no-timestamp", bd_no_ts, "omit the timestamp");

  // oracle
  auto* orc = app.add_subcommand("oracle", "Brute-force cross-checks");
  std::string orc_check = "hypergeom", orc_graph, orc_lattice, orc_out, orc_csv;
  int orc_n = 12, orc_dim = 16;
  std::int64_t orc_m = 20;
  double orc_p = 0.5, orc_alpha = 0.05;
  std::uint64_t orc_seed = 1;
  bool orc_no_ts = false;
  orc->add_option("--check", orc_check, "hypergeom|stabilizer|norms|percent-point");
  orc->add_option("--n", orc_n, "range bound for hypergeom / matrix count for norms");
  orc->add_option("--dim", orc_dim, "matrix dimension for norms");
  orc->add_option("--graph", orc_graph, "graph JSON file for the stabilizer check");
  orc->add_option("--lattice", orc_lattice, "triangular lattice ROWSxCOLS");
  orc->add_option("--m", orc_m, "trials for percent-point table");
  orc->add_option("--p", orc_p, "probability for percent-point table");
  orc->add_option("--alpha", orc_alpha, "significance for percent-point table");
  orc->add_option("--seed", orc_seed, "seed for the norms check");
  orc->add_option("--csv", orc_csv, "write percent-point table CSV here");
  orc->add_option("--out", orc_out, "write the JSON report here instead of stdout");
  orc->add_flag("--no-timestamp", orc_no_ts, "omit the timestamp");

  std::vector<const char*> argv;
  argv.push_back("mbqc-selftest");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    nlohmann::ordered_json diag;
    diag["error"] = "usage";
    diag["message"] = e.what();
    err << diag.dump(2) << "\n";
    return 2;
  }

  try {
    if (bell->parsed()) {
      detail::check_probability("--beta", bt_beta);
      if (bt_honest) bt_device = "honest";
      const double c1 = bt_c1 > 0 ? bt_c1 : calibrate_c1(bt_beta);
      const DeviceModel device =
          detail::bell_device_preset(bt_device, bt_site, bt_theta, bt_noise);
      const Test2Report rep = run_test2(device, bt_m, c1, bt_seed);
      nlohmann::ordered_json params = {{"m", bt_m},          {"c1", c1},
                                       {"beta", bt_beta},    {"device", bt_device},
                                       {"seed", bt_seed}};
      detail::emit(detail::envelope("bell-test", params, bt_seed, test2_report_to_json(rep),
                                    !bt_no_ts),
                   bt_out, out);
      return rep.pass ? 0 : 1;
    }

    if (gt->parsed()) {
      detail::check_probability("--beta", gt_beta);
      detail::check_probability("--alpha", gt_alpha);
      const ColoredGraph g = detail::load_graph(gt_graph, gt_lattice);
      const double c1 = gt_c1 > 0 ? gt_c1 : calibrate_c1(gt_beta, 1, std::max(1, g.n));
      const DeviceModel device = detail::graph_device_preset(g, gt_adversary, gt_site, gt_theta);
      const Test4Report rep = run_test4(device, g, gt_m, c1, gt_seed);
      nlohmann::ordered_json report = test4_report_to_json(rep);
      if (rep.pass) {
        const Test4Guarantees t2 = test4_guarantees(rep, gt_alpha, gt_c2);
        report["guarantees"] = {{"alpha", gt_alpha},
                              {"c2", gt_c2},
                              {"delta", t2.delta},
                              {"defect_threshold", t2.defect_threshold},
                              {"flagged_colors", t2.flagged_colors}};
      }
      nlohmann::ordered_json params = {{"m", gt_m},         {"c1", c1},
                                       {"alpha", gt_alpha}, {"beta", gt_beta},
                                       {"adversary", gt_adversary}, {"seed", gt_seed}};
      detail::emit(detail::envelope("graph-test", params, gt_seed, report, !gt_no_ts), gt_out,
                   out);
      if (!gt_csv.empty()) {
        std::ofstream f(gt_csv);
        if (!f) throw std::runtime_error("cannot open CSV file: " + gt_csv);
        f << test4_site_table_csv(rep);
      }
      return rep.pass ? 0 : 1;
    }

    if (dg->parsed()) {
      if (!dg_config.empty()) {
        std::ifstream f(dg_config);
        if (!f) throw std::runtime_error("cannot open config file: " + dg_config);
        nlohmann::json cfg;
        f >> cfg;
        if (!cfg.contains("format") || cfg["format"].get<int>() != 1)
          throw std::runtime_error("unsupported scenario config version");
        if (cfg.contains("scenario")) dg_scenario = cfg["scenario"].get<std::string>();
        if (cfg.contains("graph")) dg_graph = cfg["graph"].get<std::string>();
        if (cfg.contains("lattice")) dg_lattice = cfg["lattice"].get<std::string>();
        if (cfg.contains("m")) dg_m = cfg["m"].get<std::int64_t>();
        if (cfg.contains("c1")) dg_c1 = cfg["c1"].get<double>();
        if (cfg.contains("seed")) dg_seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("prover1")) dg_p1 = cfg["prover1"].get<std::string>();
        if (cfg.contains("prover2")) dg_p2 = cfg["prover2"].get<std::string>();
        if (cfg.contains("theta")) dg_theta = cfg["theta"].get<double>();
      }
      detail::check_probability("--beta", dg_beta);
      const ColoredGraph g = detail::load_graph(dg_graph, dg_lattice);
      const double c1 = dg_c1 > 0 ? dg_c1 : calibrate_c1(dg_beta, 1, std::max(1, g.n));
      const Scenario scenario =
          dg_scenario == "teleport" ? Scenario::teleport : Scenario::trusting;
      std::unique_ptr<Prover1Strategy> p1;
      if (dg_p1 == "honest")
        p1 = std::make_unique<HonestProver1>();
      else if (dg_p1 == "product")
        p1 = std::make_unique<ProductStateProver1>();
      else
        throw std::runtime_error("unknown prover 1 strategy: " + dg_p1);
      std::unique_ptr<Prover2Strategy> p2;
      if (dg_p2 == "honest")
        p2 = std::make_unique<HonestProver2>();
      else if (dg_p2 == "rotated")
        p2 = std::make_unique<RotatedProver2>(dg_theta);
      else
        throw std::runtime_error("unknown prover 2 strategy: " + dg_p2);
      const DelegationResult res = run_delegation(g, dg_m, c1, scenario, *p1, *p2, dg_seed);
      if (!dg_transcript.empty()) {
        std::ofstream f(dg_transcript);
        if (!f) throw std::runtime_error("cannot open transcript file: " + dg_transcript);
        f << transcript_to_jsonl(res.transcript);
      }
      nlohmann::ordered_json report = test4_report_to_json(res.report);
      report["scenario"] = dg_scenario;
      report["transcript_messages"] = res.transcript.size();
      report["channel_violations"] = transcript_violations(res.transcript);
      nlohmann::ordered_json params = {{"m", dg_m},       {"c1", c1},
                                       {"beta", dg_beta}, {"scenario", dg_scenario},
                                       {"prover1", dg_p1}, {"prover2", dg_p2},
                                       {"seed", dg_seed}};
      detail::emit(detail::envelope("delegate", params, dg_seed, report, !dg_no_ts), dg_out, out);
      return res.report.pass ? 0 : 1;
    }

    if (cal->parsed()) {
      const double c1 = calibrate_c1(cal_beta, cal_tests, cal_sites);
      nlohmann::ordered_json report = {{"c1", c1},
                                       {"beta", cal_beta},
                                       {"num_tests", cal_tests},
                                       {"sites_n", cal_sites}};
      nlohmann::ordered_json params = {{"beta", cal_beta},
                                       {"num_tests", cal_tests},
                                       {"sites_n", cal_sites}};
      detail::emit(detail::envelope("calibrate", params, 0, report, !cal_no_ts), cal_out, out);
      return 0;
    }

    if (bd->parsed()) {
      detail::check_probability("--alpha", bd_alpha);
      nlohmann::ordered_json report = {
          {"povm_bound", povm_bound(bd_n, bd_delta, bd_s)},
          {"state_error_bound", state_error_bound(bd_n, bd_delta, bd_alpha, bd_m)},
          {"incorrect_accept_bound", incorrect_accept_bound(bd_n, bd_delta, bd_alpha, bd_m)}};
      if (!bd_sweep.empty()) {
        std::stringstream ss(bd_sweep);
        std::string lo_s, hi_s, steps_s;
        std::getline(ss, lo_s, ':');
        std::getline(ss, hi_s, ':');
        std::getline(ss, steps_s, ':');
        const double lo = std::stod(lo_s), hi = std::stod(hi_s);
        const int steps = std::stoi(steps_s);
        std::string csv = "delta,povm_bound,state_error_bound,incorrect_accept_bound\n";
        for (int i = 0; i <= steps; ++i) {
          const double d = lo + (hi - lo) * i / std::max(1, steps);
          csv += std::to_string(d) + "," + std::to_string(povm_bound(bd_n, d, bd_s)) + "," +
                 std::to_string(state_error_bound(bd_n, d, bd_alpha, bd_m)) + "," +
                 std::to_string(incorrect_accept_bound(bd_n, d, bd_alpha, bd_m)) + "\n";
        }
        if (!bd_csv.empty()) {
          std::ofstream f(bd_csv);
          if (!f) throw std::runtime_error("cannot open CSV file: " + bd_csv);
          f << csv;
        } else {
          report["sweep_csv"] = csv;
        }
      }
      nlohmann::ordered_json params = {{"n", bd_n},      {"delta", bd_delta},
                                       {"alpha", bd_alpha}, {"m", bd_m},
                                       {"s", bd_s}};
      detail::emit(detail::envelope("bounds", params, 0, report, !bd_no_ts), bd_out, out);
      return 0;
    }

    if (orc->parsed()) {
      nlohmann::ordered_json report;
      bool pass = true;
      if (orc_check == "hypergeom") {
        const int limit = std::min(orc_n, 20);
        double worst = 0.0;
        for (int n = 1; n <= limit; ++n)
          for (int m = 0; m <= n; ++m)
            for (int k = 0; k <= n; ++k)
              for (int x = 0; x <= k; ++x) {
                const auto oracle = oracles::hypergeom_fraction_dp(n, m, k, x);
                const auto lib = hypergeom_pmf_exact(n, m, k, x);
                if (oracle != lib) pass = false;
                worst = std::max(worst, std::abs(hypergeom_pmf(n, m, k, x) -
                                                 static_cast<double>(oracle.first) /
                                                     static_cast<double>(oracle.second)));
              }
        report = {{"check", "hypergeom"}, {"n_max", limit}, {"max_abs_diff", worst},
                  {"exact_match", pass}};
      } else if (orc_check == "stabilizer") {
        const ColoredGraph g = detail::load_graph(orc_graph, orc_lattice);
        const DeviceModel device = devices::honest_graph(g);
        auto realize = [&device](int site, ObsLabel l) {
          return std::pair<Matrix, int>(device.base_observable(site, l), +1);
        };
        nlohmann::ordered_json per_color = nlohmann::json::object();
        for (int color : g.colors()) {
          const double p = stabilizer_pass_probability(device.state, realize, g, color);
          per_color[std::to_string(color)] = p;
          if (std::abs(p - 1.0) > 1e-12) pass = false;
          for (int v : g.color_class(color)) {
            std::vector<BinaryObservable> stab{{v, pauli_x()}};
            for (int nb : g.neighbors(v)) stab.push_back({nb, pauli_z()});
            if (std::abs(expectation(device.state, stab) - 1.0) > 1e-12) pass = false;
          }
        }
        report = {{"check", "stabilizer"}, {"pass_probability", per_color}, {"ok", pass}};
      } else if (orc_check == "norms") {
        RngStream rng(orc_seed);
        double worst = 0.0;
        for (int i = 0; i < orc_n; ++i) {
          const Matrix a = oracles::random_matrix(orc_dim, orc_dim, rng);
          const double svd = operator_norm(a);
          const double pw = oracles::power_iteration_norm(a);
          worst = std::max(worst, std::abs(svd - pw) / std::max(1.0, svd));
        }
        pass = worst <= 1e-8;
        report = {{"check", "norms"}, {"matrices", orc_n}, {"dim", orc_dim},
                  {"max_rel_diff", worst}, {"ok", pass}};
      } else if (orc_check == "percent-point") {
        std::string csv = "m,p,alpha,x_upper,x_lower\n";
        for (std::int64_t mm : {orc_m}) {
          for (double pp : {0.1, 0.25, 0.5, orc_p}) {
            csv += std::to_string(mm) + "," + std::to_string(pp) + "," +
                   std::to_string(orc_alpha) + "," +
                   std::to_string(percent_point_upper(mm, pp, orc_alpha)) + "," +
                   std::to_string(percent_point_lower(mm, pp, orc_alpha)) + "\n";
          }
        }
        if (!orc_csv.empty()) {
          std::ofstream f(orc_csv);
          if (!f) throw std::runtime_error("cannot open CSV file: " + orc_csv);
          f << csv;
          report = {{"check", "percent-point"}, {"csv", orc_csv}};
        } else {
          report = {{"check", "percent-point"}, {"table", csv}};
        }
      } else {
        throw std::runtime_error("unknown oracle check: " + orc_check);
      }
      detail::emit(detail::envelope("oracle", {{"check", orc_check}}, orc_seed, report,
                                    !orc_no_ts),
                   orc_out, out);
      return pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    nlohmann::ordered_json diag;
    diag["error"] = "usage";
    diag["message"] = e.what();
    err << diag.dump(2) << "\n";
    return 2;
  }
  return 2;
}

}  // namespace mbqc::cli

#endif  // MBQC_CLI_HPP
