// SPDX-License-Identifier: Apache-2.0
//
// topobc — two-user broadcast-channel GDoF testbed.
//
// Subcommands:
//   bounds      evaluate sum-GDoF outer bounds for a distribution config
//   simulate    Monte Carlo rate sweep for one scheme, CSV out
//   sweep-fig3  closed-form GDoF curves (optionally with measured slopes)
//   verify      full scheme-vs-claim verification table
//
// Exit codes: 0 success, 1 runtime failure, 2 config error, 3 verification failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topobc/topobc.hpp"

namespace {

using namespace topobc;

std::vector<double> parse_snr_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw ConfigError("snr-db", "expected a comma-separated list of dB values");
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << content;
}

std::string rebuild_command(int argc, char** argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i) cmd += " ";
    cmd += argv[i];
  }
  return cmd;
}

int cmd_bounds(const std::string& dist_path, const std::string& out_path) {
  auto parsed = load_distribution(dist_path);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
  const auto violations = validate_distribution(parsed.dist);
  if (!violations.empty()) {
    for (const auto& v : violations)
      std::cerr << "constraint violated: " << v.constraint << " (value " << fmt_double(v.value)
                << ")\n";
    return 2;
  }
  std::ostringstream os;
  const double alpha = parsed.dist.alpha_value();
  os << "alpha = " << parsed.dist.alpha.str() << "\n";
  const auto exact = evaluate_bounds_exact(parsed.dist);
  const auto rep = evaluate_bounds(parsed.dist);
  if (rep.has_fixed) {
    os << "fixed-topology bounds:   d1 = " << fmt_double(rep.d1) << "  d2 = " << fmt_double(rep.d2)
       << "\n";
  }
  os << "general bounds:          d3 = " << fmt_double(rep.d3) << "  d4 = " << fmt_double(rep.d4)
     << "\n";
  os << "d_min = " << fmt_double(rep.d_min);
  if (exact) os << "  (= " << exact->d_min.str() << ")";
  os << "\n";
  if (const auto policy = recognize_policy(parsed.dist)) {
    const auto ach = achievable_gdof<double>(*policy, alpha);
    os << "recognized policy: " << policy_name(*policy) << "\n";
    os << "achievable = " << fmt_double(ach.value)
       << (ach.flag == OptimalityFlag::Optimal
               ? " (optimal)"
               : ach.flag == OptimalityFlag::LowerBound ? " (lower bound)" : " (sub-optimal)")
       << "\n";
    os << "gap to bound = " << fmt_double(rep.d_min - ach.value) << "\n";
  } else {
    os << "no recognized policy for this distribution\n";
  }
  write_output(out_path, os.str());
  return 0;
}

int cmd_simulate(const std::string& scheme_name, const std::string& alpha_text,
                 const std::string& snr_csv, int trials, std::uint64_t seed,
                 const std::string& mode_name, const std::string& out_path,
                 const std::string& command) {
  const auto id = scheme_from_cli_name(scheme_name);
  if (!id) throw ConfigError("scheme", "unknown scheme '" + scheme_name + "'");
  const auto alpha = parse_rational(alpha_text);
  if (!alpha.exact && *id == SchemeId::Tsm3)
    throw ConfigError("alpha", "the three-phase scheme needs a rational alpha (p/q)");
  if (!alpha.exact) std::cerr << "warning: alpha snapped to " << alpha.value.str() << "\n";

  SweepConfig cfg;
  cfg.scheme = *id;
  cfg.alpha = alpha.value;
  cfg.snr_db = parse_snr_list(snr_csv);
  cfg.trials = trials;
  cfg.seed = seed;
  if (mode_name == "analytic") cfg.mode = Fidelity::Analytic;
  else if (mode_name == "bitlevel") cfg.mode = Fidelity::BitLevel;
  else throw ConfigError("mode", "expected 'analytic' or 'bitlevel'");

  const auto points = measure_rates(cfg);
  const auto est = fit_slope(points);

  RunManifest man;
  man.command = command;
  man.seed = seed;
  man.output_path = out_path;
  man.params = {{"scheme", scheme_name},
                {"alpha", alpha.value.str()},
                {"snr_db", snr_csv},
                {"trials", std::to_string(trials)},
                {"mode", mode_name}};
  write_output(out_path, manifest_header(man) + simulate_csv_body(points, est));
  return 0;
}

int cmd_sweep_fig3(double alpha_step, bool simulated, int trials, std::uint64_t seed,
                   const std::string& out_path, const std::string& command) {
  std::vector<std::pair<double, double>> tsm1_slopes, tsm2_slopes;
  if (simulated) {
    for (double a = 0.0; a <= 1.0 + 1e-9; a += alpha_step) {
      const double alpha = std::min(a, 1.0);
      const auto aq = Rational::from_double(alpha, 1000);
      if (!aq) continue;
      for (auto [scheme, slot] :
           {std::pair{SchemeId::Tsm3, &tsm1_slopes}, std::pair{SchemeId::Tsm4, &tsm2_slopes}}) {
        SweepConfig cfg;
        cfg.scheme = scheme;
        cfg.alpha = *aq;
        cfg.trials = trials;
        cfg.seed = seed;
        slot->emplace_back(alpha, fit_slope(measure_rates(cfg)).slope);
      }
    }
  }
  RunManifest man;
  man.command = command;
  man.seed = seed;
  man.output_path = out_path;
  man.params = {{"alpha_step", fmt_double(alpha_step)},
                {"simulated", simulated ? "true" : "false"}};
  write_output(out_path,
               manifest_header(man) + fig3_csv_body(alpha_step, simulated, tsm1_slopes, tsm2_slopes));
  return 0;
}

int cmd_verify(double tolerance, int trials, std::uint64_t seed, const std::string& out_path,
               const std::string& command) {
  const std::vector<Rational> grid = {{0, 1}, {1, 4}, {1, 2}, {3, 4}, {1, 1}};
  const auto rows = verify_against_claims(grid, tolerance, trials, seed);

  std::printf("%-12s %6s %9s %9s %9s %9s  %s\n", "scheme", "alpha", "claimed", "bound", "slope",
              "resid", "status");
  bool all_pass = true;
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    std::printf("%-12s %6.2f %9.4f %9.4f %9.4f %9.4f  %s\n", scheme_cli_name(r.scheme), r.alpha,
                r.claimed, r.bound, r.slope, r.residual_rms, r.pass ? "PASS" : "FAIL");
  }
  if (!out_path.empty()) {
    RunManifest man;
    man.command = command;
    man.seed = seed;
    man.output_path = out_path;
    man.params = {{"tolerance", fmt_double(tolerance)}, {"trials", std::to_string(trials)}};
    write_output(out_path, manifest_header(man) + verify_csv_body(rows));
  }
  std::printf("%s\n", all_pass ? "ALL PASS" : "VERIFICATION FAILED");
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-user broadcast channel GDoF testbed"};
  app.require_subcommand(1);
  const std::string command = rebuild_command(argc, argv);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate sum-GDoF outer bounds for a config");
  std::string dist_path, out_path;
  bounds->add_option("--dist", dist_path, "distribution JSON path")->required();
  bounds->add_option("--out", out_path, "output path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo rate sweep for one scheme");
  std::string scheme_name, alpha_text = "1/2", snr_csv = "40,60,80", mode_name = "analytic";
  std::string sim_out;
  int trials = 10000;
  std::uint64_t seed = 1;
  simulate->add_option("--scheme", scheme_name, "scheme id (tsm1..tsm5-*, mat, zf, su)")->required();
  simulate->add_option("--alpha", alpha_text, "strength ratio, p/q or decimal");
  simulate->add_option("--snr-db", snr_csv, "comma-separated SNR list in dB");
  simulate->add_option("--trials", trials, "trials per SNR point");
  simulate->add_option("--seed", seed, "random seed");
  simulate->add_option("--mode", mode_name, "analytic | bitlevel");
  simulate->add_option("--out", sim_out, "output CSV path (default stdout)");

  // sweep-fig3
  auto* fig3 = app.add_subcommand("sweep-fig3", "closed-form GDoF curves over an alpha grid");
  double alpha_step = 0.05;
  bool simulated = false;
  std::string fig3_out;
  int fig3_trials = 2000;
  std::uint64_t fig3_seed = 1;
  fig3->add_option("--alpha-step", alpha_step, "grid step in alpha");
  fig3->add_flag("--simulated", simulated, "add measured-slope columns");
  fig3->add_option("--trials", fig3_trials, "trials per point when --simulated");
  fig3->add_option("--seed", fig3_seed, "random seed when --simulated");
  fig3->add_option("--out", fig3_out, "output CSV path (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "verify measured slopes against the claim table");
  double tolerance = 0.05;
  int vtrials = 10000;
  std::uint64_t vseed = 1;
  std::string verify_out;
  verify->add_option("--tolerance", tolerance, "slope tolerance in GDoF units");
  verify->add_option("--trials", vtrials, "trials per SNR point");
  verify->add_option("--seed", vseed, "random seed");
  verify->add_option("--out", verify_out, "also write the report CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bounds->parsed()) return cmd_bounds(dist_path, out_path);
    if (simulate->parsed())
      return cmd_simulate(scheme_name, alpha_text, snr_csv, trials, seed, mode_name, sim_out,
                          command);
    if (fig3->parsed())
      return cmd_sweep_fig3(alpha_step, simulated, fig3_trials, fig3_seed, fig3_out, command);
    if (verify->parsed()) return cmd_verify(tolerance, vtrials, vseed, verify_out, command);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
