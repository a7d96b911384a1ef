// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <ctime>
#include <string>
#include <utility>
#include <vector>

#include "topobc/harness.hpp"
#include "topobc/version.hpp"

namespace topobc {

// Reproducibility header written as comment lines above every CSV. The body
// (all non-'#' lines) is a pure function of the manifest minus the timestamp.
struct RunManifest {
  std::string command;       // full re-runnable command line
  std::string config_path;   // empty when no config file was involved
  std::uint64_t seed = 0;
  std::string output_path;
  std::vector<std::pair<std::string, std::string>> params;
  bool with_timestamp = true;
};

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string manifest_header(const RunManifest& m) {
  std::string out;
  out += "# tool: topobc " + std::string(kVersion) + "\n";
  out += "# command: " + m.command + "\n";
  if (!m.config_path.empty()) out += "# config: " + m.config_path + "\n";
  out += "# seed: " + std::to_string(m.seed) + "\n";
  for (const auto& [k, v] : m.params) out += "# " + k + ": " + v + "\n";
  if (m.with_timestamp) {
    char buf[64];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    out += "# generated: " + std::string(buf) + "\n";
  }
  return out;
}

// simulate output: one row per SNR point plus a trailing fitted-slope row.
inline std::string simulate_csv_body(const std::vector<PointStats>& points,
                                     const GdofEstimate& est) {
  std::string out = "snr_db,rho,rate_u1,rate_u2,rate_sum,se_sum\n";
  for (const auto& p : points) {
    out += fmt_double(p.snr_db) + "," + fmt_double(p.rho) + "," + fmt_double(p.rate_u1) + "," +
           fmt_double(p.rate_u2) + "," + fmt_double(p.rate_u1 + p.rate_u2) + "," +
           fmt_double(p.se_sum) + "\n";
  }
  out += "slope,," + fmt_double(est.intercept) + "," + fmt_double(est.residual_rms) + "," +
         fmt_double(est.slope) + ",\n";
  return out;
}

inline std::string verify_csv_body(const std::vector<ClaimRow>& rows) {
  std::string out = "scheme,alpha,claimed,bound,slope,residual_rms,pass\n";
  for (const auto& r : rows) {
    out += std::string(scheme_cli_name(r.scheme)) + "," + fmt_double(r.alpha) + "," +
           fmt_double(r.claimed) + "," + fmt_double(r.bound) + "," + fmt_double(r.slope) + "," +
           fmt_double(r.residual_rms) + "," + (r.pass ? "PASS" : "FAIL") + "\n";
  }
  return out;
}

// Closed-form sum-GDoF curves for the fixed and alternating delayed-feedback
// settings (plus the always-current and single-user references).
inline std::string fig3_csv_body(double alpha_step, bool simulated,
                                 const std::vector<std::pair<double, double>>& tsm1_slopes = {},
                                 const std::vector<std::pair<double, double>>& tsm2_slopes = {}) {
  std::string out = simulated ? "alpha,mat,su,tsm1,tsm2,tsm1_slope,tsm2_slope\n"
                              : "alpha,mat,su,tsm1,tsm2\n";
  int idx = 0;
  for (double a = 0.0; a <= 1.0 + 1e-9; a += alpha_step, ++idx) {
    const double alpha = std::min(a, 1.0);
    const double mat = 2.0 * (1.0 + alpha) / 3.0;
    const double tsm1 = 1.0 + alpha * alpha / (2.0 + alpha);
    const double tsm2 = 1.0 + alpha / 3.0;
    out += fmt_double(alpha) + "," + fmt_double(mat) + ",1," + fmt_double(tsm1) + "," +
           fmt_double(tsm2);
    if (simulated) {
      const auto pick = [&](const std::vector<std::pair<double, double>>& v) -> std::string {
        for (const auto& [x, s] : v)
          if (std::fabs(x - alpha) < 1e-9) return fmt_double(s);
        return "";
      };
      out += "," + pick(tsm1_slopes) + "," + pick(tsm2_slopes);
    }
    out += "\n";
  }
  return out;
}

}  // namespace topobc
