// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "topobc/bounds.hpp"
#include "topobc/errors.hpp"
#include "topobc/schemes.hpp"

namespace topobc {

// Worker count: TOPO_BC_THREADS caps it, results never depend on it.
inline int resolve_threads(int requested = 0) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("TOPO_BC_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

namespace detail {

// Runs fn(i) for i in [0, n) on a fixed number of workers. Work items write
// to disjoint slots, so scheduling cannot change results.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::min(threads, std::max(1, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Compensated (Kahan) sum in index order: identical regardless of how the
// values were produced.
inline double kahan_sum(const std::vector<double>& v) {
  double sum = 0.0, c = 0.0;
  for (double x : v) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace detail

struct SweepConfig {
  SchemeId scheme = SchemeId::SingleUser;
  Rational alpha{1, 2};
  std::vector<double> snr_db = {40.0, 60.0, 80.0};
  int trials = 10000;
  std::uint64_t seed = 1;
  Fidelity mode = Fidelity::Analytic;
  int scale_m = 1;
  int threads = 0;  // 0: hardware default (still capped by TOPO_BC_THREADS)
  int concat_horizon = 16;

  void check() const {
    if (snr_db.size() < 2) throw ConfigError("snr-db", "need at least 2 SNR points for a slope fit");
    if (trials < 100) throw ConfigError("trials", "need at least 100 trials per point");
  }
};

struct PointStats {
  double snr_db = 0.0;
  double rho = 0.0;
  double rate_u1 = 0.0;
  double rate_u2 = 0.0;
  double se_u1 = 0.0;
  double se_u2 = 0.0;
  double se_sum = 0.0;
  int failed_trials = 0;
};

// Per-SNR averages over counter-keyed trials. Trial i at point p always uses
// the stream (seed, p, i), so any worker count produces the same numbers.
inline std::vector<PointStats> measure_rates(const SweepConfig& cfg) {
  cfg.check();
  const int threads = resolve_threads(cfg.threads);
  std::vector<PointStats> out;
  out.reserve(cfg.snr_db.size());
  for (size_t p = 0; p < cfg.snr_db.size(); ++p) {
    const SnrPoint snr = SnrPoint::from_db(cfg.snr_db[p]);
    SchemeParams params;
    params.alpha = cfg.alpha;
    params.snr = snr;
    params.mode = cfg.mode;
    params.scale_m = cfg.scale_m;
    params.concat_horizon = cfg.concat_horizon;

    std::vector<double> r1(static_cast<size_t>(cfg.trials), 0.0);
    std::vector<double> r2(static_cast<size_t>(cfg.trials), 0.0);
    std::vector<std::uint8_t> failed(static_cast<size_t>(cfg.trials), 0);
    detail::parallel_for(cfg.trials, threads, [&](int i) {
      GaussianStream rng(cfg.seed, static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(i));
      try {
        const auto res = run_scheme(cfg.scheme, params, rng);
        r1[static_cast<size_t>(i)] = res.rate_u1;
        r2[static_cast<size_t>(i)] = res.rate_u2;
      } catch (const SingularSystem&) {
        failed[static_cast<size_t>(i)] = 1;
      }
    });

    int n_failed = 0;
    std::vector<double> v1, v2;
    v1.reserve(r1.size());
    v2.reserve(r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
      if (failed[i]) {
        ++n_failed;
        continue;
      }
      v1.push_back(r1[i]);
      v2.push_back(r2[i]);
    }
    if (n_failed * 100 > cfg.trials)
      throw RunFailed("more than 1% of trials failed at " + std::to_string(cfg.snr_db[p]) + " dB");
    const auto n = static_cast<double>(v1.size());
    PointStats st;
    st.snr_db = cfg.snr_db[p];
    st.rho = snr.rho;
    st.failed_trials = n_failed;
    st.rate_u1 = detail::kahan_sum(v1) / n;
    st.rate_u2 = detail::kahan_sum(v2) / n;
    std::vector<double> d1(v1.size()), d2(v1.size()), ds(v1.size());
    for (size_t i = 0; i < v1.size(); ++i) {
      d1[i] = (v1[i] - st.rate_u1) * (v1[i] - st.rate_u1);
      d2[i] = (v2[i] - st.rate_u2) * (v2[i] - st.rate_u2);
      const double s = v1[i] + v2[i] - st.rate_u1 - st.rate_u2;
      ds[i] = s * s;
    }
    if (v1.size() > 1) {
      st.se_u1 = std::sqrt(detail::kahan_sum(d1) / (n - 1.0) / n);
      st.se_u2 = std::sqrt(detail::kahan_sum(d2) / (n - 1.0) / n);
      st.se_sum = std::sqrt(detail::kahan_sum(ds) / (n - 1.0) / n);
    }
    out.push_back(std::move(st));
  }
  return out;
}

struct GdofEstimate {
  double slope = 0.0;       // fitted d(sum rate)/d(log2 rho)
  double intercept = 0.0;   // bits
  double residual_rms = 0.0;
  std::vector<double> per_point_sum;
};

// Least-squares slope of sum rate against log2(rho) over the top-k SNR
// points (the low points carry the largest finite-SNR offsets).
inline GdofEstimate fit_slope(const std::vector<PointStats>& points, int top_k = 3) {
  if (points.size() < 2) throw DegenerateFit("need at least two SNR points");
  std::vector<std::pair<double, double>> xy;  // (log2 rho, sum rate)
  for (const auto& p : points) xy.emplace_back(std::log2(p.rho), p.rate_u1 + p.rate_u2);
  std::sort(xy.begin(), xy.end());
  const size_t k = std::min<size_t>(std::max(2, top_k), xy.size());
  std::vector<std::pair<double, double>> used(xy.end() - static_cast<long>(k), xy.end());

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : used) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(used.size());
  my /= static_cast<double>(used.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : used) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 1e-9) throw DegenerateFit("SNR points are not distinct");
  GdofEstimate est;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  double rss = 0.0;
  for (const auto& [x, y] : used) {
    const double r = y - (est.intercept + est.slope * x);
    rss += r * r;
  }
  est.residual_rms = std::sqrt(rss / static_cast<double>(used.size()));
  for (const auto& p : points) est.per_point_sum.push_back(p.rate_u1 + p.rate_u2);
  return est;
}

struct ClaimRow {
  SchemeId scheme;
  double alpha = 0.0;
  double claimed = 0.0;
  double bound = 0.0;
  double slope = 0.0;
  double residual_rms = 0.0;
  bool pass = false;
};

// Runs a sweep per (scheme, alpha), fits the slope, and compares it against
// the scheme's closed-form target and the applicable outer bound.
inline std::vector<ClaimRow> verify_against_claims(const std::vector<Rational>& alphas,
                                                   double tolerance, int trials,
                                                   std::uint64_t seed, int threads = 0,
                                                   std::vector<double> snr_db = {40.0, 60.0, 80.0}) {
  constexpr SchemeId kSchemes[] = {SchemeId::Tsm1,   SchemeId::Tsm2,   SchemeId::Tsm3,
                                   SchemeId::Tsm4,   SchemeId::Tsm5SS, SchemeId::Tsm5WW,
                                   SchemeId::Tsm5SW, SchemeId::Tsm5WS, SchemeId::Tsm5Concat,
                                   SchemeId::Mat,    SchemeId::ZeroForcing, SchemeId::SingleUser};
  std::vector<ClaimRow> rows;
  for (SchemeId scheme : kSchemes) {
    for (const auto& alpha : alphas) {
      SweepConfig cfg;
      cfg.scheme = scheme;
      cfg.alpha = alpha;
      cfg.snr_db = snr_db;
      cfg.trials = trials;
      cfg.seed = seed;
      cfg.threads = threads;
      const auto points = measure_rates(cfg);
      const auto est = fit_slope(points);
      const Policy policy = scheme_policy(scheme);
      ClaimRow row;
      row.scheme = scheme;
      row.alpha = alpha.to_double();
      row.claimed = achievable_gdof<double>(policy, row.alpha).value;
      const auto bounds = evaluate_bounds(policy_distribution(policy, alpha));
      row.bound = bounds.d_min;
      row.slope = est.slope;
      row.residual_rms = est.residual_rms;
      row.pass = std::fabs(row.slope - row.claimed) <= tolerance &&
                 row.slope <= row.bound + tolerance;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace topobc
