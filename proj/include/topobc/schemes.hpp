// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "topobc/bounds.hpp"
#include "topobc/channel.hpp"
#include "topobc/layered.hpp"
#include "topobc/quantizer.hpp"
#include "topobc/rational.hpp"
#include "topobc/rng.hpp"
#include "topobc/state_model.hpp"

namespace topobc {

enum class SchemeId {
  Tsm1,        // half (N,D), half (P,N) feedback on a fixed uneven topology
  Tsm2,        // half (P,D), half (N,N) feedback on a fixed uneven topology
  Tsm3,        // delayed feedback, fixed topology; three phases with XOR forwarding
  Tsm4,        // delayed feedback, alternating topology; third use favors user 1
  Tsm4Remark,  // alternating-topology variant whose third use favors user 2
  Tsm5SS,      // (P,N)/(N,P), both uses on topology (1,alpha)
  Tsm5WW,      // (P,N)/(N,P), both uses on topology (alpha,1)
  Tsm5SW,      // (P,N) on (1,alpha), (N,P) on (alpha,1)
  Tsm5WS,      // (P,N) on (alpha,1), (N,P) on (1,alpha)
  Tsm5Concat,  // (P,N)/(N,P) over a scheduled topology mix, paired greedily
  Mat,         // three-slot overheard-interference retransmission baseline
  ZeroForcing, // current feedback for both users, fixed uneven topology
  SingleUser,  // serve user 1 only
};

enum class Fidelity { Analytic, BitLevel };

struct SchemeParams {
  Rational alpha{0, 1};
  SnrPoint snr{1.0};
  Fidelity mode = Fidelity::Analytic;
  int scale_m = 1;          // phase-length multiplier for the three-phase scheme
  bool noiseless = false;   // value-level paths: zero receiver noise (pipeline tests)
  int concat_horizon = 16;  // channel uses scheduled by the concatenated runner
  double alpha_value() const { return alpha.to_double(); }
};

struct SymbolInfo {
  std::string name;
  int owner = 0;        // 1, 2, or 0 for overhead layers
  double prelog = 0.0;  // designed bits = prelog * log2(rho)
};

// One channel use: per-symbol antenna-domain columns (x_t = sum_k col_k s_k)
// plus the two link exponents in force at that use.
struct Use {
  std::vector<Vec2> cols;
  double exp1 = 1.0;
  double exp2 = 1.0;
};

inline double use_power(const Use& u) {
  double p = 0.0;
  for (const auto& c : u.cols) p += norm2(c);
  return p;
}

// Scales the use so its transmit covariance has unit trace; returns the scale.
inline double normalize_use(Use& u) {
  const double p = use_power(u);
  if (p <= 0.0) return 1.0;
  const double s = 1.0 / std::sqrt(p);
  for (auto& c : u.cols) c = scaled(c, s);
  return s;
}

struct LayerDiag {
  std::string name;
  double mi = 0.0;
  double design_bits = 0.0;
  int credit_user = 0;
};

struct SchemeOutcome {
  double rate_u1 = 0.0;  // bits per channel use
  double rate_u2 = 0.0;
  int block_length = 0;
  std::vector<LayerDiag> diagnostics;
  // Side-information pipeline diagnostics (three-phase and alternating schemes).
  std::vector<double> quant_error_z;  // per-entry reconstruction error power
  std::vector<double> quant_error_y;
  int quant_bits = 0;
  int saturated_dims = 0;
  bool xor_roundtrip_ok = true;
  int recovered_bit_errors = 0;  // noisy bit-level recovery mismatches
};

// Everything a scheme block commits to before rates are measured. Tests
// inspect this directly (power constraint, nulled interference coefficients).
struct BuiltBlock {
  int uses = 0;
  std::vector<SymbolInfo> symbols;
  std::vector<Use> tx;
  std::vector<System> u1, u2;
  std::vector<double> quant_error_z, quant_error_y;
  int quant_bits = 0;
  int saturated_dims = 0;
  bool xor_roundtrip_ok = true;
  int recovered_bit_errors = 0;
};

namespace detail {

constexpr double kNoiseFloor = 1e-12;

inline int add_symbol(BuiltBlock& blk, std::string name, int owner, double prelog) {
  blk.symbols.push_back({std::move(name), owner, prelog});
  return static_cast<int>(blk.symbols.size()) - 1;
}

inline Obs rx_row(const Use& use, const Vec2& ch, double rho, double exponent, size_t n_symbols) {
  Obs o;
  o.coef.assign(n_symbols, cplx(0.0, 0.0));
  const double amp = std::pow(rho, exponent / 2.0);
  for (size_t k = 0; k < use.cols.size(); ++k) o.coef[k] = amp * dot_t(ch, use.cols[k]);
  o.noise_power = 1.0;
  return o;
}

inline std::string layer_name(const BuiltBlock& blk, const DecodeStep& st) {
  std::string s;
  for (int k : st.symbols) {
    if (!s.empty()) s += "+";
    s += blk.symbols[static_cast<size_t>(k)].name;
  }
  return s;
}

}  // namespace detail

// Measured achievable rates of a built block. Each decode step is credited
// min(designed bits, Gaussian MI of the step); linked steps (a layer several
// receivers must decode) take the minimum across all of them. Rates therefore
// never exceed the design, and the design is what the slope fit checks.
inline SchemeOutcome evaluate_block(const BuiltBlock& blk) {
  SchemeOutcome out;
  out.block_length = blk.uses;
  out.quant_error_z = blk.quant_error_z;
  out.quant_error_y = blk.quant_error_y;
  out.quant_bits = blk.quant_bits;
  out.saturated_dims = blk.saturated_dims;
  out.xor_roundtrip_ok = blk.xor_roundtrip_ok;
  out.recovered_bit_errors = blk.recovered_bit_errors;

  struct StepRef {
    const DecodeStep* step;
    double mi;
  };
  std::vector<StepRef> refs;
  std::map<int, double> link_min;
  for (const auto* chain : {&blk.u1, &blk.u2}) {
    for (const auto& sys : *chain) {
      const auto mi = step_mutual_information(sys);
      for (size_t k = 0; k < sys.steps.size(); ++k) {
        refs.push_back({&sys.steps[k], mi[k]});
        const int link = sys.steps[k].link;
        if (link >= 0) {
          auto it = link_min.find(link);
          if (it == link_min.end())
            link_min[link] = mi[k];
          else
            it->second = std::min(it->second, mi[k]);
        }
      }
    }
  }
  for (const auto& r : refs) {
    double credited = std::min(r.step->design_bits, r.mi);
    if (r.step->link >= 0) credited = std::min(credited, link_min[r.step->link]);
    credited = std::max(0.0, credited);
    if (r.step->credit_user == 1) out.rate_u1 += credited;
    if (r.step->credit_user == 2) out.rate_u2 += credited;
    out.diagnostics.push_back(
        {detail::layer_name(blk, *r.step), r.mi, r.step->design_bits, r.step->credit_user});
  }
  out.rate_u1 /= blk.uses;
  out.rate_u2 /= blk.uses;
  return out;
}

// ---------------------------------------------------------------------------
// Scheme blocks
// ---------------------------------------------------------------------------

// Half (N,D), half (P,N) on topology (1,alpha). The blind first use carries
// two symbols for user 1; the second use repeats the combination overheard by
// user 2 on antenna 1 and hides one symbol for user 2 from user 1.
inline BuiltBlock build_tsm1(const SchemeParams& pr, GaussianStream& rng) {
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  BuiltBlock blk;
  blk.uses = 2;
  const int a1 = detail::add_symbol(blk, "a1", 1, 1.0);
  const int a2 = detail::add_symbol(blk, "a2", 1, 1.0);
  const int b1 = detail::add_symbol(blk, "b1", 2, alpha);
  const size_t K = blk.symbols.size();

  const auto ch1 = sample_realization(rng);
  const auto ch2 = sample_realization(rng);
  constexpr double kInvSqrt2 = 0.7071067811865475244;

  Use t1{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t1.cols[a1] = {kInvSqrt2, 0.0};
  t1.cols[a2] = {0.0, kInvSqrt2};

  Use t2{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  const cplx ell_a1 = dot_t(ch1.g, t1.cols[a1]);
  const cplx ell_a2 = dot_t(ch1.g, t1.cols[a2]);
  t2.cols[a1] = {ell_a1, 0.0};
  t2.cols[a2] = {ell_a2, 0.0};
  t2.cols[b1] = zf_direction(ch2.h);
  const double s2 = normalize_use(t2);
  blk.tx = {t1, t2};

  System sys1;
  sys1.rows = {detail::rx_row(t1, ch1.h, rho, 1.0, K), detail::rx_row(t2, ch2.h, rho, 1.0, K)};
  sys1.steps = {{{a1, a2}, 2.0 * L, 1, -1}};
  blk.u1.push_back(std::move(sys1));

  const Obs z1 = detail::rx_row(t1, ch1.g, rho, alpha, K);
  const Obs z2 = detail::rx_row(t2, ch2.g, rho, alpha, K);
  // Scale the second look so the repeated combination lines up, then subtract.
  const cplx kappa = 1.0 / (ch2.g[0] * s2);
  System sys2;
  sys2.rows = {combine(kappa, z2, cplx(-1.0, 0.0), z1)};
  sys2.steps = {{{b1}, alpha * L, 2, -1}};
  blk.u2.push_back(std::move(sys2));
  return blk;
}

// Half (P,D), half (N,N) on topology (1,alpha). The first use adds a
// zero-forced symbol for user 2 on top of user 1's pair; the blind second use
// repeats the overheard combination of user 1's symbols only.
inline BuiltBlock build_tsm2(const SchemeParams& pr, GaussianStream& rng) {
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  BuiltBlock blk;
  blk.uses = 2;
  const int a1 = detail::add_symbol(blk, "a1", 1, 1.0);
  const int a2 = detail::add_symbol(blk, "a2", 1, 1.0);
  const int b1 = detail::add_symbol(blk, "b1", 2, alpha);
  const size_t K = blk.symbols.size();

  const auto ch1 = sample_realization(rng);
  const auto ch2 = sample_realization(rng);
  const double kInvSqrt3 = 1.0 / std::sqrt(3.0);

  Use t1{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t1.cols[a1] = {kInvSqrt3, 0.0};
  t1.cols[a2] = {0.0, kInvSqrt3};
  t1.cols[b1] = scaled(zf_direction(ch1.h), kInvSqrt3);

  Use t2{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  // Only user 1's symbols are repeated; repeating the hidden symbol too would
  // cancel it out of user 2's difference.
  t2.cols[a1] = {dot_t(ch1.g, t1.cols[a1]), 0.0};
  t2.cols[a2] = {dot_t(ch1.g, t1.cols[a2]), 0.0};
  const double s2 = normalize_use(t2);
  blk.tx = {t1, t2};

  System sys1;
  sys1.rows = {detail::rx_row(t1, ch1.h, rho, 1.0, K), detail::rx_row(t2, ch2.h, rho, 1.0, K)};
  sys1.steps = {{{a1, a2}, 2.0 * L, 1, -1}};
  blk.u1.push_back(std::move(sys1));

  const Obs z1 = detail::rx_row(t1, ch1.g, rho, alpha, K);
  const Obs z2 = detail::rx_row(t2, ch2.g, rho, alpha, K);
  const cplx kappa = 1.0 / (ch2.g[0] * s2);
  System sys2;
  sys2.rows = {combine(cplx(1.0, 0.0), z1, -kappa, z2)};
  sys2.steps = {{{b1}, alpha * L, 2, -1}};
  blk.u2.push_back(std::move(sys2));
  return blk;
}

namespace detail {

// Shared state of the quantize-and-forward pipeline in the two delayed-CSIT
// schemes: the sources, their bit budget and the per-entry error powers the
// decoder systems should see.
struct SideInfo {
  std::vector<double> error_power;  // per complex entry
  int bits = 0;
  int saturated = 0;
};

inline SideInfo modeled_side_info(int budget, int n_values, double nominal_power) {
  SideInfo si;
  si.bits = budget;
  si.error_power.assign(static_cast<size_t>(n_values), nominal_power);
  if (budget <= 0 || n_values == 0) return si;  // no bits: reconstruction is zero
  const auto grid = make_quant_grid(budget, n_values, nominal_power);
  for (int j = 0; j < n_values; ++j) si.error_power[static_cast<size_t>(j)] = nominal_error_power(grid, j);
  return si;
}

}  // namespace detail

// Delayed feedback on both channels, fixed topology (1,alpha), rational
// alpha = p/q. Three phases of lengths T1 = T3 = q*m and T2 = p*m. Phase 3
// forwards the XOR of the two quantized interference records as a common
// layer, with a private top-up symbol for user 1 underneath.
inline BuiltBlock build_tsm3(const SchemeParams& pr, GaussianStream& rng) {
  if (pr.scale_m <= 0) throw NonIntegerPhases("phase scale must be positive");
  const auto p = pr.alpha.num();
  const auto q = pr.alpha.den();
  if (p < 0 || p > q) throw NonIntegerPhases("alpha must be a rational in [0,1]");
  const int T1 = static_cast<int>(q) * pr.scale_m;
  const int T2 = static_cast<int>(p) * pr.scale_m;
  const int T3 = T1;
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  constexpr double kInvSqrt2 = 0.7071067811865475244;

  BuiltBlock blk;
  blk.uses = T1 + T2 + T3;
  std::vector<int> a1s(T1), a2s(T1), b1s(T2), b2s(T2), cs(T3), a3s(T3);
  for (int t = 0; t < T1; ++t) {
    a1s[t] = detail::add_symbol(blk, "a1_" + std::to_string(t), 1, 1.0);
    a2s[t] = detail::add_symbol(blk, "a2_" + std::to_string(t), 1, alpha);
  }
  for (int t = 0; t < T2; ++t) {
    b1s[t] = detail::add_symbol(blk, "b1_" + std::to_string(t), 2, 1.0);
    b2s[t] = detail::add_symbol(blk, "b2_" + std::to_string(t), 2, alpha);
  }
  for (int t = 0; t < T3; ++t) {
    cs[t] = detail::add_symbol(blk, "c_" + std::to_string(t), 0, alpha);
    a3s[t] = detail::add_symbol(blk, "a3_" + std::to_string(t), 1, 1.0 - alpha);
  }
  const size_t K = blk.symbols.size();

  std::vector<ChannelRealization> ch(static_cast<size_t>(blk.uses));
  for (auto& c : ch) c = sample_realization(rng);

  blk.tx.assign(static_cast<size_t>(blk.uses), Use{std::vector<Vec2>(K, Vec2{}), 1.0, alpha});
  for (int t = 0; t < T1; ++t) {
    blk.tx[t].cols[a1s[t]] = {kInvSqrt2, 0.0};
    blk.tx[t].cols[a2s[t]] = {0.0, kInvSqrt2};
  }
  for (int t = 0; t < T2; ++t) {
    blk.tx[T1 + t].cols[b1s[t]] = {kInvSqrt2, 0.0};
    blk.tx[T1 + t].cols[b2s[t]] = {0.0, kInvSqrt2};
  }
  const double s3 = 1.0 / std::sqrt(1.0 + std::pow(rho, -alpha));
  for (int t = 0; t < T3; ++t) {
    auto& use = blk.tx[T1 + T2 + t];
    use.cols[cs[t]] = {s3, 0.0};
    use.cols[a3s[t]] = {s3 * std::pow(rho, -alpha / 2.0), 0.0};
  }

  // Quantize-and-forward bookkeeping. Matched phase lengths give both records
  // the same bit count, so the XOR is well defined.
  const int budget = side_info_bit_budget(alpha * T1, L);
  blk.quant_bits = budget;
  std::vector<double> err_z(static_cast<size_t>(T1), std::pow(rho, alpha));
  std::vector<double> err_y(static_cast<size_t>(T2), rho);
  if (pr.mode == Fidelity::Analytic) {
    const auto si_z = detail::modeled_side_info(budget, T1, std::pow(rho, alpha));
    const auto si_y = detail::modeled_side_info(budget, T2, rho);
    err_z = si_z.error_power;
    err_y = si_y.error_power;
  } else {
    // Value-level pipeline: draw the symbols the two phases actually carry,
    // reconstruct both interference records, quantize, XOR, and recover each
    // record from the other side's bits.
    std::vector<cplx> sym(K, cplx(0.0, 0.0));
    for (int t = 0; t < T1; ++t) {
      sym[a1s[t]] = rng.cnormal();
      sym[a2s[t]] = rng.cnormal();
    }
    for (int t = 0; t < T2; ++t) {
      sym[b1s[t]] = rng.cnormal();
      sym[b2s[t]] = rng.cnormal();
    }
    const auto tx_value = [&](int use, const Vec2& chvec, double exponent) {
      cplx v(0.0, 0.0);
      for (size_t k = 0; k < K; ++k) v += dot_t(chvec, blk.tx[static_cast<size_t>(use)].cols[k]) * sym[k];
      return std::pow(rho, exponent / 2.0) * v;
    };
    std::vector<cplx> vec_z(static_cast<size_t>(T1)), vec_y(static_cast<size_t>(T2));
    for (int t = 0; t < T1; ++t) vec_z[t] = tx_value(t, ch[t].g, alpha);
    for (int t = 0; t < T2; ++t) vec_y[t] = tx_value(T1 + t, ch[T1 + t].h, 1.0);
    if (budget > 0) {
      const auto qz = quantize(vec_z, budget, std::pow(rho, alpha));
      const auto qy = quantize(vec_y, budget, rho);
      blk.saturated_dims = qz.saturated_dims + qy.saturated_dims;
      const auto forwarded = xor_bits(qz.bits, qy.bits);
      // User 1 re-quantizes its own record of phase 2 and peels the XOR; in
      // noiseless mode this recovers the transmitter's bits exactly.
      std::vector<cplx> local_y = vec_y;
      std::vector<cplx> local_z = vec_z;
      if (!pr.noiseless) {
        for (int t = 0; t < T2; ++t) local_y[t] += ch[T1 + t].u;
        for (int t = 0; t < T1; ++t) local_z[t] += ch[t].v;
      }
      const auto qy_local = quantize(local_y, budget, rho);
      const auto qz_local = quantize(local_z, budget, std::pow(rho, alpha));
      const auto rec_bits_z = xor_bits(forwarded, qy_local.bits);
      const auto rec_bits_y = xor_bits(forwarded, qz_local.bits);
      blk.xor_roundtrip_ok = (rec_bits_z == qz.bits) && (rec_bits_y == qy.bits);
      for (size_t i = 0; i < rec_bits_z.size(); ++i)
        blk.recovered_bit_errors += (rec_bits_z[i] != qz.bits[i]) + (rec_bits_y[i] != qy.bits[i]);
      const auto rec_z = dequantize(rec_bits_z, qz.grid);
      const auto rec_y = dequantize(rec_bits_y, qy.grid);
      for (int t = 0; t < T1; ++t) err_z[t] = std::norm(vec_z[t] - rec_z[t]);
      for (int t = 0; t < T2; ++t) err_y[t] = std::norm(vec_y[t] - rec_y[t]);
    } else {
      for (int t = 0; t < T1; ++t) err_z[t] = std::norm(vec_z[t]);
      for (int t = 0; t < T2; ++t) err_y[t] = std::norm(vec_y[t]);
    }
  }
  blk.quant_error_z = err_z;
  blk.quant_error_y = err_y;

  // User 1: one two-row system per phase-1 use (direct look plus recovered
  // interference record), then the common/private split in phase 3.
  for (int t = 0; t < T1; ++t) {
    System sys;
    sys.rows.push_back(detail::rx_row(blk.tx[t], ch[t].h, rho, 1.0, K));
    Obs si = detail::rx_row(blk.tx[t], ch[t].g, rho, alpha, K);
    si.noise_power = std::max(err_z[t], detail::kNoiseFloor);
    sys.rows.push_back(std::move(si));
    sys.steps = {{{a1s[t], a2s[t]}, (1.0 + alpha) * L, 1, -1}};
    blk.u1.push_back(std::move(sys));
  }
  for (int t = 0; t < T3; ++t) {
    const int use = T1 + T2 + t;
    System sys;
    sys.rows = {detail::rx_row(blk.tx[use], ch[use].h, rho, 1.0, K)};
    sys.steps = {{{cs[t]}, alpha * L, 0, -1}, {{a3s[t]}, (1.0 - alpha) * L, 1, -1}};
    blk.u1.push_back(std::move(sys));
  }

  // User 2: common layer in phase 3, then per phase-2 use the direct look
  // plus its recovered record of user 1's interference.
  for (int t = 0; t < T3; ++t) {
    const int use = T1 + T2 + t;
    System sys;
    sys.rows = {detail::rx_row(blk.tx[use], ch[use].g, rho, alpha, K)};
    sys.steps = {{{cs[t]}, alpha * L, 0, -1}};
    blk.u2.push_back(std::move(sys));
  }
  for (int t = 0; t < T2; ++t) {
    const int use = T1 + t;
    System sys;
    sys.rows.push_back(detail::rx_row(blk.tx[use], ch[use].g, rho, alpha, K));
    Obs si = detail::rx_row(blk.tx[use], ch[use].h, rho, 1.0, K);
    si.noise_power = std::max(err_y[t], detail::kNoiseFloor);
    sys.rows.push_back(std::move(si));
    sys.steps = {{{b1s[t], b2s[t]}, (1.0 + alpha) * L, 2, -1}};
    blk.u2.push_back(std::move(sys));
  }
  return blk;
}

// Delayed feedback with alternating topology: (1,a), (a,1), then a third use
// whose strong side carries the private top-up. The transmitter forwards one
// quantized sum of the two overheard interference terms as a common symbol.
inline BuiltBlock build_tsm4(const SchemeParams& pr, GaussianStream& rng, bool remark_order) {
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  constexpr double kInvSqrt2 = 0.7071067811865475244;

  BuiltBlock blk;
  blk.uses = 3;
  const int a1 = detail::add_symbol(blk, "a1", 1, 1.0);
  const int a2 = detail::add_symbol(blk, "a2", 1, alpha);
  const int b1 = detail::add_symbol(blk, "b1", 2, 1.0);
  const int b2 = detail::add_symbol(blk, "b2", 2, alpha);
  const int c = detail::add_symbol(blk, "c", 0, alpha);
  const int p3 = detail::add_symbol(blk, remark_order ? "b3" : "a3", remark_order ? 2 : 1, 1.0 - alpha);
  const size_t K = blk.symbols.size();

  const auto ch1 = sample_realization(rng);
  const auto ch2 = sample_realization(rng);
  const auto ch3 = sample_realization(rng);

  Use t1{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t1.cols[a1] = {kInvSqrt2, 0.0};
  t1.cols[a2] = {0.0, kInvSqrt2};
  Use t2{std::vector<Vec2>(K, Vec2{}), alpha, 1.0};
  t2.cols[b1] = {kInvSqrt2, 0.0};
  t2.cols[b2] = {0.0, kInvSqrt2};
  Use t3{std::vector<Vec2>(K, Vec2{}), remark_order ? alpha : 1.0, remark_order ? 1.0 : alpha};
  const double s3 = 1.0 / std::sqrt(1.0 + std::pow(rho, -alpha));
  t3.cols[c] = {s3, 0.0};
  t3.cols[p3] = {s3 * std::pow(rho, -alpha / 2.0), 0.0};
  blk.tx = {t1, t2, t3};

  // Both overheard terms sit at the weak-link level, so their sum is a single
  // bounded-power value to quantize.
  const int budget = side_info_bit_budget(alpha, L);
  blk.quant_bits = budget;
  const double nominal = 2.0 * std::pow(rho, alpha);
  double err = nominal;  // zero-bit fallback: reconstruction is zero
  if (pr.mode == Fidelity::Analytic) {
    if (budget > 0) err = detail::modeled_side_info(budget, 1, nominal).error_power[0];
  } else {
    std::vector<cplx> sym(K, cplx(0.0, 0.0));
    sym[a1] = rng.cnormal();
    sym[a2] = rng.cnormal();
    sym[b1] = rng.cnormal();
    sym[b2] = rng.cnormal();
    cplx iota(0.0, 0.0);
    for (size_t k = 0; k < K; ++k) {
      iota += std::pow(rho, alpha / 2.0) * dot_t(ch1.g, t1.cols[k]) * sym[k];
      iota += std::pow(rho, alpha / 2.0) * dot_t(ch2.h, t2.cols[k]) * sym[k];
    }
    if (budget > 0) {
      const auto qi = quantize({iota}, budget, nominal);
      blk.saturated_dims = qi.saturated_dims;
      const auto rec = dequantize(qi.bits, qi.grid);
      blk.xor_roundtrip_ok = (rec.size() == 1) && (rec[0] == qi.reconstruction[0]);
      err = std::norm(iota - qi.reconstruction[0]);
    } else {
      err = std::norm(iota);
    }
  }
  blk.quant_error_z = {err};

  // User 1: common then private on the third use; two-row system on the first.
  {
    System sys;
    sys.rows = {detail::rx_row(t3, ch3.h, rho, t3.exp1, K)};
    sys.steps = {{{c}, alpha * L, 0, -1}};
    if (!remark_order) sys.steps.push_back({{p3}, (1.0 - alpha) * L, 1, -1});
    blk.u1.push_back(std::move(sys));
  }
  {
    System sys;
    sys.rows.push_back(detail::rx_row(t1, ch1.h, rho, 1.0, K));
    // Recovered common value minus the user's own second-use observation:
    // the other user's part cancels, leaving user 1's overheard record.
    Obs si = detail::rx_row(t1, ch1.g, rho, alpha, K);
    si.noise_power = 1.0 + err;
    sys.rows.push_back(std::move(si));
    sys.steps = {{{a1, a2}, (1.0 + alpha) * L, 1, -1}};
    blk.u1.push_back(std::move(sys));
  }

  // User 2.
  {
    System sys;
    sys.rows = {detail::rx_row(t3, ch3.g, rho, t3.exp2, K)};
    sys.steps = {{{c}, alpha * L, 0, -1}};
    if (remark_order) sys.steps.push_back({{p3}, (1.0 - alpha) * L, 2, -1});
    blk.u2.push_back(std::move(sys));
  }
  {
    System sys;
    sys.rows.push_back(detail::rx_row(t2, ch2.g, rho, 1.0, K));
    Obs si = detail::rx_row(t2, ch2.h, rho, alpha, K);
    si.noise_power = 1.0 + err;
    sys.rows.push_back(std::move(si));
    sys.steps = {{{b1, b2}, (1.0 + alpha) * L, 2, -1}};
    blk.u2.push_back(std::move(sys));
  }
  return blk;
}

namespace detail {

// Swap the two users' roles in a built block: systems, credited owners and
// per-use link exponents. Channel draws are exchangeable, so relabeling is
// statistically identical to rebuilding the mirrored scheme.
inline void swap_block_users(BuiltBlock& blk) {
  std::swap(blk.u1, blk.u2);
  for (auto& chain : {std::ref(blk.u1), std::ref(blk.u2)})
    for (auto& sys : chain.get())
      for (auto& st : sys.steps)
        if (st.credit_user != 0) st.credit_user = 3 - st.credit_user;
  for (auto& s : blk.symbols)
    if (s.owner != 0) s.owner = 3 - s.owner;
  for (auto& use : blk.tx) std::swap(use.exp1, use.exp2);
}

}  // namespace detail

// (P,N)/(N,P) pair on one shared uneven topology. The current-feedback slot
// of each use beamforms to the user whose channel is known; user 1 collects
// two looks at (a1, a2), user 2 cancels the aligned repeat to expose b1.
inline BuiltBlock build_tsm5_same_topology(const SchemeParams& pr, GaussianStream& rng,
                                           bool swap_users) {
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  constexpr double kInvSqrt2 = 0.7071067811865475244;

  BuiltBlock blk;
  blk.uses = 2;
  const int a1 = detail::add_symbol(blk, "a1", 1, 1.0);
  const int a2 = detail::add_symbol(blk, "a2", 1, 1.0);
  const int b1 = detail::add_symbol(blk, "b1", 2, alpha);
  const size_t K = blk.symbols.size();

  const auto ch1 = sample_realization(rng);
  const auto ch2 = sample_realization(rng);

  Use t1{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t1.cols[a1] = scaled(matched_direction(ch1.h), kInvSqrt2);
  t1.cols[b1] = scaled(zf_direction(ch1.h), kInvSqrt2);
  Use t2{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t2.cols[a1] = scaled(matched_direction(ch2.g), kInvSqrt2);
  t2.cols[a2] = scaled(zf_direction(ch2.g), kInvSqrt2);
  blk.tx = {t1, t2};

  System sys1;
  sys1.rows = {detail::rx_row(t1, ch1.h, rho, 1.0, K), detail::rx_row(t2, ch2.h, rho, 1.0, K)};
  sys1.steps = {{{a1, a2}, 2.0 * L, 1, -1}};
  blk.u1.push_back(std::move(sys1));

  const Obs z1 = detail::rx_row(t1, ch1.g, rho, alpha, K);
  const Obs z2 = detail::rx_row(t2, ch2.g, rho, alpha, K);
  const cplx kappa = z1.coef[a1] / z2.coef[a1];  // a1 repeat alignment
  System sys2;
  sys2.rows = {combine(cplx(1.0, 0.0), z1, -kappa, z2)};
  sys2.steps = {{{b1}, alpha * L, 2, -1}};
  blk.u2.push_back(std::move(sys2));

  if (swap_users) detail::swap_block_users(blk);
  return blk;
}

// (P,N)/(N,P) pair across opposite uneven topologies. Superposition splits
// each use into an upper layer at the weak-link level and a lower layer that
// only the strong receiver of that use can see; a1 is decoded by both users.
inline BuiltBlock build_tsm5_cross_topology(const SchemeParams& pr, GaussianStream& rng,
                                            bool swap_users) {
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;

  BuiltBlock blk;
  blk.uses = 2;
  const int a1 = detail::add_symbol(blk, "a1", 1, alpha);
  const int a2 = detail::add_symbol(blk, "a2", 1, 1.0 - alpha);
  const int a3 = detail::add_symbol(blk, "a3", 1, alpha);
  const int b1 = detail::add_symbol(blk, "b1", 2, alpha);
  const int b2 = detail::add_symbol(blk, "b2", 2, 1.0 - alpha);
  const size_t K = blk.symbols.size();

  const auto ch1 = sample_realization(rng);
  const auto ch2 = sample_realization(rng);
  const double sub = std::pow(rho, -alpha / 2.0);

  Use t1{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t1.cols[a1] = matched_direction(ch1.h);
  t1.cols[a2] = scaled(matched_direction(ch1.h), sub);
  t1.cols[b1] = zf_direction(ch1.h);
  normalize_use(t1);
  Use t2{std::vector<Vec2>(K, Vec2{}), alpha, 1.0};
  t2.cols[a1] = matched_direction(ch2.g);
  t2.cols[a3] = zf_direction(ch2.g);
  t2.cols[b2] = scaled(matched_direction(ch2.g), sub);
  normalize_use(t2);
  blk.tx = {t1, t2};

  System sys1;
  sys1.rows = {detail::rx_row(t1, ch1.h, rho, 1.0, K), detail::rx_row(t2, ch2.h, rho, alpha, K)};
  sys1.steps = {{{a1}, alpha * L, 1, 0},
                {{a2}, (1.0 - alpha) * L, 1, -1},
                {{a3}, alpha * L, 1, -1}};
  blk.u1.push_back(std::move(sys1));

  System sys2;
  sys2.rows = {detail::rx_row(t1, ch1.g, rho, alpha, K), detail::rx_row(t2, ch2.g, rho, 1.0, K)};
  sys2.steps = {{{a1}, alpha * L, 0, 0},
                {{b2}, (1.0 - alpha) * L, 2, -1},
                {{b1}, alpha * L, 2, -1}};
  blk.u2.push_back(std::move(sys2));

  if (swap_users) detail::swap_block_users(blk);
  return blk;
}

// Three-slot baseline: two blind broadcasts, then antenna 1 repeats the sum
// of both overheard combinations. The weak user's pair is rate-limited to the
// weak-link prelog.
inline BuiltBlock build_mat(const SchemeParams& pr, GaussianStream& rng) {
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  constexpr double kInvSqrt2 = 0.7071067811865475244;

  BuiltBlock blk;
  blk.uses = 3;
  const int a1 = detail::add_symbol(blk, "a1", 1, 1.0);
  const int a2 = detail::add_symbol(blk, "a2", 1, 1.0);
  const int b1 = detail::add_symbol(blk, "b1", 2, alpha);
  const int b2 = detail::add_symbol(blk, "b2", 2, alpha);
  const size_t K = blk.symbols.size();

  const auto ch1 = sample_realization(rng);
  const auto ch2 = sample_realization(rng);
  const auto ch3 = sample_realization(rng);

  Use t1{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t1.cols[a1] = {kInvSqrt2, 0.0};
  t1.cols[a2] = {0.0, kInvSqrt2};
  Use t2{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t2.cols[b1] = {kInvSqrt2, 0.0};
  t2.cols[b2] = {0.0, kInvSqrt2};
  Use t3{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  for (int k : {a1, a2}) t3.cols[k] = {dot_t(ch1.g, t1.cols[static_cast<size_t>(k)]), 0.0};
  for (int k : {b1, b2}) t3.cols[k] = {dot_t(ch2.h, t2.cols[static_cast<size_t>(k)]), 0.0};
  const double s3 = normalize_use(t3);
  blk.tx = {t1, t2, t3};

  const Obs y1 = detail::rx_row(t1, ch1.h, rho, 1.0, K);
  const Obs y2 = detail::rx_row(t2, ch2.h, rho, 1.0, K);
  const Obs y3 = detail::rx_row(t3, ch3.h, rho, 1.0, K);
  const cplx k1 = 1.0 / (ch3.h[0] * s3);
  System sys1;
  sys1.rows = {y1, combine(k1, y3, cplx(-1.0, 0.0), y2)};
  sys1.steps = {{{a1, a2}, 2.0 * L, 1, -1}};
  blk.u1.push_back(std::move(sys1));

  const Obs z1 = detail::rx_row(t1, ch1.g, rho, alpha, K);
  const Obs z2 = detail::rx_row(t2, ch2.g, rho, alpha, K);
  const Obs z3 = detail::rx_row(t3, ch3.g, rho, alpha, K);
  const cplx k2 = 1.0 / (ch3.g[0] * s3);
  System sys2;
  sys2.rows = {z2, combine(k2, z3, cplx(-1.0, 0.0), z1)};
  sys2.steps = {{{b1, b2}, 2.0 * alpha * L, 2, -1}};
  blk.u2.push_back(std::move(sys2));
  return blk;
}

// Current feedback for both users on topology (1,alpha): each symbol rides
// the direction invisible to the other user.
inline BuiltBlock build_zero_forcing(const SchemeParams& pr, GaussianStream& rng) {
  const double alpha = pr.alpha_value();
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  constexpr double kInvSqrt2 = 0.7071067811865475244;

  BuiltBlock blk;
  blk.uses = 1;
  const int a = detail::add_symbol(blk, "a", 1, 1.0);
  const int b = detail::add_symbol(blk, "b", 2, alpha);
  const size_t K = blk.symbols.size();
  const auto ch = sample_realization(rng);

  Use t{std::vector<Vec2>(K, Vec2{}), 1.0, alpha};
  t.cols[a] = scaled(zf_direction(ch.g), kInvSqrt2);
  t.cols[b] = scaled(zf_direction(ch.h), kInvSqrt2);
  blk.tx = {t};

  System sys1;
  sys1.rows = {detail::rx_row(t, ch.h, rho, 1.0, K)};
  sys1.steps = {{{a}, L, 1, -1}};
  blk.u1.push_back(std::move(sys1));
  System sys2;
  sys2.rows = {detail::rx_row(t, ch.g, rho, alpha, K)};
  sys2.steps = {{{b}, alpha * L, 2, -1}};
  blk.u2.push_back(std::move(sys2));
  return blk;
}

inline BuiltBlock build_single_user(const SchemeParams& pr, GaussianStream& rng) {
  const double rho = pr.snr.rho;
  const double L = pr.snr.log2_rho;
  BuiltBlock blk;
  blk.uses = 1;
  const int a = detail::add_symbol(blk, "a", 1, 1.0);
  const size_t K = blk.symbols.size();
  const auto ch = sample_realization(rng);
  Use t{std::vector<Vec2>(K, Vec2{}), 1.0, pr.alpha_value()};
  t.cols[a] = matched_direction(ch.h);
  blk.tx = {t};
  System sys1;
  sys1.rows = {detail::rx_row(t, ch.h, rho, 1.0, K)};
  sys1.steps = {{{a}, L, 1, -1}};
  blk.u1.push_back(std::move(sys1));
  return blk;
}

inline BuiltBlock build_block(SchemeId id, const SchemeParams& pr, GaussianStream& rng) {
  switch (id) {
    case SchemeId::Tsm1: return build_tsm1(pr, rng);
    case SchemeId::Tsm2: return build_tsm2(pr, rng);
    case SchemeId::Tsm3: return build_tsm3(pr, rng);
    case SchemeId::Tsm4: return build_tsm4(pr, rng, false);
    case SchemeId::Tsm4Remark: return build_tsm4(pr, rng, true);
    case SchemeId::Tsm5SS: return build_tsm5_same_topology(pr, rng, false);
    case SchemeId::Tsm5WW: return build_tsm5_same_topology(pr, rng, true);
    case SchemeId::Tsm5SW: return build_tsm5_cross_topology(pr, rng, false);
    case SchemeId::Tsm5WS: return build_tsm5_cross_topology(pr, rng, true);
    case SchemeId::Mat: return build_mat(pr, rng);
    case SchemeId::ZeroForcing: return build_zero_forcing(pr, rng);
    case SchemeId::SingleUser: return build_single_user(pr, rng);
    case SchemeId::Tsm5Concat:
      throw std::invalid_argument("the concatenated runner needs a distribution; use run_scheme");
  }
  throw std::invalid_argument("unknown scheme");
}

// Greedy pairing of (P,N) and (N,P) uses from a scheduled horizon; each pair
// dispatches to the matching two-use block. Unpaired leftovers waste their
// uses; more than two means the schedule cannot realize the family.
inline SchemeOutcome run_tsm5_concat(const StateDistribution& dist, const SchemeParams& pr,
                                     GaussianStream& rng) {
  require_valid(dist);
  const auto schedule = periodic_schedule(dist, pr.concat_horizon);
  for (const auto& st : schedule) {
    const bool pn = st.csit == CsitPair{Csit::P, Csit::N};
    const bool np = st.csit == CsitPair{Csit::N, Csit::P};
    if (!pn && !np)
      throw ValidationError({{"concatenation needs (P,N)/(N,P) feedback, got " + state_name(st), 0.0}});
    if (st.topo.a1 == st.topo.a2)
      throw ValidationError({{"concatenation needs a strictly uneven topology, got " + state_name(st), 0.0}});
  }

  std::deque<TopologyPair> pending_pn, pending_np;
  double bits_u1 = 0.0, bits_u2 = 0.0;
  SchemeOutcome out;
  for (const auto& st : schedule) {
    const bool is_pn = st.csit == CsitPair{Csit::P, Csit::N};
    TopologyPair pn_topo{}, np_topo{};
    bool have_pair = false;
    if (is_pn) {
      if (!pending_np.empty()) {
        np_topo = pending_np.front();
        pending_np.pop_front();
        pn_topo = st.topo;
        have_pair = true;
      } else {
        pending_pn.push_back(st.topo);
      }
    } else {
      if (!pending_pn.empty()) {
        pn_topo = pending_pn.front();
        pending_pn.pop_front();
        np_topo = st.topo;
        have_pair = true;
      } else {
        pending_np.push_back(st.topo);
      }
    }
    if (!have_pair) continue;
    SchemeId sub;
    const bool pn_strong_first = pn_topo.a1 == Link::Strong;
    const bool np_strong_first = np_topo.a1 == Link::Strong;
    if (pn_strong_first && np_strong_first) sub = SchemeId::Tsm5SS;
    else if (!pn_strong_first && !np_strong_first) sub = SchemeId::Tsm5WW;
    else if (pn_strong_first) sub = SchemeId::Tsm5SW;
    else sub = SchemeId::Tsm5WS;
    const auto blk = build_block(sub, pr, rng);
    const auto res = evaluate_block(blk);
    bits_u1 += res.rate_u1 * res.block_length;
    bits_u2 += res.rate_u2 * res.block_length;
  }
  const size_t leftover = pending_pn.size() + pending_np.size();
  if (leftover > 2)
    throw UnpairableSchedule("schedule left " + std::to_string(leftover) + " unpaired uses");
  out.block_length = pr.concat_horizon;
  out.rate_u1 = bits_u1 / pr.concat_horizon;
  out.rate_u2 = bits_u2 / pr.concat_horizon;
  return out;
}

inline StateDistribution default_concat_distribution(Rational alpha) {
  return policy_distribution(Policy::Tsm5PnNp, alpha);
}

inline SchemeOutcome run_scheme(SchemeId id, const SchemeParams& pr, GaussianStream& rng) {
  if (id == SchemeId::Tsm5Concat)
    return run_tsm5_concat(default_concat_distribution(pr.alpha), pr, rng);
  return evaluate_block(build_block(id, pr, rng));
}

// CLI identifiers and the closed-form policy each scheme realizes.
inline const char* scheme_cli_name(SchemeId id) {
  switch (id) {
    case SchemeId::Tsm1: return "tsm1";
    case SchemeId::Tsm2: return "tsm2";
    case SchemeId::Tsm3: return "tsm3";
    case SchemeId::Tsm4: return "tsm4";
    case SchemeId::Tsm4Remark: return "tsm4-remark";
    case SchemeId::Tsm5SS: return "tsm5-ss";
    case SchemeId::Tsm5WW: return "tsm5-ww";
    case SchemeId::Tsm5SW: return "tsm5-sw";
    case SchemeId::Tsm5WS: return "tsm5-ws";
    case SchemeId::Tsm5Concat: return "tsm5-concat";
    case SchemeId::Mat: return "mat";
    case SchemeId::ZeroForcing: return "zf";
    case SchemeId::SingleUser: return "su";
  }
  return "?";
}

inline Policy scheme_policy(SchemeId id) {
  switch (id) {
    case SchemeId::Tsm1: return Policy::Tsm1NdPn;
    case SchemeId::Tsm2: return Policy::Tsm2PdNn;
    case SchemeId::Tsm3: return Policy::Tsm3DdFixedLB;
    case SchemeId::Tsm4:
    case SchemeId::Tsm4Remark: return Policy::Tsm4DdAlt;
    case SchemeId::Tsm5SS:
    case SchemeId::Tsm5WW:
    case SchemeId::Tsm5SW:
    case SchemeId::Tsm5WS:
    case SchemeId::Tsm5Concat: return Policy::Tsm5PnNp;
    case SchemeId::Mat: return Policy::MatFixed;
    case SchemeId::ZeroForcing: return Policy::ZfPerfect;
    case SchemeId::SingleUser: return Policy::SingleUser;
  }
  return Policy::SingleUser;
}

inline std::optional<SchemeId> scheme_from_cli_name(const std::string& name) {
  constexpr SchemeId kAll[] = {SchemeId::Tsm1,   SchemeId::Tsm2,     SchemeId::Tsm3,
                               SchemeId::Tsm4,   SchemeId::Tsm4Remark, SchemeId::Tsm5SS,
                               SchemeId::Tsm5WW, SchemeId::Tsm5SW,   SchemeId::Tsm5WS,
                               SchemeId::Tsm5Concat, SchemeId::Mat,  SchemeId::ZeroForcing,
                               SchemeId::SingleUser};
  for (SchemeId id : kAll)
    if (name == scheme_cli_name(id)) return id;
  return std::nullopt;
}

}  // namespace topobc
