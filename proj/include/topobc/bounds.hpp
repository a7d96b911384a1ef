// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>

#include "topobc/rational.hpp"
#include "topobc/state_model.hpp"

namespace topobc {

// Sum-GDoF upper bounds. d1/d2 apply to a fixed uneven topology and depend on
// CSIT marginals only; d3/d4 hold for any joint feedback-and-topology mix.
template <class T>
struct BoundReport {
  bool has_fixed = false;    // d1, d2 populated
  bool has_general = false;  // d3, d4 populated
  T d1{}, d2{}, d3{}, d4{};
  T d_min{};
};

namespace detail {

template <class T>
T ratio(int num, int den) {
  return T(num) / T(den);
}

template <>
inline double ratio<double>(int num, int den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

// Fixed-topology bound pair over CSIT marginals indexed by csit_index().
template <class T>
BoundReport<T> outer_bound_fixed(const std::array<T, 9>& m, T alpha) {
  const auto l = [&](Csit i1, Csit i2) { return m[csit_index({i1, i2})]; };
  const T one(1), two(2), three(3);
  const T c_pp = one + alpha;
  const T c_swap_pd = (three + two * alpha) / three;  // (3+2a)/3
  const T c_rest = (three + alpha) / three;           // (3+a)/3
  BoundReport<T> r;
  r.d1 = c_pp * l(Csit::P, Csit::P) +
         c_swap_pd * (l(Csit::P, Csit::D) + l(Csit::D, Csit::P) + l(Csit::P, Csit::N) +
                      l(Csit::N, Csit::P)) +
         c_rest * (l(Csit::D, Csit::D) + l(Csit::D, Csit::N) + l(Csit::N, Csit::D) +
                   l(Csit::N, Csit::N));
  r.d2 = (one + alpha) * (l(Csit::P, Csit::P) + l(Csit::P, Csit::D) + l(Csit::D, Csit::P) +
                          l(Csit::D, Csit::D)) +
         ((two + alpha) / two) * (l(Csit::P, Csit::N) + l(Csit::N, Csit::P) +
                                  l(Csit::D, Csit::N) + l(Csit::N, Csit::D)) +
         l(Csit::N, Csit::N);
  r.has_fixed = true;
  r.d_min = std::min(r.d1, r.d2);
  return r;
}

// General bound pair over the joint marginal report.
template <class T>
BoundReport<T> outer_bound_general(const MarginalReport<T>& m, T alpha) {
  const int sw = topology_index({Link::Strong, Link::Weak});
  const int ws = topology_index({Link::Weak, Link::Strong});
  const int ss = topology_index({Link::Strong, Link::Strong});
  const int ww = topology_index({Link::Weak, Link::Weak});
  const auto uneven = [&](const std::array<T, 4>& a) { return a[sw] + a[ws]; };

  const T one(1), two(2), three(3), five(5), four(4);
  BoundReport<T> r;

  // d3: 2:1 weighted pair bounds combined across both user orderings.
  r.d3 = (one + alpha) * uneven(m.pp) + ((three + two * alpha) / three) * uneven(m.pd) +
         ((three + two * alpha) / three) * uneven(m.pn) + ((three + alpha) / three) * uneven(m.dd) +
         ((three + alpha) / three) * uneven(m.dn) + ((three + alpha) / three) * uneven(m.nn) +
         two * m.pp[ss] + (five / three) * m.pd[ss] + (five / three) * m.pn[ss] +
         (four / three) * m.dd[ss] + (four / three) * m.dn[ss] + (four / three) * m.nn[ss] +
         two * alpha * m.pp[ww] + (five * alpha / three) * m.pd[ww] +
         (five * alpha / three) * m.pn[ww] + (four * alpha / three) * m.dd[ww] +
         (four * alpha / three) * m.dn[ww] + (four * alpha / three) * m.nn[ww];

  // d4: compound bound where delayed feedback is as good as current feedback.
  r.d4 = (one + alpha) * (uneven(m.pp) + uneven(m.pd) + uneven(m.dd)) +
         ((two + alpha) / two) * (uneven(m.pn) + uneven(m.dn)) + uneven(m.nn) +
         two * (m.pp[ss] + m.pd[ss] + m.dd[ss]) +
         two * alpha * (m.pp[ww] + m.pd[ww] + m.dd[ww]) +
         (three / two) * (m.pn[ss] + m.dn[ss]) + (three * alpha / two) * (m.pn[ww] + m.dn[ww]) +
         m.nn[ss] + alpha * m.nn[ww];

  r.has_general = true;
  r.d_min = std::min(r.d3, r.d4);
  return r;
}

// Named feedback-and-topology policies with known achieved sum GDoF.
enum class Policy {
  ZfPerfect,       // always-current feedback, fixed uneven topology
  Tsm1NdPn,        // half (N,D), half (P,N), fixed uneven topology
  Tsm2PdNn,        // half (P,D), half (N,N), fixed uneven topology
  Tsm3DdFixedLB,   // always-delayed feedback, fixed uneven topology (lower bound)
  Tsm4DdAlt,       // always-delayed feedback, symmetrically alternating topology
  Tsm5PnNp,        // half (P,N), half (N,P), any strictly uneven topology
  MatFixed,        // classical three-slot delayed-feedback scheme, fixed topology
  DdNonDiverse,    // always-delayed feedback, even topology split (1,1)/(a,a)
  PnNpNonDiverse,  // (P,N)/(N,P) feedback, even topology split (1,1)/(a,a)
  SingleUser,      // serve user 1 only
};

enum class OptimalityFlag { Optimal, LowerBound, SubOptimal };

template <class T>
struct AchievableGdof {
  T value{};
  OptimalityFlag flag = OptimalityFlag::SubOptimal;
};

inline const char* policy_name(Policy p) {
  switch (p) {
    case Policy::ZfPerfect: return "zf-perfect";
    case Policy::Tsm1NdPn: return "tsm1-nd-pn";
    case Policy::Tsm2PdNn: return "tsm2-pd-nn";
    case Policy::Tsm3DdFixedLB: return "tsm3-dd-fixed";
    case Policy::Tsm4DdAlt: return "tsm4-dd-alt";
    case Policy::Tsm5PnNp: return "tsm5-pn-np";
    case Policy::MatFixed: return "mat-fixed";
    case Policy::DdNonDiverse: return "dd-non-diverse";
    case Policy::PnNpNonDiverse: return "pn-np-non-diverse";
    case Policy::SingleUser: return "single-user";
  }
  return "?";
}

// Closed-form achieved sum GDoF per policy. Optimality is recorded data, not
// something inferred from the bounds.
template <class T>
AchievableGdof<T> achievable_gdof(Policy p, T alpha) {
  const T one(1), two(2), three(3), four(4);
  switch (p) {
    case Policy::ZfPerfect: return {one + alpha, OptimalityFlag::Optimal};
    case Policy::Tsm1NdPn: return {one + alpha / two, OptimalityFlag::Optimal};
    case Policy::Tsm2PdNn: return {one + alpha / two, OptimalityFlag::Optimal};
    case Policy::Tsm3DdFixedLB:
      return {one + alpha * alpha / (two + alpha), OptimalityFlag::LowerBound};
    case Policy::Tsm4DdAlt: return {one + alpha / three, OptimalityFlag::Optimal};
    case Policy::Tsm5PnNp: return {one + alpha / two, OptimalityFlag::Optimal};
    case Policy::MatFixed: return {two * (one + alpha) / three, OptimalityFlag::SubOptimal};
    case Policy::DdNonDiverse: return {two * (one + alpha) / three, OptimalityFlag::Optimal};
    case Policy::PnNpNonDiverse: return {three * (one + alpha) / four, OptimalityFlag::Optimal};
    case Policy::SingleUser: return {one, OptimalityFlag::SubOptimal};
  }
  return {};
}

// Canonical distribution realizing each policy (used by the bounds CLI, the
// dominance checks and the Monte Carlo verification table).
inline StateDistribution policy_distribution(Policy p, Rational alpha) {
  StateDistribution d;
  d.alpha = alpha;
  const TopologyPair sw{Link::Strong, Link::Weak};
  const TopologyPair ws{Link::Weak, Link::Strong};
  const TopologyPair ss{Link::Strong, Link::Strong};
  const TopologyPair ww{Link::Weak, Link::Weak};
  const Rational half(1, 2), quarter(1, 4), one(1);
  switch (p) {
    case Policy::ZfPerfect:
      d.set_exact({Csit::P, Csit::P}, sw, one);
      break;
    case Policy::Tsm1NdPn:
      d.set_exact({Csit::N, Csit::D}, sw, half);
      d.set_exact({Csit::P, Csit::N}, sw, half);
      break;
    case Policy::Tsm2PdNn:
      d.set_exact({Csit::P, Csit::D}, sw, half);
      d.set_exact({Csit::N, Csit::N}, sw, half);
      break;
    case Policy::Tsm3DdFixedLB:
    case Policy::MatFixed:
      d.set_exact({Csit::D, Csit::D}, sw, one);
      break;
    case Policy::Tsm4DdAlt:
      d.set_exact({Csit::D, Csit::D}, sw, half);
      d.set_exact({Csit::D, Csit::D}, ws, half);
      break;
    case Policy::Tsm5PnNp:
      d.set_exact({Csit::P, Csit::N}, sw, quarter);
      d.set_exact({Csit::N, Csit::P}, sw, quarter);
      d.set_exact({Csit::P, Csit::N}, ws, quarter);
      d.set_exact({Csit::N, Csit::P}, ws, quarter);
      break;
    case Policy::DdNonDiverse:
      d.set_exact({Csit::D, Csit::D}, ss, half);
      d.set_exact({Csit::D, Csit::D}, ww, half);
      break;
    case Policy::PnNpNonDiverse:
      d.set_exact({Csit::P, Csit::N}, ss, quarter);
      d.set_exact({Csit::N, Csit::P}, ss, quarter);
      d.set_exact({Csit::P, Csit::N}, ww, quarter);
      d.set_exact({Csit::N, Csit::P}, ww, quarter);
      break;
    case Policy::SingleUser:
      d.set_exact({Csit::N, Csit::N}, sw, one);
      break;
  }
  return d;
}

// True when the distribution's support sits on a single topology pair; the
// fixed-topology bound then applies to its CSIT marginals.
inline std::optional<TopologyPair> single_topology_support(const StateDistribution& dist) {
  std::optional<TopologyPair> found;
  for (int i = 0; i < StateDistribution::kStates; ++i) {
    if (dist.fraction(i) <= 0.0) continue;
    const TopologyPair t = state_from_index(i).topo;
    if (found && !(*found == t)) return std::nullopt;
    found = t;
  }
  return found;
}

// Both bound families evaluated on a distribution (fixed bounds only when the
// support is a single uneven topology).
template <class T, class Getter>
BoundReport<T> evaluate_bounds_impl(const StateDistribution& dist, T alpha, Getter get) {
  const auto m = detail::marginal_report<T>(get);
  BoundReport<T> general = outer_bound_general<T>(m, alpha);
  const auto topo = single_topology_support(dist);
  if (topo && !(topo->a1 == topo->a2)) {
    const auto fixed = outer_bound_fixed<T>(m.csit, alpha);
    general.has_fixed = true;
    general.d1 = fixed.d1;
    general.d2 = fixed.d2;
    general.d_min = std::min(general.d_min, fixed.d_min);
  }
  return general;
}

inline BoundReport<double> evaluate_bounds(const StateDistribution& dist) {
  return evaluate_bounds_impl<double>(dist, dist.alpha_value(),
                                      [&](int i) { return dist.fraction(i); });
}

inline std::optional<BoundReport<Rational>> evaluate_bounds_exact(const StateDistribution& dist) {
  if (!dist.exact()) return std::nullopt;
  return evaluate_bounds_impl<Rational>(dist, dist.alpha,
                                        [&](int i) { return dist.fraction_exact(i); });
}

// Pattern-matches a distribution against the canonical policy list.
inline std::optional<Policy> recognize_policy(const StateDistribution& dist) {
  constexpr Policy kAll[] = {Policy::ZfPerfect,    Policy::Tsm1NdPn,     Policy::Tsm2PdNn,
                             Policy::Tsm3DdFixedLB, Policy::Tsm4DdAlt,    Policy::Tsm5PnNp,
                             Policy::DdNonDiverse, Policy::PnNpNonDiverse, Policy::SingleUser};
  for (Policy p : kAll) {
    const StateDistribution ref = policy_distribution(p, dist.alpha);
    bool same = true;
    for (int i = 0; i < StateDistribution::kStates && same; ++i)
      same = std::fabs(ref.fraction(i) - dist.fraction(i)) <= 1e-12;
    if (same) return p;
  }
  // The (P,N)/(N,P) family is optimal for any strictly uneven topology split.
  const auto m = marginals(dist);
  const int sw = topology_index({Link::Strong, Link::Weak});
  const int ws = topology_index({Link::Weak, Link::Strong});
  double pn_total = 0.0, np_total = 0.0;
  for (int ti : {sw, ws}) {
    pn_total += dist.fraction({Csit::P, Csit::N}, topology_from_index(ti));
    np_total += dist.fraction({Csit::N, Csit::P}, topology_from_index(ti));
  }
  if (std::fabs(pn_total - 0.5) <= 1e-12 && std::fabs(np_total - 0.5) <= 1e-12 &&
      std::fabs(m.topology[sw] + m.topology[ws] - 1.0) <= 1e-12)
    return Policy::Tsm5PnNp;
  return std::nullopt;
}

}  // namespace topobc
