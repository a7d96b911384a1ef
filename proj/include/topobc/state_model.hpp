// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topobc/errors.hpp"
#include "topobc/rational.hpp"

namespace topobc {

// Per-user feedback state for one channel use: current (P), delayed (D), none (N).
enum class Csit : int { P = 0, D = 1, N = 2 };

// Per-link strength state: a strong link scales as rho, a weak one as rho^alpha.
enum class Link : int { Strong = 0, Weak = 1 };

struct CsitPair {
  Csit i1 = Csit::P;
  Csit i2 = Csit::P;
  friend bool operator==(const CsitPair&, const CsitPair&) = default;
};

struct TopologyPair {
  Link a1 = Link::Strong;
  Link a2 = Link::Strong;
  friend bool operator==(const TopologyPair&, const TopologyPair&) = default;
};

inline int csit_index(CsitPair c) { return static_cast<int>(c.i1) * 3 + static_cast<int>(c.i2); }
inline int topology_index(TopologyPair t) {
  return static_cast<int>(t.a1) * 2 + static_cast<int>(t.a2);
}
inline CsitPair csit_from_index(int i) {
  return {static_cast<Csit>(i / 3), static_cast<Csit>(i % 3)};
}
inline TopologyPair topology_from_index(int i) {
  return {static_cast<Link>(i / 2), static_cast<Link>(i % 2)};
}

// Joint feedback-and-topology state; 9 x 4 = 36 in total. index() fixes the
// lexicographic order used everywhere a deterministic order is needed.
struct StateKey {
  CsitPair csit;
  TopologyPair topo;
  int index() const { return csit_index(csit) * 4 + topology_index(topo); }
  friend bool operator==(const StateKey&, const StateKey&) = default;
};

inline StateKey state_from_index(int i) { return {csit_from_index(i / 4), topology_from_index(i % 4)}; }

inline char csit_letter(Csit c) { return c == Csit::P ? 'P' : (c == Csit::D ? 'D' : 'N'); }
inline char link_letter(Link a) { return a == Link::Strong ? 'S' : 'W'; }

inline std::string csit_name(CsitPair c) { return {csit_letter(c.i1), csit_letter(c.i2)}; }
inline std::string topology_name(TopologyPair t) { return {link_letter(t.a1), link_letter(t.a2)}; }
inline std::string state_name(StateKey k) { return csit_name(k.csit) + ":" + topology_name(k.topo); }

inline std::optional<Csit> parse_csit_letter(char c) {
  switch (c) {
    case 'P': return Csit::P;
    case 'D': return Csit::D;
    case 'N': return Csit::N;
    default: return std::nullopt;
  }
}
inline std::optional<Link> parse_link_letter(char c) {
  switch (c) {
    case 'S': return Link::Strong;
    case 'W': return Link::Weak;
    default: return std::nullopt;
  }
}

// Joint fractions lambda over the 36 states plus the strength ratio alpha.
// Fractions are kept both as doubles (simulation) and, whenever every entry is
// cleanly representable, as exact rationals (bound evaluation).
class StateDistribution {
 public:
  static constexpr int kStates = 36;

  StateDistribution() { exact_.fill(Rational(0)); }

  Rational alpha{0, 1};  // in [0,1], exact by construction

  double alpha_value() const { return alpha.to_double(); }

  void set(CsitPair c, TopologyPair t, double f) {
    const int i = StateKey{c, t}.index();
    frac_[i] = f;
    if (auto r = Rational::from_double(f, 1000000)) {
      exact_[i] = *r;
    } else {
      all_exact_ = false;
    }
  }

  void set_exact(CsitPair c, TopologyPair t, Rational f) {
    const int i = StateKey{c, t}.index();
    exact_[i] = f;
    frac_[i] = f.to_double();
  }

  double fraction(CsitPair c, TopologyPair t) const { return frac_[StateKey{c, t}.index()]; }
  double fraction(int index) const { return frac_[index]; }
  const std::array<double, kStates>& fractions() const { return frac_; }

  bool exact() const { return all_exact_; }
  Rational fraction_exact(int index) const { return exact_[index]; }

 private:
  std::array<double, kStates> frac_{};
  std::array<Rational, kStates> exact_{};
  bool all_exact_ = true;
};

// Returns the list of broken constraints; empty means the distribution is usable.
inline std::vector<Violation> validate_distribution(const StateDistribution& dist) {
  std::vector<Violation> report;
  double sum = 0.0;
  for (int i = 0; i < StateDistribution::kStates; ++i) {
    const double f = dist.fraction(i);
    if (f < 0.0)
      report.push_back({"nonnegative fraction " + state_name(state_from_index(i)), f});
    if (!std::isfinite(f))
      report.push_back({"finite fraction " + state_name(state_from_index(i)), f});
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-12) report.push_back({"unit sum", sum});
  const double a = dist.alpha_value();
  if (a < 0.0 || a > 1.0) report.push_back({"alpha in [0,1]", a});
  return report;
}

inline void require_valid(const StateDistribution& dist) {
  auto report = validate_distribution(dist);
  if (!report.empty()) throw ValidationError(std::move(report));
}

// CSIT marginals, topology marginals, and the swap-aggregated fractions
// (P<->N etc.) per topology pair that the general outer bound consumes.
template <class T>
struct MarginalReport {
  std::array<T, 9> csit{};      // lambda_{I1,I2}
  std::array<T, 4> topology{};  // lambda_{A1,A2}
  // per topology pair, indexed by topology_index
  std::array<T, 4> pp{}, dd{}, nn{};  // lambda_{P,P}, lambda_{D,D}, lambda_{N,N}
  std::array<T, 4> pd{}, pn{}, dn{};  // lambda_{P<->D}, lambda_{P<->N}, lambda_{D<->N}
};

namespace detail {

template <class T, class Getter>
MarginalReport<T> marginal_report(Getter get) {
  MarginalReport<T> m;
  for (int ci = 0; ci < 9; ++ci) {
    const CsitPair c = csit_from_index(ci);
    for (int ti = 0; ti < 4; ++ti) {
      const T f = get(StateKey{c, topology_from_index(ti)}.index());
      m.csit[ci] += f;
      m.topology[ti] += f;
      const Csit i1 = c.i1, i2 = c.i2;
      if (i1 == Csit::P && i2 == Csit::P) m.pp[ti] += f;
      if (i1 == Csit::D && i2 == Csit::D) m.dd[ti] += f;
      if (i1 == Csit::N && i2 == Csit::N) m.nn[ti] += f;
      if ((i1 == Csit::P && i2 == Csit::D) || (i1 == Csit::D && i2 == Csit::P)) m.pd[ti] += f;
      if ((i1 == Csit::P && i2 == Csit::N) || (i1 == Csit::N && i2 == Csit::P)) m.pn[ti] += f;
      if ((i1 == Csit::D && i2 == Csit::N) || (i1 == Csit::N && i2 == Csit::D)) m.dn[ti] += f;
    }
  }
  return m;
}

}  // namespace detail

inline MarginalReport<double> marginals(const StateDistribution& dist) {
  return detail::marginal_report<double>([&](int i) { return dist.fraction(i); });
}

inline std::optional<MarginalReport<Rational>> marginals_exact(const StateDistribution& dist) {
  if (!dist.exact()) return std::nullopt;
  return detail::marginal_report<Rational>([&](int i) { return dist.fraction_exact(i); });
}

// Deterministic horizon-n realization of the fractions: largest-remainder
// apportionment of per-state counts, then a smooth round robin that keeps
// same-state uses maximally spread. Lexicographic state order breaks ties.
inline std::vector<StateKey> periodic_schedule(const StateDistribution& dist, int n) {
  require_valid(dist);
  if (n <= 0) throw HorizonTooShort("schedule horizon must be positive");

  struct Entry {
    int state;
    double frac;
    int count;
    double remainder;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < StateDistribution::kStates; ++i) {
    const double f = dist.fraction(i);
    if (f > 0.0) {
      const double quota = f * n;
      const int base = static_cast<int>(std::floor(quota + 1e-12));
      entries.push_back({i, f, base, quota - base});
    }
  }
  if (static_cast<int>(entries.size()) > n)
    throw HorizonTooShort("horizon " + std::to_string(n) + " cannot represent " +
                          std::to_string(entries.size()) + " states");

  int assigned = 0;
  for (const auto& e : entries) assigned += e.count;
  std::vector<int> order(entries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (entries[a].remainder != entries[b].remainder)
      return entries[a].remainder > entries[b].remainder;
    return entries[a].state < entries[b].state;
  });
  for (int k = 0; assigned < n; ++k) {
    entries[order[k % order.size()]].count += 1;
    ++assigned;
  }

  // Smooth round robin: at each slot emit the state with the largest deficit
  // against its ideal pace, so occurrences of one state are evenly spaced.
  std::vector<StateKey> schedule;
  schedule.reserve(n);
  std::vector<int> emitted(entries.size(), 0);
  for (int t = 1; t <= n; ++t) {
    // Entries are in lexicographic state order, so requiring strict improvement
    // makes ties fall to the smaller state.
    int best = -1;
    double best_deficit = -1e300;
    for (size_t j = 0; j < entries.size(); ++j) {
      if (emitted[j] >= entries[j].count) continue;
      const double deficit =
          static_cast<double>(entries[j].count) * t / n - static_cast<double>(emitted[j]);
      if (deficit > best_deficit + 1e-12) {
        best = static_cast<int>(j);
        best_deficit = deficit;
      }
    }
    emitted[best] += 1;
    schedule.push_back(state_from_index(entries[best].state));
  }
  return schedule;
}

}  // namespace topobc
