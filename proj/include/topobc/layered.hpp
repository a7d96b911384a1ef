// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "topobc/channel.hpp"
#include "topobc/errors.hpp"

namespace topobc {

// One effective observation: a complex coefficient row over the block's
// symbol list plus the aggregate noise power on that row (thermal noise and,
// where applicable, quantization noise).
struct Obs {
  std::vector<cplx> coef;
  double noise_power = 1.0;
};

// Linear combination a*o1 + b*o2 of two observations with independent noise.
inline Obs combine(cplx a, const Obs& o1, cplx b, const Obs& o2) {
  Obs out;
  out.coef.resize(o1.coef.size());
  for (size_t k = 0; k < o1.coef.size(); ++k) out.coef[k] = a * o1.coef[k] + b * o2.coef[k];
  out.noise_power = std::norm(a) * o1.noise_power + std::norm(b) * o2.noise_power;
  return out;
}

// One stage of successive decoding: the layer's symbols are decoded jointly,
// then subtracted. design_bits is the codebook size the scheme grants the
// layer; credit_user receives those bits (0 = overhead layer). Steps sharing
// a nonnegative link id must all support the layer, so the credited rate
// takes the minimum across them.
struct DecodeStep {
  std::vector<int> symbols;
  double design_bits = 0.0;
  int credit_user = 0;
  int link = -1;
};

// A stacked set of observations with its decode order. Symbols that appear in
// no step stay in the interference term throughout.
struct System {
  std::vector<Obs> rows;
  std::vector<DecodeStep> steps;
};

// Gaussian mutual information of each decode step, in bits for the whole
// stacked system. Step k sees every not-yet-decoded layer (and every
// never-decoded symbol) as additional Gaussian noise:
//   I_k = log2 det(N + sum_{j>=k} A_j A_j^H) - log2 det(N + sum_{j>k} A_j A_j^H).
inline std::vector<double> step_mutual_information(const System& sys) {
  const int m = static_cast<int>(sys.rows.size());
  const size_t n_sym = sys.rows.empty() ? 0 : sys.rows[0].coef.size();

  std::vector<char> in_steps(n_sym, 0);
  for (const auto& st : sys.steps)
    for (int s : st.symbols) in_steps[static_cast<size_t>(s)] = 1;

  // Covariance of rows restricted to a symbol set plus noise.
  const auto gram_logdet = [&](const std::vector<char>& active) {
    std::vector<cplx> M(static_cast<size_t>(m) * m, cplx(0.0, 0.0));
    for (int i = 0; i < m; ++i) {
      M[i * m + i] += sys.rows[i].noise_power;
      for (int j = 0; j <= i; ++j) {
        cplx s(0.0, 0.0);
        for (size_t k = 0; k < n_sym; ++k)
          if (active[k]) s += sys.rows[i].coef[k] * std::conj(sys.rows[j].coef[k]);
        M[i * m + j] += s;
        if (i != j) M[j * m + i] += std::conj(s);
      }
    }
    double out = 0.0;
    // Cholesky; the noise terms keep the matrix positive definite.
    for (int jj = 0; jj < m; ++jj) {
      for (int ii = jj; ii < m; ++ii) {
        cplx s = M[ii * m + jj];
        for (int kk = 0; kk < jj; ++kk) s -= M[ii * m + kk] * std::conj(M[jj * m + kk]);
        if (ii == jj) {
          const double d = s.real();
          if (!(d > 0.0)) throw SingularSystem("stacked observation system is rank deficient");
          M[jj * m + jj] = std::sqrt(d);
          out += std::log2(d);
        } else {
          M[ii * m + jj] = s / M[jj * m + jj].real();
        }
      }
    }
    return out;
  };

  // Active set for step k: never-decoded symbols plus layers k..end.
  std::vector<char> active(n_sym, 0);
  for (size_t k = 0; k < n_sym; ++k) active[k] = in_steps[k] ? 0 : 1;

  std::vector<double> after(sys.steps.size() + 1, 0.0);
  after[sys.steps.size()] = gram_logdet(active);
  for (int k = static_cast<int>(sys.steps.size()) - 1; k >= 0; --k) {
    for (int s : sys.steps[static_cast<size_t>(k)].symbols) active[static_cast<size_t>(s)] = 1;
    after[static_cast<size_t>(k)] = gram_logdet(active);
  }

  std::vector<double> mi(sys.steps.size(), 0.0);
  for (size_t k = 0; k < sys.steps.size(); ++k) {
    mi[k] = std::max(0.0, after[k] - after[k + 1]);
  }
  return mi;
}

// Rate (bits per channel use) of a chosen subset of decode steps.
inline double evaluate_layered_rate(const std::vector<Obs>& rows,
                                    const std::vector<DecodeStep>& decode_order,
                                    const std::vector<int>& target_steps, int block_length) {
  System sys{rows, decode_order};
  const auto mi = step_mutual_information(sys);
  double total = 0.0;
  for (int t : target_steps) total += mi[static_cast<size_t>(t)];
  return total / static_cast<double>(block_length);
}

}  // namespace topobc
