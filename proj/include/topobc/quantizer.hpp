// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "topobc/channel.hpp"
#include "topobc/errors.hpp"

namespace topobc {

// Grid of a uniform mid-tread scalar quantizer applied per real dimension.
// Dimension d covers +-4*sigma_d with 2^{bits[d]} levels of step step[d];
// level 0 sits exactly at zero so a zero input reconstructs to zero.
struct QuantGrid {
  std::vector<int> bits_per_dim;
  std::vector<double> step;
  double sigma_dim = 0.0;  // per-dimension std of the nominal source
};

struct QuantizedSideInfo {
  std::vector<std::uint8_t> bits;  // one entry per bit, MSB first within a dimension
  QuantGrid grid;
  std::vector<cplx> reconstruction;
  int saturated_dims = 0;  // dimensions that fell outside the covered range
};

// Splits total_bits over the 2*n_values real dimensions, remainder to the
// earliest dimensions. nominal_power is the expected |value|^2 of one complex
// entry of the source.
inline QuantGrid make_quant_grid(int total_bits, int n_values, double nominal_power) {
  if (n_values > 0 && total_bits < 2 * n_values)
    throw BudgetTooSmall("quantizer budget " + std::to_string(total_bits) + " bits < 1 bit per real dimension (" +
                         std::to_string(2 * n_values) + " dims)");
  QuantGrid g;
  const int dims = 2 * n_values;
  g.sigma_dim = std::sqrt(nominal_power / 2.0);
  g.bits_per_dim.resize(dims);
  g.step.resize(dims);
  if (dims == 0) return g;
  const int base = total_bits / dims;
  const int rem = total_bits % dims;
  for (int d = 0; d < dims; ++d) {
    const int b = base + (d < rem ? 1 : 0);
    g.bits_per_dim[d] = b;
    g.step[d] = 8.0 * g.sigma_dim / std::ldexp(1.0, b);  // range / 2^bits
  }
  return g;
}

namespace detail {

inline void push_bits(std::vector<std::uint8_t>& out, std::uint64_t value, int bits) {
  for (int i = bits - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
}

inline std::uint64_t pull_bits(const std::vector<std::uint8_t>& in, size_t& pos, int bits) {
  std::uint64_t v = 0;
  for (int i = 0; i < bits; ++i) v = (v << 1) | (in[pos++] & 1u);
  return v;
}

// Mid-tread index for one real dimension, clamped to the symmetric code range.
inline std::int64_t quantize_dim(double x, double step, int bits, bool* saturated) {
  if (bits <= 0) return 0;
  const std::int64_t kmax = (std::int64_t(1) << (bits - 1)) - 1;
  std::int64_t k = std::llround(x / step);
  if (k > kmax || k < -kmax) {
    *saturated = true;
    k = std::clamp<std::int64_t>(k, -kmax, kmax);
  }
  return k;
}

}  // namespace detail

// Uniform scalar quantization of a complex vector with a total bit budget.
inline QuantizedSideInfo quantize(const std::vector<cplx>& values, int total_bits,
                                  double nominal_power) {
  QuantizedSideInfo out;
  out.grid = make_quant_grid(total_bits, static_cast<int>(values.size()), nominal_power);
  out.reconstruction.resize(values.size());
  out.bits.reserve(static_cast<size_t>(total_bits));
  for (size_t j = 0; j < values.size(); ++j) {
    double rec[2];
    const double parts[2] = {values[j].real(), values[j].imag()};
    for (int half = 0; half < 2; ++half) {
      const size_t d = 2 * j + static_cast<size_t>(half);
      bool sat = false;
      const std::int64_t k =
          detail::quantize_dim(parts[half], out.grid.step[d], out.grid.bits_per_dim[d], &sat);
      if (sat) ++out.saturated_dims;
      rec[half] = static_cast<double>(k) * out.grid.step[d];
      const int b = out.grid.bits_per_dim[d];
      if (b > 0) {
        const std::int64_t kmax = (std::int64_t(1) << (b - 1)) - 1;
        detail::push_bits(out.bits, static_cast<std::uint64_t>(k + kmax), b);
      }
    }
    out.reconstruction[j] = cplx(rec[0], rec[1]);
  }
  return out;
}

inline std::vector<cplx> dequantize(const std::vector<std::uint8_t>& bits, const QuantGrid& grid) {
  const size_t n_values = grid.bits_per_dim.size() / 2;
  std::vector<cplx> out(n_values);
  size_t pos = 0;
  for (size_t j = 0; j < n_values; ++j) {
    double rec[2];
    for (int half = 0; half < 2; ++half) {
      const size_t d = 2 * j + static_cast<size_t>(half);
      const int b = grid.bits_per_dim[d];
      if (b <= 0) {
        rec[half] = 0.0;
        continue;
      }
      const std::int64_t kmax = (std::int64_t(1) << (b - 1)) - 1;
      const auto offset = static_cast<std::int64_t>(detail::pull_bits(bits, pos, b));
      rec[half] = static_cast<double>(offset - kmax) * grid.step[d];
    }
    out[j] = cplx(rec[0], rec[1]);
  }
  return out;
}

inline std::vector<std::uint8_t> xor_bits(const std::vector<std::uint8_t>& w1,
                                          const std::vector<std::uint8_t>& w2) {
  if (w1.size() != w2.size())
    throw LengthMismatch("bit vectors differ in length: " + std::to_string(w1.size()) + " vs " +
                         std::to_string(w2.size()));
  std::vector<std::uint8_t> out(w1.size());
  for (size_t i = 0; i < w1.size(); ++i) out[i] = w1[i] ^ w2[i];
  return out;
}

// Modeled error power of one quantized complex entry under the uniform-error
// model (step^2/12 per real dimension). The analytic rate mode uses this as
// the quantization-noise power; bit-level mode measures the actual error.
inline double nominal_error_power(const QuantGrid& grid, int value_index) {
  const size_t d0 = 2 * static_cast<size_t>(value_index);
  double p = 0.0;
  for (size_t d = d0; d < d0 + 2; ++d) {
    if (grid.bits_per_dim[d] <= 1) {
      // Level zero only (or a single usable level): the error is the source
      // itself, bounded by the covered range.
      p += grid.sigma_dim * grid.sigma_dim;
    } else {
      p += grid.step[d] * grid.step[d] / 12.0;
    }
  }
  return p;
}

// Bit budget for forwarding side information whose power scales as
// rho^{prelog_uses} (the ceil of the leading term plus one bit of slack,
// which keeps the reconstruction error flat across the SNR sweep).
inline int side_info_bit_budget(double prelog_times_uses, double log2_rho) {
  const double lead = prelog_times_uses * log2_rho;
  if (lead <= 0.0) return 0;
  return static_cast<int>(std::ceil(lead - 1e-9)) + 1;
}

}  // namespace topobc
