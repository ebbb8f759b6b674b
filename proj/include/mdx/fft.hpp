#pragma once

// Radix-2 FFT. RealFft transforms N real samples through an N/2-point complex
// transform and the usual even/odd split.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "mdx/error.hpp"

namespace mdx {

using cplx = std::complex<double>;

inline constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n) : n_(n), rev_(n), twiddle_(n / 2) {
    if (!is_power_of_two(n)) throw InvalidInputError("FFT size must be a power of two");
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      rev_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k)
      twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }

  std::size_t size() const { return n_; }

  // In place. Unnormalized in both directions.
  void forward(std::span<cplx> x) const { transform(x, false); }
  void inverse(std::span<cplx> x) const { transform(x, true); }

 private:
  void transform(std::span<cplx> x, bool inv) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (i < rev_[i]) std::swap(x[i], x[rev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          cplx w = twiddle_[j * step];
          if (inv) w = std::conj(w);
          cplx u = x[start + j];
          cplx v = x[start + j + half] * w;
          x[start + j] = u + v;
          x[start + j + half] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<cplx> twiddle_;
};

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), half_(n < 2 ? 1 : n / 2), work_(n / 2), twiddle_(n / 2 + 1) {
    if (n < 2 || !is_power_of_two(n)) throw InvalidInputError("FFT size must be a power of two >= 2");
    for (std::size_t k = 0; k <= n / 2; ++k)
      twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // `in` has n samples, `out` n/2 + 1 bins.
  void forward(std::span<const double> in, std::span<cplx> out) {
    const std::size_t m = n_ / 2;
    for (std::size_t k = 0; k < m; ++k) work_[k] = cplx(in[2 * k], in[2 * k + 1]);
    half_.forward(work_);
    for (std::size_t k = 0; k <= m; ++k) {
      cplx zk = work_[k % m];
      cplx zc = std::conj(work_[(m - k) % m]);
      cplx even = 0.5 * (zk + zc);
      cplx odd = cplx(0.0, -0.5) * (zk - zc);
      out[k] = even + twiddle_[k] * odd;
    }
  }

  // Inverse of forward, including the 1/n normalization.
  void inverse(std::span<const cplx> in, std::span<double> out) {
    const std::size_t m = n_ / 2;
    for (std::size_t k = 0; k < m; ++k) {
      cplx xk = in[k];
      cplx xc = std::conj(in[m - k]);
      cplx even = 0.5 * (xk + xc);
      cplx odd = 0.5 * (xk - xc) * std::conj(twiddle_[k]);
      work_[k] = even + cplx(0.0, 1.0) * odd;
    }
    half_.inverse(work_);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
      out[2 * k] = work_[k].real() * scale;
      out[2 * k + 1] = work_[k].imag() * scale;
    }
  }

 private:
  std::size_t n_;
  ComplexFft half_;
  std::vector<cplx> work_;
  std::vector<cplx> twiddle_;
};

}  // namespace mdx
