#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace capcmp::fft {

using cplx = std::complex<double>;

/// In-place unitary DFT (forward: exp(-j...)) or its inverse. Radix-2 for
/// power-of-two sizes, direct O(N^2) evaluation otherwise.
class UnitaryDft {
 public:
  explicit UnitaryDft(std::size_t n) : n_(n), scale_(1.0 / std::sqrt(static_cast<double>(n))) {
    twiddle_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = {std::cos(angle), std::sin(angle)};
    }
    if (std::has_single_bit(n)) {
      const int bits = std::countr_zero(n);
      reversed_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
        reversed_[i] = r;
      }
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::span<cplx> data) const { transform(data, false); }
  void inverse(std::span<cplx> data) const { transform(data, true); }

 private:
  void transform(std::span<cplx> data, bool inverse) const {
    if (!reversed_.empty()) {
      radix2(data, inverse);
    } else {
      direct(data, inverse);
    }
    for (auto& v : data) v *= scale_;
  }

  cplx twiddle(std::size_t k, bool inverse) const {
    return inverse ? std::conj(twiddle_[k]) : twiddle_[k];
  }

  void radix2(std::span<cplx> a, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < reversed_[i]) std::swap(a[i], a[reversed_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          const cplx t = twiddle(j * stride, inverse) * a[start + j + len / 2];
          const cplx u = a[start + j];
          a[start + j] = u + t;
          a[start + j + len / 2] = u - t;
        }
      }
    }
  }

  void direct(std::span<cplx> a, bool inverse) const {
    std::vector<cplx> out(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < n_; ++t) acc += a[t] * twiddle((t * k) % n_, inverse);
      out[k] = acc;
    }
    std::copy(out.begin(), out.end(), a.begin());
  }

  std::size_t n_;
  double scale_;
  std::vector<cplx> twiddle_;
  std::vector<std::size_t> reversed_;
};

}  // namespace capcmp::fft
