#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "capcmp/error.hpp"

namespace capcmp {

using cplx = std::complex<double>;

/// Complex FIR impulse response h_0 ... h_{L-1}.
class ChannelTaps {
 public:
  explicit ChannelTaps(std::vector<cplx> taps) : taps_(std::move(taps)) {
    if (taps_.empty()) throw DomainError("channel needs at least one tap");
    for (const auto& t : taps_) {
      if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) {
        throw DomainError("channel taps must be finite");
      }
    }
  }

  static ChannelTaps real(const std::vector<double>& taps) {
    return ChannelTaps(std::vector<cplx>(taps.begin(), taps.end()));
  }

  std::span<const cplx> taps() const { return taps_; }
  std::size_t length() const { return taps_.size(); }
  std::size_t memory() const { return taps_.size() - 1; }

  double energy() const {
    double e = 0.0;
    for (const auto& t : taps_) e += std::norm(t);
    return e;
  }

  bool is_real() const {
    for (const auto& t : taps_) {
      if (t.imag() != 0.0) return false;
    }
    return true;
  }

 private:
  std::vector<cplx> taps_;
};

/// Scales the taps to unit energy.
inline ChannelTaps normalize(const ChannelTaps& channel) {
  const double e = channel.energy();
  if (!(e > 0.0)) throw DomainError("normalize: all-zero channel");
  const double scale = 1.0 / std::sqrt(e);
  std::vector<cplx> out(channel.taps().begin(), channel.taps().end());
  for (auto& t : out) t *= scale;
  return ChannelTaps(std::move(out));
}

/// Expands prod_i (1 - z_i z^-1) and normalizes. Coefficients whose
/// imaginary part is below 1e-12 (conjugate-pair zeros) are made real.
inline ChannelTaps from_zeros(std::span<const cplx> zeros) {
  if (zeros.empty()) throw DomainError("from_zeros: empty zero list");
  std::vector<cplx> poly{1.0};
  for (const auto& z : zeros) {
    std::vector<cplx> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= z * poly[i];
    }
    poly = std::move(next);
  }
  for (auto& c : poly) {
    if (std::abs(c.imag()) < 1e-12) c = {c.real(), 0.0};
  }
  return normalize(ChannelTaps(std::move(poly)));
}

/// Unit-energy channel with zeros at 0.95 exp(+-j 0.9 pi).
inline ChannelTaps fig1_channel() {
  const cplx z = std::polar(0.95, 0.9 * std::numbers::pi);
  const std::vector<cplx> zeros{z, std::conj(z)};
  return from_zeros(zeros);
}

/// Linear-phase 5-tap channel 0.1624(1+z^-4) + 0.4546(z^-1+z^-3) + 0.7307 z^-2.
inline ChannelTaps fig3_channel() {
  return normalize(ChannelTaps::real({0.1624, 0.4546, 0.7307, 0.4546, 0.1624}));
}

/// Circulant eigenvalues H_k = sum_n h_n exp(-j 2 pi n k / N), i.e. the
/// unnormalized DFT of the zero-padded taps, so (1/N) sum |H_k|^2 equals
/// the tap energy.
///
/// Twiddles are taken from the reduced index min(nk mod N, N - nk mod N), which
/// makes H_{N-k} = conj(H_k) bit-exact for real taps and the even samples of
/// an N-point response identical to the N/2-point response.
inline std::vector<cplx> freq_response(const ChannelTaps& channel, std::size_t n) {
  if (n < channel.length()) {
    throw DomainError("freq_response: N=" + std::to_string(n) + " shorter than L=" +
                      std::to_string(channel.length()));
  }
  const auto taps = channel.taps();
  std::vector<cplx> out(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const std::size_t m = (t * k) % n;
      const bool upper = 2 * m > n;
      const std::size_t reduced = upper ? n - m : m;
      const double angle = two_pi * static_cast<double>(reduced) / static_cast<double>(n);
      // exp(-j angle) for the lower half; exp(+j angle) mirrors the upper half.
      // Half and quarter turns are exact so the Nyquist bin of real taps is real.
      double c = std::cos(angle);
      double s = std::sin(angle);
      if (2 * reduced == n) {
        c = -1.0;
        s = 0.0;
      } else if (4 * reduced == n) {
        c = 0.0;
        s = 1.0;
      }
      const cplx w(c, upper ? s : -s);
      acc += taps[t] * w;
    }
    out[k] = acc;
  }
  return out;
}

/// Frequency samples H_k plus the per-subcarrier SNRs gamma_k = gamma |H_k|^2.
struct SubcarrierProfile {
  std::vector<cplx> H;
  double gamma = 0.0;
  std::vector<double> gamma_k;

  std::size_t size() const { return gamma_k.size(); }
};

inline SubcarrierProfile subcarrier_snrs(std::vector<cplx> H, double gamma) {
  if (std::isnan(gamma) || gamma < 0.0 || std::isinf(gamma)) {
    throw DomainError("subcarrier_snrs: SNR must be finite and >= 0");
  }
  SubcarrierProfile p;
  p.gamma = gamma;
  p.gamma_k.reserve(H.size());
  for (const auto& h : H) p.gamma_k.push_back(gamma * std::norm(h));
  p.H = std::move(H);
  return p;
}

inline SubcarrierProfile make_profile(const ChannelTaps& channel, std::size_t n, double gamma) {
  return subcarrier_snrs(freq_response(channel, n), gamma);
}

/// Profile built directly from per-subcarrier SNRs (no channel behind it).
inline SubcarrierProfile profile_from_snrs(std::vector<double> gamma_k) {
  SubcarrierProfile p;
  double sum = 0.0;
  for (double g : gamma_k) {
    if (std::isnan(g) || g < 0.0 || std::isinf(g)) {
      throw DomainError("profile_from_snrs: SNRs must be finite and >= 0");
    }
    sum += g;
  }
  p.gamma = gamma_k.empty() ? 0.0 : sum / static_cast<double>(gamma_k.size());
  p.gamma_k = std::move(gamma_k);
  return p;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace capcmp
