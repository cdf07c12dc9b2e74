#pragma once

// Monte-Carlo cyclic-prefix block transmission: OFDM with one-tap
// equalization, and single carrier with a frequency-domain MMSE feedforward
// filter plus genie-aided (error-free) time-domain feedback.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "capcmp/channel.hpp"
#include "capcmp/constellation.hpp"
#include "capcmp/error.hpp"
#include "capcmp/fft.hpp"
#include "capcmp/parallel.hpp"
#include "capcmp/schemes.hpp"
#include "capcmp/toeplitz.hpp"

namespace capcmp {

struct SimConfig {
  ChannelTaps channel;
  std::size_t n = 0;
  double gamma = 0.0;
  int order = 4;
  std::size_t blocks = 1;
  std::uint64_t seed = 0;
  /// Feedback taps; defaults to the channel memory L - 1.
  std::optional<std::size_t> fb_len{};

  std::size_t feedback_length() const { return fb_len.value_or(channel.memory()); }
};

inline void validate(const SimConfig& cfg) {
  if (cfg.n < cfg.channel.length()) {
    throw DomainError("simulation: N must exceed the channel memory");
  }
  if (cfg.blocks < 1) throw DomainError("simulation: need at least one block");
  if (std::isnan(cfg.gamma) || !(cfg.gamma > 0.0) || std::isinf(cfg.gamma)) {
    throw DomainError("simulation: SNR must be finite and > 0");
  }
  Constellation::square_qam(cfg.order);
}

struct DfeDesign {
  /// Feedforward filter, one tap per subcarrier.
  std::vector<cplx> Q;
  /// Feedback taps at lags 1 ... fb_len.
  std::vector<cplx> b;
  double predicted_mmse = 0.0;
  double predicted_unbiased_snr = 0.0;
};

/// MMSE DFE for the circulant channel H (circulant eigenvalues) at SNR gamma.
///
/// With a monic feedback polynomial b' the best feedforward is the
/// per-subcarrier Wiener filter and the residual error is
/// (E_s/N) sum_k S_k |B'_k|^2 with S_k = 1/(1 + gamma_k). Minimizing that over
/// b' is a prediction-error problem on the autocorrelation of S, solved by
/// Levinson-Durbin; the MMSE is E_s times the prediction error power.
inline DfeDesign design_mmse_dfe(std::span<const cplx> H, double gamma, std::size_t fb_len,
                                 double symbol_energy = 1.0) {
  const std::size_t n = H.size();
  if (std::isnan(gamma) || !(gamma > 0.0)) throw DomainError("design_mmse_dfe: SNR must be > 0");
  if (fb_len >= n) throw DomainError("design_mmse_dfe: fb_len must be < N");

  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = 1.0 / (1.0 + gamma * std::norm(H[k]));

  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<cplx> rho(fb_len + 1);
  for (std::size_t m = 0; m <= fb_len; ++m) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = two_pi * static_cast<double>((k * m) % n) / static_cast<double>(n);
      acc += s[k] * cplx(std::cos(angle), std::sin(angle));
    }
    rho[m] = acc / static_cast<double>(n);
  }
  rho[0] = {rho[0].real(), 0.0};

  const auto pef = levinson_durbin(rho);

  DfeDesign d;
  d.b.assign(pef.coefficients.begin() + 1, pef.coefficients.end());
  d.Q.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx monic = 0.0;
    for (std::size_t m = 0; m <= fb_len; ++m) {
      const double angle = two_pi * static_cast<double>((k * m) % n) / static_cast<double>(n);
      monic += pef.coefficients[m] * cplx(std::cos(angle), -std::sin(angle));
    }
    d.Q[k] = monic * std::conj(H[k]) / (std::norm(H[k]) + 1.0 / gamma);
  }
  d.predicted_mmse = symbol_energy * pef.error_power;
  d.predicted_unbiased_snr = symbol_energy / d.predicted_mmse - 1.0;
  return d;
}

/// sum_{m=1}^{b.size()} b_m x_{(n-m) mod N}: the genie feedback term. Lag 0
/// never enters.
inline cplx genie_feedback(std::span<const cplx> symbols, std::span<const cplx> b,
                           std::size_t n) {
  const std::size_t size = symbols.size();
  cplx acc = 0.0;
  for (std::size_t m = 1; m <= b.size(); ++m) {
    acc += b[m - 1] * symbols[(n + size - (m % size)) % size];
  }
  return acc;
}

struct SimResult {
  /// Linear SNR: one value per subcarrier for OFDM, a single value for SC-DFE.
  std::vector<double> measured_snr;
  std::vector<double> predicted_snr;
  std::size_t sample_count = 0;
  /// exp(mean ln(1 + gamma_k)) - 1, reported for SC-DFE runs.
  std::optional<double> geometric_snr;
};

namespace detail {

// Blocks are grouped into fixed-size chunks reduced in chunk order, so the
// result is identical for any thread count.
inline constexpr std::size_t kBlocksPerChunk = 64;

/// Independent engine for one block, derived from (seed, block, stream).
inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                    stream};
  return std::mt19937_64(seq);
}

/// One CP block: draws symbols into `symbols`, passes the (optionally
/// pre-transformed) block through channel and noise, and leaves the N
/// received samples after CP removal in `received`.
class BlockChannel {
 public:
  BlockChannel(const SimConfig& cfg, const Constellation& c)
      : cfg_(cfg),
        levels_(c.levels().begin(), c.levels().end()),
        noise_std_(std::sqrt(c.symbol_energy() / cfg.gamma / 2.0)) {}

  template <class Precode>
  void run(std::mt19937_64& eng, std::vector<cplx>& symbols, std::vector<cplx>& received,
           Precode&& precode) const {
    const std::size_t n = cfg_.n;
    const auto taps = cfg_.channel.taps();
    const std::size_t cp = taps.size() - 1;
    std::uniform_int_distribution<std::size_t> pick(0, levels_.size() - 1);
    std::normal_distribution<double> noise(0.0, noise_std_);

    symbols.resize(n);
    for (auto& x : symbols) x = {levels_[pick(eng)], levels_[pick(eng)]};

    std::vector<cplx> s = symbols;
    precode(s);

    std::vector<cplx> tx(n + cp);
    for (std::size_t i = 0; i < cp; ++i) tx[i] = s[n - cp + i];
    for (std::size_t i = 0; i < n; ++i) tx[cp + i] = s[i];

    received.resize(n);
    for (std::size_t i = 0; i < n + cp; ++i) {
      cplx y = 0.0;
      for (std::size_t t = 0; t < taps.size() && t <= i; ++t) y += taps[t] * tx[i - t];
      const cplx v{noise(eng), noise(eng)};
      if (i >= cp) received[i - cp] = y + v;
    }
  }

 private:
  const SimConfig& cfg_;
  std::vector<double> levels_;
  double noise_std_;
};

}  // namespace detail

/// OFDM: measured per-subcarrier SNR after one-tap equalization against
/// gamma_k = gamma |H_k|^2.
inline SimResult simulate_ofdm(const SimConfig& cfg) {
  validate(cfg);
  const auto c = Constellation::square_qam(cfg.order);
  const std::size_t n = cfg.n;
  const auto H = freq_response(cfg.channel, n);
  const fft::UnitaryDft dft(n);
  const detail::BlockChannel link(cfg, c);

  const std::size_t chunks = (cfg.blocks + detail::kBlocksPerChunk - 1) / detail::kBlocksPerChunk;
  std::vector<std::vector<double>> signal(chunks, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> error(chunks, std::vector<double>(n, 0.0));

  parallel_for(chunks, [&](std::size_t chunk) {
    std::vector<cplx> x;
    std::vector<cplx> r;
    const std::size_t first = chunk * detail::kBlocksPerChunk;
    const std::size_t last = std::min(cfg.blocks, first + detail::kBlocksPerChunk);
    for (std::size_t blk = first; blk < last; ++blk) {
      auto eng = detail::block_engine(cfg.seed, blk, 1);
      link.run(eng, x, r, [&](std::vector<cplx>& s) { dft.inverse(s); });
      dft.forward(r);
      for (std::size_t k = 0; k < n; ++k) {
        signal[chunk][k] += std::norm(x[k]);
        const cplx estimate = H[k] == cplx(0.0) ? cplx(0.0) : r[k] / H[k];
        error[chunk][k] += std::norm(estimate - x[k]);
      }
    }
  });

  SimResult res;
  res.sample_count = n * cfg.blocks;
  res.measured_snr.assign(n, 0.0);
  res.predicted_snr.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double sig = 0.0;
    double err = 0.0;
    for (std::size_t ch = 0; ch < chunks; ++ch) {
      sig += signal[ch][k];
      err += error[ch][k];
    }
    res.measured_snr[k] = H[k] == cplx(0.0) ? 0.0 : sig / err;
    res.predicted_snr[k] = cfg.gamma * std::norm(H[k]);
  }
  return res;
}

/// Single carrier with MMSE-DFE and genie feedback. Reports the measured
/// unbiased SNR E_s/MSE - 1 against the design prediction; geometric_snr
/// carries the closed-form geometric-mean SNR.
inline SimResult simulate_scdfe_genie(const SimConfig& cfg) {
  validate(cfg);
  const auto c = Constellation::square_qam(cfg.order);
  const std::size_t n = cfg.n;
  const auto H = freq_response(cfg.channel, n);
  const auto design = design_mmse_dfe(H, cfg.gamma, cfg.feedback_length(), c.symbol_energy());
  const fft::UnitaryDft dft(n);
  const detail::BlockChannel link(cfg, c);

  const std::size_t chunks = (cfg.blocks + detail::kBlocksPerChunk - 1) / detail::kBlocksPerChunk;
  std::vector<double> error(chunks, 0.0);

  parallel_for(chunks, [&](std::size_t chunk) {
    std::vector<cplx> x;
    std::vector<cplx> r;
    const std::size_t first = chunk * detail::kBlocksPerChunk;
    const std::size_t last = std::min(cfg.blocks, first + detail::kBlocksPerChunk);
    quad::CompensatedSum err;
    for (std::size_t blk = first; blk < last; ++blk) {
      auto eng = detail::block_engine(cfg.seed, blk, 2);
      link.run(eng, x, r, [](std::vector<cplx>&) {});
      dft.forward(r);
      for (std::size_t k = 0; k < n; ++k) r[k] *= design.Q[k];
      dft.inverse(r);
      for (std::size_t i = 0; i < n; ++i) {
        const cplx estimate = r[i] - genie_feedback(x, design.b, i);
        err.add(std::norm(estimate - x[i]));
      }
    }
    error[chunk] = err.value();
  });

  quad::CompensatedSum total;
  for (double e : error) total.add(e);
  const double mse = total.value() / static_cast<double>(n * cfg.blocks);

  SimResult res;
  res.sample_count = n * cfg.blocks;
  res.measured_snr = {c.symbol_energy() / mse - 1.0};
  res.predicted_snr = {design.predicted_unbiased_snr};
  res.geometric_snr = dfe_snr(subcarrier_snrs(H, cfg.gamma));
  return res;
}

}  // namespace capcmp
