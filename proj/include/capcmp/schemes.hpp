#pragma once

// OFDM and ideal SC-DFE capacities over a subcarrier profile. Capacities are
// bits per complex symbol (twice the per-real-dimension values).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "capcmp/channel.hpp"
#include "capcmp/parallel.hpp"
#include "capcmp/qam_capacity.hpp"
#include "capcmp/quadrature.hpp"

namespace capcmp {

namespace detail {

// Sorting first makes the mean independent of subcarrier order, bit for bit.
inline double order_free_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  // Equal values (a flat channel) give their common value exactly.
  if (values.front() == values.back()) return values.front();
  quad::CompensatedSum sum;
  for (double v : values) sum.add(v);
  return sum.value() / static_cast<double>(values.size());
}

inline double mean_log1p(const SubcarrierProfile& profile) {
  std::vector<double> logs;
  logs.reserve(profile.size());
  for (double g : profile.gamma_k) logs.push_back(std::log1p(g));
  return order_free_mean(std::move(logs));
}

}  // namespace detail

/// (1/N) sum_k log2(1 + gamma_k).
inline double ofdm_capacity_gaussian(const SubcarrierProfile& profile) {
  return detail::mean_log1p(profile) / std::numbers::ln2;
}

/// exp((1/N) sum_k ln(1 + gamma_k)) - 1: the unbiased MMSE-DFE output SNR.
inline double dfe_snr(const SubcarrierProfile& profile) {
  // Equal SNRs (flat channel): return the common value instead of a rounded round trip.
  const auto [lo, hi] = std::minmax_element(profile.gamma_k.begin(), profile.gamma_k.end());
  if (lo != profile.gamma_k.end() && *lo == *hi) return *lo;
  return std::expm1(detail::mean_log1p(profile));
}

inline double dfe_capacity_gaussian(const SubcarrierProfile& profile) {
  return std::log1p(dfe_snr(profile)) / std::numbers::ln2;
}

/// Mean of the M-QAM capacities of the subcarriers. Equal SNRs are
/// evaluated once.
inline double ofdm_capacity_qam(const SubcarrierProfile& profile, const Constellation& c,
                                const CapacityOptions& opts = {}) {
  std::vector<double> snrs = profile.gamma_k;
  std::sort(snrs.begin(), snrs.end());
  std::vector<double> caps;
  caps.reserve(snrs.size());
  for (std::size_t i = 0; i < snrs.size(); ++i) {
    if (i > 0 && snrs[i] == snrs[i - 1]) {
      caps.push_back(caps.back());
    } else {
      caps.push_back(awgn_qam_capacity(snrs[i], c, opts));
    }
  }
  return detail::order_free_mean(std::move(caps));
}

/// M-QAM capacity at the DFE output SNR, residual ISI treated as Gaussian.
inline double dfe_capacity_qam(const SubcarrierProfile& profile, const Constellation& c,
                               const CapacityOptions& opts = {}) {
  return awgn_qam_capacity(dfe_snr(profile), c, opts);
}

struct SubcarrierCapacity {
  std::size_t k = 0;
  double gamma_k = 0.0;
  double capacity = 0.0;
};

inline std::vector<SubcarrierCapacity> per_subcarrier_capacities(
    const SubcarrierProfile& profile, const Constellation& c, const CapacityOptions& opts = {}) {
  std::vector<SubcarrierCapacity> out;
  out.reserve(profile.size());
  for (std::size_t k = 0; k < profile.size(); ++k) {
    out.push_back({k, profile.gamma_k[k], awgn_qam_capacity(profile.gamma_k[k], c, opts)});
  }
  return out;
}

/// Input alphabet of a sweep: a square QAM or the Gaussian (unconstrained) input.
struct Modulation {
  std::optional<Constellation> qam;

  static Modulation gaussian() { return {}; }
  static Modulation square_qam(int order) { return {Constellation::square_qam(order)}; }

  bool is_gaussian() const { return !qam.has_value(); }
  std::string label() const { return qam ? std::to_string(qam->order()) : "gaussian"; }
};

inline double ofdm_capacity(const SubcarrierProfile& p, const Modulation& m) {
  return m.qam ? ofdm_capacity_qam(p, *m.qam) : ofdm_capacity_gaussian(p);
}

inline double dfe_capacity(const SubcarrierProfile& p, const Modulation& m) {
  return m.qam ? dfe_capacity_qam(p, *m.qam) : dfe_capacity_gaussian(p);
}

struct CurvePoint {
  double snr_db = 0.0;
  double c_ofdm = 0.0;
  double c_dfe = 0.0;
  /// c_dfe / c_ofdm; empty where c_ofdm == 0.
  std::optional<double> ratio;
};

struct CapacityCurve {
  std::string channel_id;
  std::string modulation;  // order as text, or "gaussian"
  std::size_t n = 0;
  std::vector<CurvePoint> points;

  std::optional<double> min_ratio() const {
    std::optional<double> best;
    for (const auto& p : points) {
      if (p.ratio && (!best || *p.ratio < *best)) best = p.ratio;
    }
    return best;
  }
  std::optional<double> max_ratio() const {
    std::optional<double> best;
    for (const auto& p : points) {
      if (p.ratio && (!best || *p.ratio > *best)) best = p.ratio;
    }
    return best;
  }
};

/// Both capacities and their ratio at each SNR (dB) of an increasing grid.
/// Points are computed in parallel and assembled in grid order.
inline CapacityCurve capacity_ratio_sweep(const ChannelTaps& channel, std::string channel_id,
                                          std::size_t n, const Modulation& modulation,
                                          const std::vector<double>& snr_db_grid) {
  for (std::size_t i = 1; i < snr_db_grid.size(); ++i) {
    if (!(snr_db_grid[i] > snr_db_grid[i - 1])) {
      throw DomainError("capacity_ratio_sweep: SNR grid must be strictly increasing");
    }
  }
  const auto H = freq_response(channel, n);
  CapacityCurve curve{std::move(channel_id), modulation.label(), n, {}};
  curve.points.resize(snr_db_grid.size());
  parallel_for(snr_db_grid.size(), [&](std::size_t i) {
    const auto profile = subcarrier_snrs(H, db_to_linear(snr_db_grid[i]));
    CurvePoint& pt = curve.points[i];
    pt.snr_db = snr_db_grid[i];
    pt.c_ofdm = ofdm_capacity(profile, modulation);
    pt.c_dfe = dfe_capacity(profile, modulation);
    if (pt.c_ofdm > 0.0) pt.ratio = pt.c_dfe / pt.c_ofdm;
  });
  return curve;
}

}  // namespace capcmp
