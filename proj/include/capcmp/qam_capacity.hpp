#pragma once

// Constellation-constrained AWGN capacity of square M-QAM and the concavity
// analysis of tau(x) = C(exp(x) - 1).
//
// All capacities are in bits per complex symbol (two real dimensions).
// Divide by 2 for the per-real-dimension convention.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "capcmp/constellation.hpp"
#include "capcmp/error.hpp"
#include "capcmp/quadrature.hpp"

namespace capcmp {

struct CapacityOptions {
  /// Stop refining once two successive panel levels agree to this many bits.
  double tolerance = 1e-11;
  int max_refinements = 8;
};

namespace detail {

inline constexpr std::size_t kGaussNodes = 12;
// Components further than this (in exponent) below the dominant one are
// dropped from the log-sum-exp.
inline constexpr double kExponentCutoff = 60.0;
// Support half-width beyond the outermost level, in noise standard deviations.
inline constexpr double kTailSigmas = 12.0;

/// Per-node view of the mixture at abscissa r: the dominant-index window
/// [lo, hi] of components retained, their exponents, and the log-sum-exp.
struct MixturePoint {
  double lse = 0.0;  // log sum_j exp(-(r - x_j)^2 / (2 sigma^2))
  int lo = 0;
  int hi = 0;
  double exponent_max = 0.0;
};

inline MixturePoint evaluate_mixture(double r, std::span<const double> levels,
                                     double inv_two_var) {
  const int k = static_cast<int>(levels.size());
  int nearest = static_cast<int>(std::lround((r - levels.front()) / 2.0));
  nearest = std::clamp(nearest, 0, k - 1);
  const auto exponent = [&](int j) {
    const double d = r - levels[j];
    return -d * d * inv_two_var;
  };
  const double emax = exponent(nearest);
  double acc = 1.0;
  int lo = nearest;
  int hi = nearest;
  for (int j = nearest - 1; j >= 0; --j) {
    const double e = exponent(j) - emax;
    if (e < -kExponentCutoff) break;
    acc += std::exp(e);
    lo = j;
  }
  for (int j = nearest + 1; j < k; ++j) {
    const double e = exponent(j) - emax;
    if (e < -kExponentCutoff) break;
    acc += std::exp(e);
    hi = j;
  }
  return {emax + std::log(acc), lo, hi, emax};
}

/// Integrates g(r, point) over r >= 0 against the symmetric mixture, with
/// panels of width sigma / 2^level. When the per-level windows
/// [x_j - 12 sigma, x_j + 12 sigma] are disjoint only those windows are
/// integrated; the density between them is below 1e-30.
template <class G>
double integrate_half_line(std::span<const double> levels, double sigma, int level,
                           G&& g) {
  const auto& rule = quad::GaussLegendre<kGaussNodes>::instance();
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double width = sigma / std::ldexp(1.0, level);
  const double reach = kTailSigmas * sigma;

  quad::CompensatedSum total;
  const auto segment = [&](double a, double b) {
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / width));
    const double w = (b - a) / static_cast<double>(panels);
    const double half = 0.5 * w;
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + (static_cast<double>(p) + 0.5) * w;
      double acc = 0.0;
      for (std::size_t i = 0; i < kGaussNodes; ++i) {
        const double r = mid + half * rule.nodes[i];
        acc += rule.weights[i] * g(r, evaluate_mixture(r, levels, inv_two_var));
      }
      total.add(half * acc);
    }
  };

  if (reach < 1.0) {
    for (double x : levels) {
      if (x > 0.0) segment(x - reach, x + reach);
    }
  } else {
    segment(0.0, levels.back() + reach);
  }
  return total.value();
}

inline double noise_sigma(double gamma, const Constellation& c) {
  return std::sqrt(c.sigma_x2() / gamma);
}

inline void require_positive_snr(double gamma, const char* op) {
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    throw DomainError(std::string(op) + ": SNR must be finite and > 0");
  }
}

/// Capacity in bits per complex symbol at one panel level.
inline double capacity_at_level(double gamma, const Constellation& c, int level) {
  const double sigma = noise_sigma(gamma, c);
  const double norm = 1.0 / (c.levels_per_dim() * std::sqrt(2.0 * std::numbers::pi) * sigma);
  const double half = integrate_half_line(
      c.levels(), sigma, level,
      [norm](double, const MixturePoint& p) { return norm * std::exp(p.lse) * p.lse; });
  // I_pam = ln K - 1/2 - int f(r) lse(r) dr, in nats.
  const double pam_nats = std::log(static_cast<double>(c.levels_per_dim())) - 0.5 - 2.0 * half;
  return 2.0 * pam_nats / std::numbers::ln2;
}

}  // namespace detail

/// Density of the received per-dimension amplitude: an equal-weight mixture
/// of Gaussians with variance sigma_x2 / gamma centred on the PAM levels.
inline double mixture_pdf(double r, double gamma, const Constellation& c) {
  if (!std::isfinite(r)) throw DomainError("mixture_pdf: r must be finite");
  detail::require_positive_snr(gamma, "mixture_pdf");
  const double sigma = detail::noise_sigma(gamma, c);
  const auto p = detail::evaluate_mixture(r, c.levels(), 1.0 / (2.0 * sigma * sigma));
  return std::exp(p.lse) /
         (c.levels_per_dim() * std::sqrt(2.0 * std::numbers::pi) * sigma);
}

/// log2(1 + gamma).
inline double gaussian_capacity(double gamma) {
  if (std::isnan(gamma) || gamma < 0.0) {
    throw DomainError("gaussian_capacity: SNR must be >= 0");
  }
  return std::log1p(gamma) / std::numbers::ln2;
}

/// Mutual information of uniform square M-QAM over AWGN at linear SNR gamma,
/// in bits per complex symbol, by composite Gauss-Legendre quadrature of the
/// mixture's differential entropy. Halves the panel width until two levels
/// agree within opts.tolerance.
inline double awgn_qam_capacity(double gamma, const Constellation& c,
                                const CapacityOptions& opts = {}) {
  if (std::isnan(gamma) || gamma < 0.0 || std::isinf(gamma)) {
    throw DomainError("awgn_qam_capacity: SNR must be finite and >= 0");
  }
  if (gamma == 0.0) return 0.0;

  double previous = detail::capacity_at_level(gamma, c, 0);
  for (int level = 1; level <= opts.max_refinements; ++level) {
    const double current = detail::capacity_at_level(gamma, c, level);
    if (std::abs(current - previous) < opts.tolerance) {
      return std::clamp(current, 0.0, c.max_bits());
    }
    previous = current;
  }
  throw AccuracyError("awgn_qam_capacity: quadrature did not converge to " +
                      std::to_string(opts.tolerance) + " bits at gamma=" +
                      std::to_string(gamma) + ", M=" + std::to_string(c.order()));
}

/// tau(x) = C(exp(x) - 1): capacity as a function of log(1 + SNR).
inline double tau(double x, const Constellation& c, const CapacityOptions& opts = {}) {
  if (std::isnan(x) || x < 0.0) throw DomainError("tau: x must be >= 0");
  return awgn_qam_capacity(std::expm1(x), c, opts);
}

enum class Stencil {
  /// (D(h/2)*4 - D(h))/3 with D the symmetric three-point second difference.
  central_richardson,
  /// (f(x+2h) - 2 f(x+h) + f(x)) / h^2 reported at x: first order, and
  /// displaced by one step. Reproduces coarse-grid plots made that way.
  forward,
};

struct DerivativeOptions {
  double step = 0.02;
  Stencil stencil = Stencil::central_richardson;
  CapacityOptions capacity{};
};

/// Worst-case roundoff of the stencil given function values accurate to eps.
inline double second_difference_roundoff(double eps, double step, Stencil stencil) {
  switch (stencil) {
    case Stencil::central_richardson:
      return 68.0 * eps / (3.0 * step * step);
    case Stencil::forward:
      return 4.0 * eps / (step * step);
  }
  return std::numeric_limits<double>::infinity();
}

/// Second derivative of an arbitrary f by the chosen stencil.
template <class F>
double second_difference(F&& f, double x, double step, Stencil stencil) {
  switch (stencil) {
    case Stencil::central_richardson: {
      const double f0 = f(x);
      const double coarse = (f(x + step) - 2.0 * f0 + f(x - step)) / (step * step);
      const double h = 0.5 * step;
      const double fine = (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
      return (4.0 * fine - coarse) / 3.0;
    }
    case Stencil::forward:
      return (f(x + 2.0 * step) - 2.0 * f(x + step) + f(x)) / (step * step);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Numerical second derivative of tau. Throws ConditioningError when the
/// stencil roundoff implied by the capacity tolerance exceeds 1e-6.
inline double tau_second_derivative(double x, const Constellation& c,
                                    const DerivativeOptions& opts = {}) {
  if (!(opts.step > 0.0)) throw DomainError("tau_second_derivative: step must be > 0");
  if (std::isnan(x) || x - 2.0 * opts.step <= 0.0) {
    throw DomainError("tau_second_derivative: need x - 2*step > 0");
  }
  const double roundoff =
      second_difference_roundoff(opts.capacity.tolerance, opts.step, opts.stencil);
  if (roundoff > 1e-6) {
    throw ConditioningError("tau_second_derivative: step " + std::to_string(opts.step) +
                            " too small for capacity tolerance " +
                            std::to_string(opts.capacity.tolerance));
  }
  return second_difference([&](double t) { return tau(t, c, opts.capacity); }, x,
                           opts.step, opts.stencil);
}

/// Noise floor below which a positive tau'' is not trusted.
inline constexpr double kConvexityResolution = 2e-6;

struct ConvexityInterval {
  double lo = 0.0;
  double hi = 0.0;
  double peak = 0.0;
  double argmax = 0.0;
};

struct ConvexityReport {
  std::vector<ConvexityInterval> intervals;
  /// Positive stretches whose peak stays under kConvexityResolution.
  std::vector<ConvexityInterval> below_resolution;
};

/// Maximal intervals of [x_min, x_max] where tau'' > 0. Boundaries are
/// refined by bisection to 1e-4 and the peak by golden-section search.
inline ConvexityReport convexity_intervals(const Constellation& c, double x_min, double x_max,
                                           double grid_step,
                                           const DerivativeOptions& opts = {}) {
  if (!(x_min > 0.0) || !(x_max > x_min)) {
    throw DomainError("convexity_intervals: need 0 < x_min < x_max");
  }
  if (!(grid_step > 0.0) || grid_step > 0.01) {
    throw DomainError("convexity_intervals: grid_step must be in (0, 0.01]");
  }
  const auto d2 = [&](double x) { return tau_second_derivative(x, c, opts); };

  const auto n = static_cast<std::size_t>(std::floor((x_max - x_min) / grid_step + 1e-9));
  std::vector<double> xs;
  std::vector<double> vs;
  xs.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) xs.push_back(x_min + static_cast<double>(i) * grid_step);
  if (x_max - xs.back() > 1e-9) xs.push_back(x_max);
  vs.reserve(xs.size());
  for (double x : xs) vs.push_back(d2(x));

  const auto crossing = [&](double a, double b) {
    // Invariant: d2(a) and d2(b) have opposite signs.
    const bool a_positive = d2(a) > 0.0;
    while (b - a > 1e-4) {
      const double m = 0.5 * (a + b);
      if ((d2(m) > 0.0) == a_positive) {
        a = m;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  ConvexityReport report;
  std::size_t i = 0;
  while (i < xs.size()) {
    if (!(vs[i] > 0.0)) {
      ++i;
      continue;
    }
    const std::size_t first = i;
    while (i + 1 < xs.size() && vs[i + 1] > 0.0) ++i;
    const std::size_t last = i;
    ++i;

    ConvexityInterval iv;
    iv.lo = first == 0 ? xs.front() : crossing(xs[first - 1], xs[first]);
    iv.hi = last + 1 == xs.size() ? xs.back() : crossing(xs[last], xs[last + 1]);

    std::size_t best = first;
    for (std::size_t j = first; j <= last; ++j) {
      if (vs[j] > vs[best]) best = j;
    }
    double a = best == first ? xs[first] : xs[best - 1];
    double b = best == last ? xs[last] : xs[best + 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = d2(x1);
    double f2 = d2(x2);
    while (b - a > 1e-4) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = d2(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = d2(x2);
      }
    }
    iv.argmax = xs[best];
    iv.peak = vs[best];
    const double refined = std::max(f1, f2);
    if (refined > iv.peak) {
      iv.peak = refined;
      iv.argmax = f1 > f2 ? x1 : x2;
    }

    if (iv.peak < kConvexityResolution) {
      report.below_resolution.push_back(iv);
    } else {
      report.intervals.push_back(iv);
    }
  }
  return report;
}

/// MMSE of estimating a uniform sqrt(M)-PAM symbol in Gaussian noise at SNR
/// gamma, normalized by sigma_x2. Integrates the posterior variance, so the
/// result is never negative.
inline double pam_mmse(double gamma, const Constellation& c) {
  detail::require_positive_snr(gamma, "pam_mmse");
  const double sigma = detail::noise_sigma(gamma, c);
  const double norm =
      1.0 / (c.levels_per_dim() * std::sqrt(2.0 * std::numbers::pi) * sigma);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const auto levels = c.levels();

  const auto integrand = [&](double r, const detail::MixturePoint& p) {
    double w_sum = 0.0;
    double mean = 0.0;
    for (int j = p.lo; j <= p.hi; ++j) {
      const double d = r - levels[j];
      const double w = std::exp(-d * d * inv_two_var - p.exponent_max);
      w_sum += w;
      mean += w * levels[j];
    }
    mean /= w_sum;
    double var = 0.0;
    for (int j = p.lo; j <= p.hi; ++j) {
      const double d = r - levels[j];
      const double w = std::exp(-d * d * inv_two_var - p.exponent_max);
      const double e = levels[j] - mean;
      var += w * e * e;
    }
    var /= w_sum;
    return norm * std::exp(p.lse) * var;
  };

  CapacityOptions opts;
  double previous = 2.0 * detail::integrate_half_line(levels, sigma, 0, integrand);
  for (int level = 1; level <= opts.max_refinements; ++level) {
    const double current = 2.0 * detail::integrate_half_line(levels, sigma, level, integrand);
    if (std::abs(current - previous) < 1e-12 * c.sigma_x2()) {
      return std::clamp(current / c.sigma_x2(), 0.0, 1.0);
    }
    previous = current;
  }
  throw AccuracyError("pam_mmse: quadrature did not converge");
}

}  // namespace capcmp
