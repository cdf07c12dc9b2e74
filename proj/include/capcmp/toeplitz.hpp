#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "capcmp/error.hpp"

namespace capcmp {

struct PredictionErrorFilter {
  /// Monic filter a_0 = 1, a_1 ... a_p.
  std::vector<std::complex<double>> coefficients;
  /// Final prediction error power.
  double error_power = 0.0;
};

/// Levinson-Durbin recursion for the Hermitian Toeplitz system
/// R a = error_power * e_0 with R(i, j) = r(i - j), r(-k) = conj(r(k)).
/// r holds lags 0..p.
inline PredictionErrorFilter levinson_durbin(std::span<const std::complex<double>> r) {
  using cplx = std::complex<double>;
  if (r.empty()) throw DomainError("levinson_durbin: empty autocorrelation");
  const double r0 = r[0].real();
  if (!std::isfinite(r0) || !(r0 > 0.0)) {
    throw NumericalError("levinson_durbin: singular Toeplitz system (r(0) <= 0)");
  }
  const std::size_t order = r.size() - 1;
  std::vector<cplx> a{1.0};
  a.reserve(order + 1);
  double err = r0;
  for (std::size_t j = 0; j < order; ++j) {
    cplx acc = r[j + 1];
    for (std::size_t i = 1; i <= j; ++i) acc += a[i] * r[j + 1 - i];
    const cplx reflection = -acc / err;
    std::vector<cplx> next(j + 2);
    next[0] = 1.0;
    for (std::size_t i = 1; i <= j; ++i) next[i] = a[i] + reflection * std::conj(a[j + 1 - i]);
    next[j + 1] = reflection;
    a = std::move(next);
    err *= 1.0 - std::norm(reflection);
    if (!std::isfinite(err) || !(err > 0.0)) {
      throw NumericalError("levinson_durbin: singular Toeplitz system at order " +
                           std::to_string(j + 1));
    }
  }
  return {std::move(a), err};
}

}  // namespace capcmp
