#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "capcmp/error.hpp"

namespace capcmp {

/// Parses "a:step:b" into a, a+step, ..., inclusive of b when (b-a)/step is
/// an integer within 1e-9. A single number is a one-point grid.
inline std::vector<double> parse_grid(const std::string& spec) {
  const auto fail = [&] { return DomainError("invalid grid '" + spec + "' (expected a:step:b)"); };
  const auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != s.size() || !std::isfinite(v)) throw fail();
    return v;
  };

  const auto first = spec.find(':');
  if (first == std::string::npos) return {number(spec)};
  const auto second = spec.find(':', first + 1);
  if (second == std::string::npos || spec.find(':', second + 1) != std::string::npos) throw fail();

  const double a = number(spec.substr(0, first));
  const double step = number(spec.substr(first + 1, second - first - 1));
  const double b = number(spec.substr(second + 1));
  if (!(step > 0.0)) throw DomainError("grid step must be > 0 in '" + spec + "'");
  if (b < a) throw DomainError("grid end precedes start in '" + spec + "'");

  const double span = (b - a) / step;
  auto count = static_cast<std::size_t>(std::floor(span + 1e-9));
  std::vector<double> out;
  out.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
  if (std::abs(span - std::round(span)) <= 1e-9) out.back() = b;
  return out;
}

}  // namespace capcmp
