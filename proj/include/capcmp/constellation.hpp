#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "capcmp/error.hpp"

namespace capcmp {

inline constexpr std::array<int, 6> kSupportedOrders{4, 16, 64, 256, 1024, 4096};

inline std::string supported_orders_text() {
  std::string out;
  for (int m : kSupportedOrders) {
    if (!out.empty()) out += ", ";
    out += std::to_string(m);
  }
  return out;
}

/// Square M-QAM seen as two independent sqrt(M)-PAM dimensions with
/// odd-integer levels -(sqrt(M)-1), ..., -1, +1, ..., +(sqrt(M)-1).
///
/// sigma_x2() is the per-dimension mean of the squared levels, (M-1)/3;
/// the complex symbol energy is twice that.
class Constellation {
 public:
  static Constellation square_qam(int order) {
    bool ok = false;
    for (int m : kSupportedOrders) ok = ok || (m == order);
    if (!ok) {
      throw DomainError("unsupported QAM order " + std::to_string(order) +
                        " (supported: " + supported_orders_text() + ")");
    }
    return Constellation(order);
  }

  int order() const { return order_; }
  int levels_per_dim() const { return static_cast<int>(levels_.size()); }
  std::span<const double> levels() const { return levels_; }
  double sigma_x2() const { return (order_ - 1) / 3.0; }
  double symbol_energy() const { return 2.0 * sigma_x2(); }
  double max_bits() const { return std::log2(static_cast<double>(order_)); }

  friend bool operator==(const Constellation& a, const Constellation& b) {
    return a.order_ == b.order_;
  }

 private:
  explicit Constellation(int order) : order_(order) {
    const int k = static_cast<int>(std::lround(std::sqrt(order)));
    levels_.reserve(k);
    for (int i = 0; i < k; ++i) levels_.push_back(static_cast<double>(2 * i - (k - 1)));
  }

  int order_;
  std::vector<double> levels_;
};

}  // namespace capcmp
