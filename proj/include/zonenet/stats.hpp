#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace zonenet {

// Linear-interpolation quantile (Hyndman-Fan type 7). Reorders `values`.
inline double quantile_inplace(std::span<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (hi == lo) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(hi), values.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

inline double quantile(std::vector<double> values, double p) { return quantile_inplace(values, p); }

}  // namespace zonenet
