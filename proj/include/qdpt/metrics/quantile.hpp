#pragma once

#include "qdpt/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qdpt {

/// Quantile with linear interpolation between order statistics
/// (position q·(n−1) in the sorted sample).
inline double sample_quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InsufficientDataError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

}  // namespace qdpt
