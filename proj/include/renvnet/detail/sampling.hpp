#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "renvnet/chain_core.hpp"

namespace renvnet::detail {

/// Row-major cumulative sums of a stochastic matrix.
inline std::vector<double> cumulative_rows(const RoutingMatrix& r) {
  const auto n = static_cast<std::size_t>(r.dim());
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = (acc += r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  return out;
}

inline std::size_t sample_row(std::span<const double> cumulative, double u) {
  const std::size_t n = cumulative.size();
  for (std::size_t j = 0; j < n; ++j)
    if (u < cumulative[j]) return j;
  // u landed in the rounding gap above the last cumulative value
  for (std::size_t j = n - 1; j > 0; --j)
    if (cumulative[j] > cumulative[j - 1]) return j;
  return 0;
}

}  // namespace renvnet::detail
