#pragma once

#include <random>

#include "oracles.hpp"
#include "rubricnet/analysis.hpp"

namespace testing_support {

// Largest |fast - brute force| over `count` datasets drawn from small integer
// ranges so that ties in x, in y, and in both are common.
inline double max_tau_deviation(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int d = 0; d < count; ++d) {
    const std::size_t n = 2 + rng() % 300;
    const int xr = 1 + int(rng() % 12);
    const int yr = 1 + int(rng() % 9);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = double(rng() % std::uint64_t(xr)) * 0.5;
      y[i] = double(rng() % std::uint64_t(yr));
    }
    worst = std::max(worst, std::abs(rubricnet::kendall_tau_c(x, y) - oracle::tau_c(x, y)));
  }
  return worst;
}

}  // namespace testing_support
