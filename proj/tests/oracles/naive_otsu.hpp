#pragma once

// Exhaustive Otsu reference: for every candidate edge, recompute class
// weights and means directly from the per-pixel bin indices.

#include "nada/types.hpp"

#include <cmath>
#include <vector>

namespace oracle {

inline double naive_otsu(const nada::GridD& map, int bins = 256) {
  std::vector<int> bin(static_cast<std::size_t>(map.size()));
  for (nada::Index i = 0; i < map.size(); ++i) {
    long double b = std::floor(static_cast<long double>(map.data()[i]) * bins);
    if (b < 0) b = 0;
    if (b > bins - 1) b = bins - 1;
    bin[static_cast<std::size_t>(i)] = static_cast<int>(b);
  }
  const long double n = static_cast<long double>(bin.size());
  std::vector<long double> scores(static_cast<std::size_t>(bins), -1.0L);
  long double best = -1.0L;
  for (int k = 1; k < bins; ++k) {
    long double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int b : bin) {
      if (b < k) {
        n0 += 1;
        s0 += b;
      } else {
        n1 += 1;
        s1 += b;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const long double w0 = n0 / n;
    const long double w1 = n1 / n;
    const long double mu0 = s0 / n0;
    const long double mu1 = s1 / n1;
    scores[static_cast<std::size_t>(k)] = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (scores[static_cast<std::size_t>(k)] > best) best = scores[static_cast<std::size_t>(k)];
  }
  if (best < 0) return map.maxCoeff();
  // lowest edge among the maximizers; relative slack absorbs rounding only
  for (int k = 1; k < bins; ++k) {
    if (scores[static_cast<std::size_t>(k)] >= best * (1.0L - 1e-15L)) {
      return static_cast<double>(k) / bins;
    }
  }
  return map.maxCoeff();
}

}  // namespace oracle
