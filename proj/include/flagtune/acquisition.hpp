#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flagtune/forest.hpp"

namespace flagtune {

// Below this spread EI switches to its sigma -> 0 limit.
inline constexpr double kSigmaFloor = 1e-12;

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

// Phi(z) = erfc(-z / sqrt 2) / 2. erfc keeps full relative precision in the
// lower tail, well inside the 1e-7 absolute bound required on [-8, 8].
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// Expected improvement of a minimization candidate over the incumbent f_best:
//   EI = (f_best - mu) Phi(Z) + sigma phi(Z),  Z = (f_best - mu) / sigma
inline double expected_improvement(double mean, double sigma, double f_best) {
  const double gap = f_best - mean;
  if (!(sigma > kSigmaFloor)) return std::max(gap, 0.0);
  const double z = gap / sigma;
  return std::max(gap * normal_cdf(z) + sigma * normal_pdf(z), 0.0);
}

inline double expected_improvement(const Prediction& pred, double f_best) {
  return expected_improvement(pred.mean, pred.sigma(), f_best);
}

}  // namespace flagtune
