#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rmstpo {

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Two-sided normal tail probability of an estimate/se ratio. A zero
// estimate with zero se is treated as no evidence (p = 1).
inline double wald_p_value(double estimate, double se) {
  if (se <= 0.0) return estimate == 0.0 ? 1.0 : 0.0;
  return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator).
inline double sd(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace rmstpo
