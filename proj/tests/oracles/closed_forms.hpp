#pragma once

// Independent closed forms used as test oracles.

#include <cmath>
#include <numbers>

namespace oracle {

inline double sphere_area(int N) { return N == 1 ? 2.0 : 2.0 * std::numbers::pi; }

// J(x) = c (1 + |x|)^-(N + alpha): c = 1 / (sigma_N B(N, alpha))
inline double power_tail_constant(int N, double alpha) { return 1.0 / (sphere_area(N) * std::beta(N, alpha)); }

// M_beta = B(beta + N, alpha - beta) / B(N, alpha) for beta < alpha
inline double power_tail_moment(int N, double alpha, double beta) {
  return std::beta(beta + N, alpha - beta) / std::beta(N, alpha);
}

// 1D tail mass of the power tail: (1 + r)^-alpha
inline double power_tail_tail_1d(double alpha, double r) { return std::pow(1.0 + r, -alpha); }

// two-sided normal tail beyond r standard deviations
inline double normal_two_sided_tail(double r) { return std::erfc(r / std::numbers::sqrt2); }

}  // namespace oracle
