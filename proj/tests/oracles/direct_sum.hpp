#pragma once

// Brute-force sums over node pairs, written from the definitions with no use
// of the library's apply paths.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "nlkpp/nonlocal_op.hpp"

namespace oracle {

inline double tap(const nlkpp::DiscreteKernel& K, int dim, int d1, int d2) {
  if (std::abs(d1) > K.half_width || std::abs(d2) > K.half_width) return 0.0;
  return dim == 1 ? K.at(d1) : K.at(d1, d2);
}

// Raw-weight form: sum over x != y of rho(x - y) (u(x) - u(y))^2 / |x - y|^m with
// rho(z) = eps^-m |z|^m w(z), taken straight from the definition.
inline double raw_bbm(const nlkpp::NonlocalOperator& op, const nlkpp::Field& u) {
  const auto& g = *op.grid();
  const auto& K = op.kernel();
  const double m = op.m();
  double s = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t y = 0; y < g.size(); ++y) {
      if (x == y) continue;
      const auto ix = g.index(x), iy = g.index(y);
      const int d1 = iy[0] - ix[0], d2 = iy[1] - ix[1];
      const double w = tap(K, g.dim(), d1, d2);
      if (w == 0.0) continue;
      const double dist = g.spacing() * std::hypot(d1, d2);
      const double rho = std::pow(op.epsilon(), -m) * std::pow(dist, m) * w;
      const double diff = u[x] - u[y];
      s += rho * diff * diff / std::pow(dist, m);
    }
  }
  return s * g.cell_volume();
}

// eps^-m (sum_y w(x - y) u(y) - u(x)) + u(x)(a(x) - u(x)) with y restricted to
// the grid's ball, one node at a time.
inline std::vector<double> truncated_residual(const nlkpp::Grid& g, const nlkpp::DiscreteKernel& K, double m,
                                              const std::vector<double>& u, const std::vector<double>& a) {
  const double rate = std::pow(K.epsilon, -m);
  const int W = K.half_width;
  std::vector<double> r(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto [i, j] = g.index(p);
    double conv = 0.0;
    for (int d1 = -W; d1 <= W; ++d1) {
      for (int d2 = (g.dim() == 1 ? 0 : -W); d2 <= (g.dim() == 1 ? 0 : W); ++d2) {
        const long q = g.find(i + d1, j + d2);
        if (q >= 0) conv += tap(K, g.dim(), d1, d2) * u[static_cast<std::size_t>(q)];
      }
    }
    r[p] = rate * (conv - u[p]) + u[p] * (a[p] - u[p]);
  }
  return r;
}

}  // namespace oracle
