#pragma once

// Dense damped Newton solve of eps^-m (K u - u) + u (a - u) = 0 on a small
// grid. Independent of the library's iteration: the matrix K is assembled
// from node coordinates and the discrete kernel weights only.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlkpp/nonlocal_op.hpp"

namespace oracle {

inline Eigen::MatrixXd assemble(const nlkpp::NonlocalOperator& op) {
  const auto& g = *op.grid();
  const auto& K = op.kernel();
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const auto a = g.index(static_cast<std::size_t>(p));
    for (Eigen::Index q = 0; q < n; ++q) {
      const auto b = g.index(static_cast<std::size_t>(q));
      const int d1 = b[0] - a[0], d2 = b[1] - a[1];
      if (std::abs(d1) > K.half_width || std::abs(d2) > K.half_width) continue;
      M(p, q) = g.dim() == 1 ? K.at(d1) : K.at(d1, d2);
    }
  }
  return M;
}

/// Starts from the constant `top` (a super-solution when top >= sup a+) and
/// returns the solution Newton lands on.
inline std::vector<double> newton_solve(const nlkpp::NonlocalOperator& op, const std::vector<double>& a, double top,
                                        double tol = 1e-15, int max_iters = 200) {
  const Eigen::MatrixXd K = assemble(op);
  const double rate = op.rate();
  const auto n = K.rows();
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, top);
  Eigen::VectorXd av = Eigen::Map<const Eigen::VectorXd>(a.data(), n);
  auto F = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return rate * (K * v - v) + v.cwiseProduct(av - v);
  };
  Eigen::VectorXd f = F(u);
  for (int it = 0; it < max_iters && f.lpNorm<Eigen::Infinity>() > tol; ++it) {
    Eigen::MatrixXd Jac = rate * K;
    Jac.diagonal() += (av - 2.0 * u).array().matrix() - Eigen::VectorXd::Constant(n, rate);
    const Eigen::VectorXd step = Jac.partialPivLu().solve(-f);
    double t = 1.0;
    for (int b = 0; b < 40; ++b, t *= 0.5) {
      const Eigen::VectorXd trial = u + t * step;
      const Eigen::VectorXd ft = F(trial);
      if (ft.lpNorm<Eigen::Infinity>() < (1.0 - 1e-4 * t) * f.lpNorm<Eigen::Infinity>() || b == 39) {
        u = trial;
        f = ft;
        break;
      }
    }
  }
  if (!(f.lpNorm<Eigen::Infinity>() <= 1e-12)) throw std::runtime_error("newton oracle did not converge");
  return {u.data(), u.data() + n};
}

}  // namespace oracle
