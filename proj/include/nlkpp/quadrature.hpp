#pragma once

#include <functional>
#include <span>

namespace nlkpp::quad {

using Integrand = std::function<double(double)>;

/// Adaptive double-exponential quadrature on [a, b]. Integrable endpoint
/// singularities are fine; interior kinks must be passed as breakpoints.
double integrate(const Integrand& f, double a, double b, double rel_tol = 1e-12);

/// Same, splitting [a, b] at every breakpoint strictly inside the interval.
double integrate(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                 double rel_tol = 1e-12);

/// Fixed 20-point Gauss-Legendre on `splits` equal parts of each piece between
/// breakpoints. Bounded cost for nested integrals of piecewise-smooth functions.
double integrate_smooth(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                        int splits = 4);

/// Integral over [a, +inf), a > 0, through the inversion r = 1/u so that
/// algebraic tails become (possibly singular) integrands on (0, 1/a].
double integrate_to_infinity(const Integrand& f, double a, double rel_tol = 1e-12);

}  // namespace nlkpp::quad
