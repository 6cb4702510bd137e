#include "nlkpp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace nlkpp::quad {

namespace {

// the rule grows its abscissa tables lazily, so each thread owns one
boost::math::quadrature::tanh_sinh<double>& rule() {
  thread_local boost::math::quadrature::tanh_sinh<double> r(15);
  return r;
}

}  // namespace

double integrate(const Integrand& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  // abscissae may round onto a singular endpoint
  auto g = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0.0;
  double l1 = 0.0;
  return rule().integrate(g, a, b, rel_tol, &err, &l1);
}

namespace {

std::vector<double> pieces(double a, double b, std::span<const double> breakpoints) {
  std::vector<double> cuts{a, b};
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace

double integrate(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                 double rel_tol) {
  if (!(b > a)) return 0.0;
  const auto cuts = pieces(a, b, breakpoints);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1], rel_tol);
  return total;
}

double integrate_smooth(const Integrand& f, double a, double b, std::span<const double> breakpoints, int splits) {
  if (!(b > a)) return 0.0;
  if (splits < 1) throw std::invalid_argument("integrate_smooth needs at least one split");
  const auto cuts = pieces(a, b, breakpoints);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double w = (cuts[i + 1] - cuts[i]) / splits;
    for (int k = 0; k < splits; ++k) {
      const double lo = cuts[i] + k * w;
      const double hi = k + 1 == splits ? cuts[i + 1] : lo + w;
      total += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
    }
  }
  return total;
}

double integrate_to_infinity(const Integrand& f, double a, double rel_tol) {
  if (!(a > 0.0)) throw std::invalid_argument("integrate_to_infinity needs a > 0");
  auto g = [&](double u) { return f(1.0 / u) / (u * u); };
  return integrate(g, 0.0, 1.0 / a, rel_tol);
}

}  // namespace nlkpp::quad
