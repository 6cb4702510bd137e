#include "nlkpp/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "nlkpp/io.hpp"
#include "nlkpp/quadrature.hpp"

namespace nlkpp {

double psi(double r) {
  const double t = 1.0 - r;
  return t > 0.0 ? t * t * t : 0.0;
}

double laplacian_Psi(double r, int N) {
  if (!(r > 0.0)) throw std::invalid_argument("laplacian_Psi is singular at the origin");
  if (r > 1.0) return 0.0;
  const double t = 1.0 - r;
  return 3.0 * t * (2.0 - (N - 1) * t / r);
}

double kappa(int N) { return std::max(0.5, (N - 1.0) / (N + 1.0)); }

double PhiProfile::operator()(double r) const {
  if (r >= 1.0) return 0.0;
  return C * std::min(psi(r), psi(kappa));
}

double PhiProfile::mass() const {
  const double area = dim == 1 ? 2.0 : 2.0 * std::numbers::pi;
  auto g = [this](double r) { return (*this)(r) * (dim == 1 ? 1.0 : r); };
  const double cuts[] = {kappa};
  return area * quad::integrate(g, 0.0, 1.0, cuts, 1e-14);
}

PhiProfile build_phi(int N) {
  if (N != 1 && N != 2) throw std::invalid_argument("phi is built for N in {1, 2}");
  PhiProfile p;
  p.dim = N;
  p.kappa = kappa(N);
  p.C = 1.0;
  p.C = 1.0 / p.mass();
  return p;
}

// ---------------------------------------------------------------- sub-solution

struct SubSolution::Spline {
  boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>> s;
  double r_max;
};

namespace {

// Fourth-order central differences; the profile is even in r and vanishes
// beyond the last entry. A local Hermite interpolant keeps the relative
// accuracy of the table near the support edge, where the values are tiny and
// the residual at small eps multiplies them by eps^-m.
std::vector<double> slopes(const std::vector<double>& y, double dr) {
  const long n = static_cast<long>(y.size());
  auto at = [&](long i) { return i < 0 ? y[static_cast<std::size_t>(-i)] : i < n ? y[static_cast<std::size_t>(i)] : 0.0; };
  std::vector<double> d(y.size());
  for (long i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * dr);
  d.front() = 0.0;
  return d;
}

}  // namespace

SubSolution::SubSolution(SubSolutionSpec spec, std::vector<double> table, double dr) : spec_(spec) {
  const double r_max = dr * static_cast<double>(table.size() - 1);
  std::vector<double> d = slopes(table, dr);
  spline_ = std::make_shared<Spline>(Spline{
      boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>(std::move(table), std::move(d), 0.0, dr),
      r_max});
}

namespace {

// plateau H on [0, R/2], quintic smootherstep down to 0 at R (C^2)
double cap(double r, double R, double H) {
  if (r <= 0.5 * R) return H;
  if (r >= R) return 0.0;
  const double t = (r - 0.5 * R) / (0.5 * R);
  const double step = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  return H * (1.0 - step);
}

}  // namespace

double SubSolution::eta(double r) const { return cap(r, spec_.R_loc, spec_.plateau); }

double SubSolution::radial(double r) const {
  if (r >= spline_->r_max) return 0.0;
  return std::max(0.0, spline_->s(r));
}

double SubSolution::operator()(const Point& x) const {
  return radial(std::hypot(x[0] - spec_.z[0], x[1] - spec_.z[1]));
}

Field SubSolution::sample(const GridPtr& g) const {
  if (g->dim() != spec_.dim) throw std::invalid_argument("sub-solution and grid dimensions differ");
  if (g->spacing() > spec_.R_loc / 16.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("grid too coarse for the sub-solution: need at least 8 cells across R_loc/2");
  }
  Field f(g);
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < g->size(); ++n) f[n] = (*this)(g->point(n));
  return f;
}

double local_radius(const Resource& a, const Point& z, double theta) {
  const double az = a.plus(z);
  if (!(az > 0.0)) throw std::invalid_argument("center z is not in the support of a+");
  const double level = (1.0 - 0.25 * theta) * az;
  const int dim = a.dim();
  auto ok = [&](double R) {
    const double rho = 2.0 * R;
    const int nr = 64;
    const int nt = dim == 1 ? 2 : 128;
    for (int i = 1; i <= nr; ++i) {
      const double r = rho * i / nr;
      for (int k = 0; k < nt; ++k) {
        Point x = z;
        if (dim == 1) {
          x[0] += (k == 0 ? r : -r);
        } else {
          const double t = 2.0 * std::numbers::pi * k / nt;
          x[0] += r * std::cos(t);
          x[1] += r * std::sin(t);
        }
        if (a.plus(x) < level) return false;
      }
    }
    return true;
  };
  double lo = 0.0;
  double hi = std::max(a.R_ell(), 1.0);
  while (ok(hi)) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  if (!(lo > 0.0)) throw std::runtime_error("no positive local radius around z");
  return lo;
}

SubSolution build_subsolution(const Resource& a, const Point& z, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
  SubSolutionSpec spec;
  spec.z = z;
  spec.theta = theta;
  spec.dim = a.dim();
  spec.a_plus_z = a.plus(z);
  spec.R_loc = local_radius(a, z, theta);
  const PhiProfile phi = build_phi(spec.dim);
  spec.kappa = phi.kappa;
  spec.C_kappa = phi.C;
  spec.plateau = (1.0 - 0.75 * theta) * spec.a_plus_z;

  const double R = spec.R_loc;
  const double half = 0.5 * R;
  const std::size_t n = 4097;
  const double dr = 1.5 * R / static_cast<double>(n - 1);
  std::vector<double> table(n, 0.0);
  const double H = spec.plateau;
  auto eta = [R, H](double r) { return cap(r, R, H); };
  auto mollifier = [&](double r) { return std::pow(2.0 / R, spec.dim) * phi(r / half); };

#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) {
    const double r = dr * static_cast<double>(i);
    double v = 0.0;
    if (spec.dim == 1) {
      auto f = [&](double y) { return eta(std::fabs(r - y)) * mollifier(std::fabs(y)); };
      const double cuts[] = {0.0,  phi.kappa * half, -phi.kappa * half, r - half, r + half, r - R, r + R};
      v = quad::integrate_smooth(f, -half, half, cuts);
    } else {
      auto ring = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        if (r == 0.0) return 2.0 * std::numbers::pi * eta(rho);
        std::vector<double> tc;
        for (double d : {half, R}) {
          const double c = (r * r + rho * rho - d * d) / (2.0 * r * rho);
          if (c > -1.0 && c < 1.0) tc.push_back(std::acos(c));
        }
        auto g = [&](double t) { return eta(std::sqrt(std::max(0.0, r * r + rho * rho - 2.0 * r * rho * std::cos(t)))); };
        return 2.0 * quad::integrate_smooth(g, 0.0, std::numbers::pi, tc, 2);
      };
      auto f = [&](double rho) { return rho * mollifier(rho) * ring(rho); };
      std::vector<double> cuts{phi.kappa * half};
      for (double d : {half, R}) {
        cuts.push_back(std::fabs(r - d));
        cuts.push_back(d - r);
        cuts.push_back(r + d);
      }
      v = quad::integrate_smooth(f, 0.0, half, cuts);
    }
    table[i] = v;
  }
  table.back() = 0.0;
  return SubSolution(spec, std::move(table), dr);
}

SubValidation validate_subsolution(const SubSolution& sub, const Resource& a, const KernelProfile& J, double m,
                                   std::vector<double> eps_list, const ValidationOptions& opt) {
  if (!opt.allow_infinite_moment && m > 0.0 && !std::isfinite(moment(J, m))) {
    throw std::invalid_argument("sub-solution validation needs a finite m-th kernel moment");
  }
  if (J.dim() != a.dim() || J.dim() != sub.spec().dim) throw std::invalid_argument("dimension mismatch");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
  SubValidation out;
  out.tol = opt.tol_scale * a.sup_a_plus();
  const auto& sp = sub.spec();
  const double zr = std::hypot(sp.z[0], sp.z[1]);
  for (double eps : eps_list) {
    SubValidationEntry e;
    e.eps = eps;
    e.h = lattice_spacing(J, eps, opt.spacing_factor, sp.R_loc / 16.0);
    const double Rg = round_up_to_spacing(zr + sub.support_radius() + e.h, e.h);
    auto grid = Grid::make(J.dim(), Rg, e.h);
    e.nodes = grid->size();
    std::optional<double> cutoff;
    if (!J.compact()) cutoff = std::max(5.0 * eps, 2.0 * sub.support_radius() + 2.0 * e.h);
    NonlocalOperator op(discretize(J, eps, e.h, cutoff), grid, m, opt.mode);
    const Field u = sub.sample(grid);
    const Field av = sample(a, grid);
    const Field r = kpp_residual(op, u, av);
    e.min_residual = *std::min_element(r.values().begin(), r.values().end());
    e.predicted_slack = sp.theta / 8.0 * sp.a_plus_z * sub.radial(0.0);
    e.passed = e.min_residual >= -out.tol;
    out.entries.push_back(e);
  }
  for (auto it = out.entries.rbegin(); it != out.entries.rend(); ++it) {
    if (!it->passed) break;
    out.threshold = it->eps;
  }
  return out;
}

// -------------------------------------------------------------- super-solution

double SuperSolution::radial(double r) const {
  const auto& s = spec_;
  const double R = std::max(s.R_sup, r);
  return s.sup_a_plus * (1.0 + s.tau * std::pow(s.R_sup, s.beta)) / (1.0 + s.tau * std::pow(R, s.beta));
}

Field SuperSolution::sample(const GridPtr& g) const {
  Field f(g);
  for (std::size_t n = 0; n < g->size(); ++n) f[n] = radial(g->norm(n));
  return f;
}

double default_beta(const KernelProfile& J) {
  const double b = J.dim() + 1.0;
  if (std::isfinite(J.divergence_order())) {
    const double alt = J.divergence_order() - 0.5;
    return alt > 0.0 ? std::min(b, alt) : 0.5 * J.divergence_order();
  }
  return b;
}

SuperSolution build_supersolution(const Resource& a, const KernelProfile& J, const DiscreteKernel& kernel, double m,
                                  double beta, double R_ext, const SuperSearchOptions& opt) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!std::isfinite(moment(J, beta))) throw std::invalid_argument("the beta-th kernel moment is infinite");
  if (kernel.dim != a.dim()) throw std::invalid_argument("dimension mismatch");
  const int dim = kernel.dim;
  const double h = kernel.spacing;
  const int Mext = static_cast<int>(std::floor(R_ext / h + 1e-9));
  const long twoRh = static_cast<long>(std::llround(2.0 * R_ext / h));
  auto in_ball = [&](long i, long j) { return 4 * (i * i + j * j) <= twoRh * twoRh; };

  struct Tap {
    int di, dj;
    double w;
  };
  std::vector<Tap> taps;
  const int K = kernel.half_width;
  for (int p = -K; p <= K; ++p) {
    for (int q = (dim == 1 ? 0 : -K); q <= (dim == 1 ? 0 : K); ++q) {
      const double w = dim == 1 ? kernel.at(p) : kernel.at(p, q);
      if (w != 0.0) taps.push_back({p, q, w});
    }
  }
  const double reach = (K + 1) * h * (dim == 1 ? 1.0 : std::numbers::sqrt2);
  const double rate = std::pow(kernel.epsilon, -m);

  SuperSolutionSpec spec;
  spec.beta = beta;
  spec.ell = a.ell();
  spec.sup_a_plus = a.sup_a_plus();
  spec.epsilon = kernel.epsilon;
  spec.m = m;
  spec.R_ext = R_ext;
  const double tol = opt.tol_scale * a.sup_a_plus();
  const std::size_t max_points = std::max<std::size_t>(1000, opt.eval_budget / std::max<std::size_t>(1, taps.size()));

  for (int i = 0; i <= opt.max_radius_doublings; ++i) {
    const double R = a.R_ell() * std::ldexp(1.0, i);
    // evaluation set: strided lattice plus every node near the plateau edge (1D)
    std::vector<std::array<int, 2>> pts;
    if (dim == 1) {
      const long total = 2L * Mext + 1;
      const long stride = std::max<long>(1, total / static_cast<long>(max_points) + 1);
      for (long p = -Mext; p <= Mext; ++p) {
        const double x = std::fabs(p * h);
        if (p % stride == 0 || std::fabs(x - R) <= reach + h) pts.push_back({static_cast<int>(p), 0});
      }
    } else {
      const double total = std::numbers::pi * Mext * static_cast<double>(Mext);
      const long stride =
          std::max<long>(1, static_cast<long>(std::ceil(std::sqrt(total / static_cast<double>(max_points)))));
      for (long p = -Mext; p <= Mext; p += 1) {
        if (p % stride != 0) continue;
        for (long q = -Mext; q <= Mext; ++q) {
          if (q % stride == 0 && in_ball(p, q)) pts.push_back({static_cast<int>(p), static_cast<int>(q)});
        }
      }
    }
    for (int j = 1; j <= opt.max_tau_halvings; ++j) {
      const double tau = std::ldexp(1.0, -j);
      SuperSolutionSpec cand = spec;
      cand.tau = tau;
      cand.R_sup = R;
      cand.C_tauR = (1.0 / tau + std::pow(R, beta)) * a.sup_a_plus();
      cand.attempts = ++spec.attempts;
      SuperSolution u(cand);
      bool ok = R >= a.R_a();
      double max_res = -std::numeric_limits<double>::infinity();
      double max_ratio = -std::numeric_limits<double>::infinity();
      double min_margin = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; ok && k < pts.size(); ++k) {
        const long p = pts[k][0];
        const long q = pts[k][1];
        const Point x{p * h, q * h};
        const double ux = u(x);
        double conv = 0.0;
        for (const auto& t : taps) {
          const long pp = p + t.di;
          const long qq = q + t.dj;
          if (!in_ball(pp, qq)) continue;
          conv += t.w * u({pp * h, qq * h});
        }
        const double res = rate * (conv - ux) + ux * (a(x) - ux);
        max_res = std::max(max_res, res);
        min_margin = std::min(min_margin, ux - a.plus(x));
        if (res > tol || ux < a.plus(x)) ok = false;
        if (std::hypot(x[0], x[1]) >= R) {
          max_ratio = std::max(max_ratio, res / ux);
          if (res > -0.5 * a.ell() * ux) ok = false;
        }
      }
      cand.eval_points = pts.size();
      cand.max_residual = max_res;
      cand.max_outer_ratio = max_ratio;
      cand.min_margin_over_a_plus = min_margin;
      if (ok) {
        cand.found = true;
        return SuperSolution(cand);
      }
      spec = cand;
    }
  }
  spec.found = false;
  return SuperSolution(spec);
}

}  // namespace nlkpp
