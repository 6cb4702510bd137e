#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlkpp/barriers.hpp"

using namespace nlkpp;

namespace {

Resource bump(double A, double r0, double d, int N = 1) {
  ResourceParams p;
  p.amplitude = A;
  p.width = r0;
  p.offset = d;
  return Resource::make(ResourceFamily::compact_bump, p, N);
}

KernelProfile uniform(int N) {
  KernelParams p;
  p.radius = 1.0;
  return KernelProfile::make(KernelFamily::uniform_ball, p, N);
}

}  // namespace

TEST_CASE("psi and the radial Laplacian") {
  CHECK(psi(0.0) == 1.0);
  CHECK(psi(1.5) == 0.0);
  CHECK(psi(0.5) == 0.125);
  CHECK(laplacian_Psi(0.5, 3) == doctest::Approx(0.0).scale(1.0));
  CHECK(laplacian_Psi(1.2, 2) == 0.0);
  CHECK_THROWS(laplacian_Psi(0.0, 2));
  for (int N : {1, 2, 3}) {
    const double r0 = (N - 1.0) / (N + 1.0);
    for (double r = std::max(r0, 1e-3); r <= 1.0; r += 1e-3) CHECK(laplacian_Psi(r, N) >= -1e-15);
  }
  // finite-difference check in 2D: psi'' + psi'/r
  const double r = 0.7, h = 1e-4;
  const double d2 = (psi(r + h) - 2 * psi(r) + psi(r - h)) / (h * h);
  const double d1 = (psi(r + h) - psi(r - h)) / (2 * h);
  CHECK(laplacian_Psi(r, 2) == doctest::Approx(d2 + d1 / r).epsilon(1e-6));
}

TEST_CASE("phi profile") {
  CHECK(kappa(1) == 0.5);
  CHECK(kappa(2) == 0.5);
  CHECK(kappa(3) == 0.5);
  CHECK(kappa(5) == doctest::Approx(2.0 / 3.0));
  // 1D: 1/(2 (kappa psi(kappa) + int_{1/2}^1 (1-r)^3 dr)) = 1/(2 (1/16 + 1/64))
  const auto p1 = build_phi(1);
  CHECK(p1.C == doctest::Approx(6.4).epsilon(1e-12));
  // 2D: 1/(2 pi (psi(1/2)/8 + int_{1/2}^1 (1-r)^3 r dr)) = 1/(2 pi (1/64 + 3/320))
  const auto p2 = build_phi(2);
  CHECK(p2.C == doctest::Approx(20.0 / std::numbers::pi).epsilon(1e-12));
  for (const auto& p : {p1, p2}) {
    CHECK(std::fabs(p.mass() - 1.0) <= 1e-10);
    CHECK(p(0.0) == p(0.5));
    CHECK(p(0.25) == p(0.5));
    CHECK(p(1.0) == 0.0);
    CHECK(p(1.3) == 0.0);
    double prev = p(0.0);
    for (double r = 0.0; r <= 1.1; r += 1e-3) {
      CHECK(p(r) <= prev);
      prev = p(r);
    }
  }
}

TEST_CASE("local radius of a compact bump") {
  // (1 - theta/4) * 0.5 <= 0.5 - 4 R^2
  const auto a = bump(1.0, 1.0, 0.5);
  const double R = local_radius(a, {0.0, 0.0}, 0.3);
  CHECK(R == doctest::Approx(std::sqrt(0.075 * 0.5 / 4.0)).epsilon(1e-9));
  CHECK_THROWS(local_radius(a, {0.9, 0.0}, 0.3));
}

TEST_CASE("sub-solution shape") {
  for (int N : {1, 2}) {
    const auto a = bump(1.0, 1.0, 0.5, N);
    for (double theta : {0.3, 0.9}) {
      const auto sub = build_subsolution(a, {0.0, 0.0}, theta);
      const auto& s = sub.spec();
      CHECK(s.kappa == 0.5);
      CHECK(sub.radial(0.0) >= (1.0 - theta) * s.a_plus_z);
      CHECK(sub.radial(1.5 * s.R_loc) == 0.0);
      CHECK(sub.radial(2.0 * s.R_loc) == 0.0);
      // cap bounds
      for (double r = 0.0; r <= 1.2 * s.R_loc; r += s.R_loc / 500) {
        const double e = sub.eta(r);
        if (r <= 0.5 * s.R_loc) CHECK(e >= (1.0 - theta) * s.a_plus_z);
        CHECK(e <= (r <= s.R_loc ? (1.0 - 0.5 * theta) * s.a_plus_z : 0.0));
      }
      const double h = s.R_loc / 64;
      auto g = Grid::make(N, round_up_to_spacing(2.0 * s.R_loc, h), h);
      const Field u = sub.sample(g);
      const Field ap = sample_plus(a, g);
      for (std::size_t n = 0; n < g->size(); ++n) {
        CHECK(u[n] >= 0.0);
        if (g->norm(n) >= 1.5 * s.R_loc) CHECK(u[n] == 0.0);
        if (u[n] > 0.0) CHECK(u[n] < ap[n]);
      }
      CHECK_THROWS(sub.sample(Grid::make(N, 1.0, 0.125)));
    }
  }
  CHECK_THROWS(build_subsolution(bump(1.0, 1.0, 0.5), {0.8, 0.0}, 0.3));
  CHECK_THROWS(build_subsolution(bump(1.0, 1.0, 0.5), {0.0, 0.0}, 1.0));
}

TEST_CASE("sub-solution value at the center equals the mollified plateau") {
  // eta is flat on B_{R/2} and phi_{R/2} has unit mass, so eta * phi_{R/2} (z) is the plateau.
  for (int N : {1, 2}) {
    const auto sub = build_subsolution(bump(1.0, 1.0, 0.5, N), {0.0, 0.0}, 0.3);
    CHECK(sub.radial(0.0) == doctest::Approx(sub.spec().plateau).epsilon(1e-12));
    CHECK(sub.spec().plateau == doctest::Approx((1.0 - 0.75 * 0.3) * 0.5));
  }
}

TEST_CASE("discrete mean value inequality outside the core") {
  const auto a = bump(1.0, 1.0, 0.5);
  const auto sub = build_subsolution(a, {0.0, 0.0}, 0.3);
  const double R = sub.spec().R_loc;
  const double eps = (1.0 - sub.spec().kappa) * R / 8.0;
  const double h = eps / 8.0;
  auto g = Grid::make(1, round_up_to_spacing(2.0 * R, h), h);
  NonlocalOperator op(discretize(uniform(1), eps, h), g, 0.0, ApplyMode::direct);
  const Field u = sub.sample(g);
  const Field Ku = op.convolve(u);
  const double r_in = R * (1.0 + (sub.spec().kappa + 1.0) / 4.0);
  int checked = 0;
  for (std::size_t n = 0; n < g->size(); ++n) {
    if (g->norm(n) < r_in || !op.interior(n)) continue;
    ++checked;
    CHECK(Ku[n] >= u[n] * op.inside_mass()[n] - 1e-12 * sub.spec().a_plus_z);
  }
  CHECK(checked > 10);
}

TEST_CASE("sub-solution validation with a compact kernel") {
  const auto a = bump(1.0, 1.0, 0.5);
  const auto sub = build_subsolution(a, {0.0, 0.0}, 0.3);
  const std::vector<double> eps{0.02, 0.01, 0.005, 0.002, 0.001, 0.0005};
  const auto v = validate_subsolution(sub, a, uniform(1), 1.0, eps);
  REQUIRE(v.entries.size() == eps.size());
  CHECK(v.tol == doctest::Approx(1e-8 * 0.5));
  CHECK(v.threshold > 0.0);
  CHECK(v.threshold < 0.02);
  MESSAGE("m=1 threshold " << v.threshold);
  double prev = -1e300;
  for (const auto& e : v.entries) {
    CHECK(e.predicted_slack == doctest::Approx(0.3 / 8 * 0.5 * sub.radial(0.0)));
    if (e.eps <= v.threshold) {
      CHECK(e.passed);
      CHECK(e.min_residual >= -v.tol);
      CHECK(e.min_residual >= prev - v.tol);
      prev = e.min_residual;
    }
  }
  CHECK_THROWS(validate_subsolution(sub, a, uniform(2), 1.0, eps));
}

TEST_CASE("fat tails: no validation when alpha < m") {
  const auto a = bump(1.0, 1.0, 0.5);
  const auto sub = build_subsolution(a, {0.0, 0.0}, 0.3);
  KernelParams p;
  p.alpha = 0.5;
  const auto J = KernelProfile::make(KernelFamily::power_tail, p, 1);
  CHECK_THROWS(validate_subsolution(sub, a, J, 1.0, {1e-3}));
  ValidationOptions opt;
  opt.allow_infinite_moment = true;
  const auto v = validate_subsolution(sub, a, J, 1.0, {1e-3, 5e-4, 2e-4}, opt);
  CHECK(v.threshold == 0.0);
  for (const auto& e : v.entries) CHECK_FALSE(e.passed);
}

TEST_CASE("super-solution") {
  const auto a = bump(1.0, 1.0, 0.5);
  const auto J = uniform(1);
  const double eps = 0.2, h = 0.05;
  const auto K = discretize(J, eps, h);
  const double beta = default_beta(J);
  CHECK(beta == 2.0);
  const auto sup = build_supersolution(a, J, K, 1.0, beta, 8.0);
  const auto& s = sup.spec();
  REQUIRE(s.found);
  CHECK(s.C_tauR == doctest::Approx((1.0 / s.tau + std::pow(s.R_sup, beta)) * 0.5));
  // plateau equals sup a+
  CHECK(sup.radial(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sup.radial(0.5 * s.R_sup) == sup.radial(0.0));
  for (double r = s.R_sup; r < 50.0; r += 0.37) {
    CHECK(sup.radial(r) * (1.0 + s.tau * std::pow(r, beta)) == doctest::Approx(s.C_tauR * s.tau).epsilon(1e-14));
  }
  CHECK(s.max_outer_ratio <= -0.5 * a.ell());
  CHECK(s.min_margin_over_a_plus >= 0.0);
  CHECK(s.max_residual <= 1e-8 * 0.5);

  // nodewise checks on an independent grid
  auto g = Grid::make(1, 8.0, h);
  NonlocalOperator op(K, g, 1.0, ApplyMode::direct);
  const Field u = sup.sample(g), ap = sample_plus(a, g);
  const Field r = kpp_residual(op, u, sample(a, g));
  for (std::size_t n = 0; n < g->size(); ++n) {
    CHECK(u[n] >= ap[n]);
    CHECK(r[n] <= 1e-8 * 0.5);
    if (g->norm(n) >= s.R_sup) CHECK(r[n] <= -0.5 * a.ell() * u[n]);
  }
}

TEST_CASE("super-solution needs a finite beta moment") {
  KernelParams p;
  p.alpha = 1.5;
  const auto J = KernelProfile::make(KernelFamily::power_tail, p, 1);
  CHECK(default_beta(J) == 1.0);
  const auto K = discretize(J, 0.2, 0.05, 2.0);
  CHECK_THROWS(build_supersolution(bump(1.0, 1.0, 0.5), J, K, 1.0, 1.5, 8.0));
  CHECK_THROWS(build_supersolution(bump(1.0, 1.0, 0.5), J, K, 1.0, 0.0, 8.0));
  p.alpha = 3.0;
  CHECK(default_beta(KernelProfile::make(KernelFamily::power_tail, p, 1)) == 2.0);
  CHECK(default_beta(KernelProfile::make(KernelFamily::power_tail, p, 2)) == 2.5);
}
