#include <doctest.h>

#include <cmath>
#include <random>

#include "nlkpp/resource.hpp"

using namespace nlkpp;

namespace {

ResourceParams params(double A, double w, double d) {
  ResourceParams p;
  p.amplitude = A;
  p.width = w;
  p.offset = d;
  return p;
}

}  // namespace

TEST_CASE("gaussian bump derived quantities") {
  const auto a = Resource::make(ResourceFamily::gaussian_bump, params(1.0, 1.0, 0.2), 1);
  CHECK(a.sup_a_plus() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(a.R_a() == doctest::Approx(std::sqrt(std::log(5.0))).epsilon(1e-14));
  CHECK(a.plus({a.R_a() * (1.0 + 1e-9), 0.0}) == 0.0);
  CHECK(a.plus({a.R_a() * (1.0 - 1e-6), 0.0}) > 0.0);
  CHECK(a({0.0, 0.0}) == doctest::Approx(0.8));
  // a <= -ell beyond R_ell
  CHECK(a({a.R_ell(), 0.0}) <= -a.ell() + 1e-15);
}

TEST_CASE("compact bump derived quantities") {
  const auto a = Resource::make(ResourceFamily::compact_bump, params(1.0, 1.0, 0.5), 2);
  CHECK(a({0.0, 0.0}) == 0.5);
  CHECK(a({1.0, 0.0}) == -0.5);
  CHECK(a({3.0, 4.0}) == -0.5);
  CHECK(a.R_a() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a.ell() == 0.5);
  CHECK(a.R_ell() == 1.0);
  CHECK(a.sup_abs() == 0.5);
}

TEST_CASE("resource errors") {
  CHECK_THROWS(Resource::make(ResourceFamily::gaussian_bump, params(1.0, 1.0, 1.5), 1));
  CHECK_THROWS(Resource::make(ResourceFamily::gaussian_bump, params(1.0, 1.0, 1.0), 1));
  CHECK_THROWS(Resource::make(ResourceFamily::compact_bump, params(1.0, 1.0, 0.0), 1));
  CHECK_THROWS(Resource::make(ResourceFamily::compact_bump, params(1.0, 1.0, -0.1), 1));
  CHECK_THROWS(Resource::make(ResourceFamily::compact_bump, params(1.0, -1.0, 0.5), 1));
  CHECK_THROWS(Resource::make(ResourceFamily::compact_bump, params(1.0, 1.0, 0.5), 3));
  auto p = params(1.0, 1.0, 0.5);
  p.separation = 1.5;
  CHECK_THROWS(Resource::make(ResourceFamily::two_bumps, p, 1));
}

TEST_CASE("two bumps") {
  auto p = params(1.0, 1.0, 0.5);
  p.separation = 4.0;
  const auto a = Resource::make(ResourceFamily::two_bumps, p, 1);
  CHECK(a({2.0, 0.0}) == 0.5);
  CHECK(a({-2.0, 0.0}) == 0.5);
  CHECK(a({0.0, 0.0}) == -0.5);
  CHECK(a.centers().size() == 2);
  CHECK(a.R_a() >= 2.0 + 1.0 / std::sqrt(2.0) - 1e-14);
  for (double x = a.R_ell(); x < a.R_ell() + 10.0; x += 0.01) CHECK(a({x, 0.0}) <= -a.ell());
}

TEST_CASE("custom resource") {
  CHECK_NOTHROW(Resource::custom([](const Resource::Point& x) { return std::max(-0.25, 0.75 - std::fabs(x[0])); }, 1,
                                 0.75, 0.75, 0.25, 1.0));
  // a decreases without bound, but the claimed ell/R_ell pair must hold on sampled shells
  CHECK_THROWS(Resource::custom([](const Resource::Point& x) { return 0.75 - 0.1 * std::fabs(x[0]); }, 1, 0.75, 7.5,
                                0.25, 1.0));
}

TEST_CASE("sampling") {
  const auto a = Resource::make(ResourceFamily::compact_bump, params(1.0, 1.0, 0.5), 1);
  auto g = Grid::make(1, 2.0, 0.05);
  const Field s = sample(a, g), sp = sample_plus(a, g);
  CHECK(s[static_cast<std::size_t>(g->find(0))] == 0.5);
  for (std::size_t n = 0; n < g->size(); ++n) {
    CHECK(sp[n] >= 0.0);
    CHECK(sp[n] == std::max(0.0, s[n]));
    if (g->norm(n) > a.R_a()) CHECK(sp[n] == 0.0);
    CHECK(s[n] <= a.sup_a_plus());
    if (g->norm(n) >= a.R_ell()) CHECK(s[n] <= -a.ell());
  }
}

TEST_CASE("closed-form sup matches the grid sup within the Lipschitz bound") {
  for (int N : {1, 2}) {
    const auto a = Resource::make(ResourceFamily::gaussian_bump, params(1.3, 0.7, 0.3), N);
    // |grad a| <= A sqrt(2/e) / sigma for the gaussian bump
    const double lip = 1.3 * std::sqrt(2.0 / std::exp(1.0)) / 0.7;
    for (double h : {0.1, 0.025}) {
      auto g = Grid::make(N, 2.0, h);
      // shift by a third of a cell so the peak is not a node
      const Field s = sample_field(g, [&](const std::array<double, 2>& x) { return a.plus({x[0] + h / 3, x[1]}); });
      const double gs = sup_norm(s);
      CHECK(gs <= a.sup_a_plus());
      CHECK(a.sup_a_plus() - gs <= lip * h * std::sqrt(static_cast<double>(N)));
    }
  }
}
