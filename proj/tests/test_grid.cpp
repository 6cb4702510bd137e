#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nlkpp/grid.hpp"
#include "nlkpp/resource.hpp"

using namespace nlkpp;

TEST_CASE("1D lattice enumeration") {
  auto g = Grid::make(1, 1.0, 0.5);
  REQUIRE(g->size() == 5);
  const double expect[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (std::size_t n = 0; n < 5; ++n) CHECK(g->point(n)[0] == expect[n]);
  auto g2 = Grid::make(1, 2.0, 0.25);
  CHECK(g2->size() == 17);
  for (std::size_t n = 0; n < g2->size(); ++n) CHECK(g2->point(n)[0] == -g2->point(g2->size() - 1 - n)[0]);
}

TEST_CASE("2D lattice intersected with the disk") {
  auto g = Grid::make(2, 1.0, 1.0);
  REQUIRE(g->size() == 5);
  // lexicographic: (-1,0), (0,-1), (0,0), (0,1), (1,0)
  CHECK(g->index(0) == std::array<int, 2>{-1, 0});
  CHECK(g->index(1) == std::array<int, 2>{0, -1});
  CHECK(g->index(2) == std::array<int, 2>{0, 0});
  CHECK(g->index(3) == std::array<int, 2>{0, 1});
  CHECK(g->index(4) == std::array<int, 2>{1, 0});
}

TEST_CASE("2D grid: all nodes inside, symmetric, and complete") {
  auto g = Grid::make(2, 2.0, 0.25);
  std::size_t count = 0;
  for (int i = -8; i <= 8; ++i) {
    for (int j = -8; j <= 8; ++j) count += (i * i + j * j <= 64);
  }
  CHECK(g->size() == count);
  for (std::size_t n = 0; n < g->size(); ++n) {
    const auto [i, j] = g->index(n);
    CHECK(g->norm(n) <= 2.0 + 1e-15);
    CHECK(g->find(i, j) == static_cast<long>(n));
    CHECK(g->find(-i, -j) >= 0);
  }
}

TEST_CASE("half-integer R/h keeps the origin as a node") {
  auto g = Grid::make(1, 1.25, 0.5);
  CHECK(g->size() == 5);
  CHECK(g->find(0) == 2);
}

TEST_CASE("grid construction errors") {
  CHECK_THROWS(Grid::make(1, 1.0, 0.3));
  CHECK_THROWS(Grid::make(3, 1.0, 0.5));
  CHECK_THROWS(Grid::make(1, -1.0, 0.5));
  CHECK_THROWS(Grid::make(2, 10.0, 0.01, 1000));
  CHECK_NOTHROW(Grid::make(1, 10.0, 0.01, 3000));
}

TEST_CASE("integrate") {
  auto g = Grid::make(1, 1.0, 0.5);
  CHECK(integrate(Field(g, 1.0)) == 2.5);
  CHECK(integrate(Field(g, 0.0)) == 0.0);
  auto fine = Grid::make(1, 1.0, 0.01);
  const Field sq = sample_field(fine, [](const std::array<double, 2>& x) { return x[0] * x[0]; });
  // untrimmed boundary cells: sum (k h)^2 h = 2 h^3 M(M+1)(2M+1)/6 with M = 100
  CHECK(integrate(sq) == doctest::Approx(2e-6 * 100 * 101 * 201 / 6.0).epsilon(1e-13));
  CHECK(std::fabs(integrate(sq) - 2.0 / 3.0) <= 1.01 * 0.01);
}

TEST_CASE("refinement: midpoint error is second order") {
  // 1 - x^2 vanishes on the boundary, so untrimmed boundary cells add nothing
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    auto g = Grid::make(1, 1.0, h);
    const Field f = sample_field(g, [](const std::array<double, 2>& x) { return 1.0 - x[0] * x[0]; });
    err.push_back(std::fabs(integrate(f) - 4.0 / 3.0));
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(std::log2(err[i - 1] / err[i]) >= 1.9);
}

TEST_CASE("reductions and reflection symmetry") {
  auto g = Grid::make(2, 1.5, 0.1);
  const Field c(g, -3.5);
  CHECK(sup_norm(c) == 3.5);
  const Field even = sample_field(g, [](const std::array<double, 2>& x) { return std::cos(x[0]) * std::exp(-x[1] * x[1]); });
  Field refl(g);
  for (std::size_t n = 0; n < g->size(); ++n) {
    const auto [i, j] = g->index(n);
    refl[n] = even[static_cast<std::size_t>(g->find(-i, -j))];
  }
  CHECK(integrate(even) == integrate(refl));
  CHECK(sup_norm(even) == sup_norm(refl));
}

TEST_CASE("inf_on a+ over its support") {
  ResourceParams p;
  p.amplitude = 1.0;
  p.width = 1.0;
  p.offset = 0.5;
  const auto a = Resource::make(ResourceFamily::compact_bump, p, 1);
  auto g = Grid::make(1, 2.0, 0.05);
  const Field ap = sample_plus(a, g);
  std::vector<std::size_t> supp;
  double expect = 1e300;
  for (std::size_t n = 0; n < g->size(); ++n) {
    const double x = g->point(n)[0];
    const double v = 1.0 - x * x - 0.5;
    if (v > 0.0) {
      supp.push_back(n);
      expect = std::min(expect, v);
    }
  }
  CHECK(inf_on(ap, supp) > 0.0);
  CHECK(inf_on(ap, supp) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("restrict and extend") {
  auto big = Grid::make(1, 2.0, 0.25);
  auto small = Grid::make(1, 1.0, 0.25);
  auto coarse = Grid::make(1, 1.0, 0.5);
  const Field f = sample_field(big, [](const std::array<double, 2>& x) { return x[0]; });
  const Field same = restrict_to(f, big);
  CHECK(same.values() == f.values());
  const Field r = restrict_to(f, small);
  CHECK(r.size() == 9);
  CHECK(r[0] == -1.0);
  const Field rc = restrict_to(f, coarse);
  CHECK(rc[1] == -0.5);
  CHECK_THROWS(restrict_to(r, big));
  CHECK_THROWS(restrict_to(f, Grid::make(1, 1.0, 0.3)));
  const Field e = extend_by_zero(r, big);
  CHECK(e[0] == 0.0);
  CHECK(e[4] == -1.0);
  CHECK(integrate(e) == integrate(r));
}

TEST_CASE("field finiteness") {
  auto g = Grid::make(1, 1.0, 0.5);
  Field f(g, 1.0);
  CHECK(f.all_finite());
  f[2] = std::nan("");
  CHECK_FALSE(f.all_finite());
  CHECK_THROWS_AS(f.require_finite("u"), std::domain_error);
}

TEST_CASE("field csv") {
  auto g = Grid::make(2, 1.0, 1.0);
  std::ostringstream os;
  write_field_csv(Field(g, 0.5), os);
  const std::string s = os.str();
  CHECK(s.rfind("x,y,value\r\n-1,0,0.5\r\n", 0) == 0);
  std::ostringstream os1;
  write_field_csv(Field(Grid::make(1, 1.0, 1.0), 2.0), os1);
  CHECK(os1.str() == "x,value\r\n-1,2\r\n0,2\r\n1,2\r\n");
}
