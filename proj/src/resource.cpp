#include "nlkpp/resource.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nlkpp/io.hpp"

namespace nlkpp {

const char* family_name(ResourceFamily f) {
  switch (f) {
    case ResourceFamily::gaussian_bump: return "gaussian_bump";
    case ResourceFamily::compact_bump: return "compact_bump";
    case ResourceFamily::two_bumps: return "two_bumps";
    case ResourceFamily::custom: return "custom";
  }
  return "?";
}

ResourceFamily parse_resource_family(const std::string& s) {
  for (auto f : {ResourceFamily::gaussian_bump, ResourceFamily::compact_bump, ResourceFamily::two_bumps,
                 ResourceFamily::custom}) {
    if (s == family_name(f)) return f;
  }
  throw std::invalid_argument("unknown resource family '" + s + "'");
}

Resource Resource::make(ResourceFamily family, const ResourceParams& p, int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("resource dimension must be 1 or 2");
  if (family == ResourceFamily::custom) throw std::invalid_argument("use Resource::custom for custom resources");
  const double A = p.amplitude;
  const double d = p.offset;
  if (!(d > 0.0)) throw std::invalid_argument("offset delta must be positive (a must be negative at infinity)");
  if (!(A > d)) throw std::invalid_argument("amplitude must exceed delta, otherwise a+ vanishes identically");
  if (!(p.width > 0.0)) throw std::invalid_argument("bump width must be positive");
  Resource r;
  r.family_ = family;
  r.params_ = p;
  r.dim_ = dim;
  r.sup_a_plus_ = A - d;
  r.sup_abs_ = std::max(A - d, d);
  switch (family) {
    case ResourceFamily::gaussian_bump:
      r.R_a_ = p.width * std::sqrt(std::log(A / d));
      r.ell_ = 0.5 * d;
      r.R_ell_ = p.width * std::sqrt(std::log(2.0 * A / d));
      break;
    case ResourceFamily::compact_bump:
      r.R_a_ = p.width * std::sqrt(1.0 - d / A);
      r.ell_ = d;
      r.R_ell_ = p.width;
      break;
    case ResourceFamily::two_bumps:
      if (!(p.separation >= 2.0 * p.width)) throw std::invalid_argument("two_bumps separation must be at least 2*r0");
      r.R_a_ = 0.5 * p.separation + p.width * std::sqrt(1.0 - d / A);
      r.ell_ = d;
      r.R_ell_ = 0.5 * p.separation + p.width;
      break;
    case ResourceFamily::custom: break;
  }
  r.validate_shells();
  return r;
}

Resource Resource::custom(std::function<double(const Point&)> a, int dim, double sup_a_plus, double R_a,
                          double ell, double R_ell) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("resource dimension must be 1 or 2");
  if (!a) throw std::invalid_argument("custom resource needs a function");
  if (!(sup_a_plus > 0.0)) throw std::invalid_argument("custom resource must have a+ not identically zero");
  if (!(ell > 0.0)) throw std::invalid_argument("custom resource needs ell > 0");
  if (!(R_ell >= R_a) || !(R_a > 0.0)) throw std::invalid_argument("custom resource needs 0 < R_a <= R_ell");
  Resource r;
  r.family_ = ResourceFamily::custom;
  r.dim_ = dim;
  r.custom_ = std::move(a);
  r.sup_a_plus_ = sup_a_plus;
  r.R_a_ = R_a;
  r.ell_ = ell;
  r.R_ell_ = R_ell;
  r.sup_abs_ = sup_a_plus;
  const int n = 4001;
  for (int i = 0; i < n; ++i) {
    const double x = -(R_ell + 10.0) + 2.0 * (R_ell + 10.0) * i / (n - 1);
    r.sup_abs_ = std::max(r.sup_abs_, std::fabs(r({x, 0.0})));
  }
  r.validate_shells();
  return r;
}

double Resource::operator()(const Point& x) const {
  const double A = params_.amplitude;
  const double d = params_.offset;
  const double w = params_.width;
  switch (family_) {
    case ResourceFamily::gaussian_bump: {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return A * std::exp(-r2 / (w * w)) - d;
    }
    case ResourceFamily::compact_bump: {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return A * std::max(0.0, 1.0 - r2 / (w * w)) - d;
    }
    case ResourceFamily::two_bumps: {
      const double c = 0.5 * params_.separation;
      const double r1 = (x[0] - c) * (x[0] - c) + x[1] * x[1];
      const double r2 = (x[0] + c) * (x[0] + c) + x[1] * x[1];
      return A * (std::max(0.0, 1.0 - r1 / (w * w)) + std::max(0.0, 1.0 - r2 / (w * w))) - d;
    }
    case ResourceFamily::custom: return custom_(x);
  }
  return 0.0;
}

double Resource::plus(const Point& x) const { return std::max(0.0, (*this)(x)); }

std::vector<Resource::Point> Resource::centers() const {
  if (family_ == ResourceFamily::two_bumps) {
    const double c = 0.5 * params_.separation;
    return {{-c, 0.0}, {c, 0.0}};
  }
  return {{0.0, 0.0}};
}

void Resource::validate_shells() const {
  const int radial = 401;
  const int angular = dim_ == 1 ? 2 : 64;
  for (int i = 0; i < radial; ++i) {
    const double r = R_ell_ + 10.0 * i / (radial - 1);
    for (int k = 0; k < angular; ++k) {
      Point x{};
      if (dim_ == 1) {
        x = {k == 0 ? r : -r, 0.0};
      } else {
        const double t = 2.0 * std::numbers::pi * k / angular;
        x = {r * std::cos(t), r * std::sin(t)};
      }
      const double v = (*this)(x);
      if (!std::isfinite(v) || v > -ell_ * (1.0 - 1e-12)) {
        throw std::invalid_argument("resource exceeds -ell at |x| = " + format_double(r));
      }
    }
  }
}

Field sample(const Resource& a, const GridPtr& g) {
  return sample_field(g, [&a](const std::array<double, 2>& x) { return a(x); });
}

Field sample_plus(const Resource& a, const GridPtr& g) {
  return sample_field(g, [&a](const std::array<double, 2>& x) { return a.plus(x); });
}

}  // namespace nlkpp
