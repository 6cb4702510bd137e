#pragma once

#include <array>
#include <functional>
#include <string>

#include "nlkpp/grid.hpp"

namespace nlkpp {

enum class ResourceFamily { gaussian_bump, compact_bump, two_bumps, custom };

const char* family_name(ResourceFamily f);
ResourceFamily parse_resource_family(const std::string& s);

struct ResourceParams {
  double amplitude = 1.0;   // A
  double width = 1.0;       // sigma (gaussian_bump) or r0 (compact_bump, two_bumps)
  double offset = 0.5;      // delta: a -> -delta at infinity
  double separation = 4.0;  // two_bumps: distance between centers along x
};

/// Resource a(x), bounded and continuous, with a(x) <= -ell for |x| >= R_ell.
class Resource {
 public:
  using Point = std::array<double, 2>;

  static Resource make(ResourceFamily family, const ResourceParams& p, int dim);

  /// Custom resource; the caller supplies the derived radii, which are checked
  /// on sampled shells.
  static Resource custom(std::function<double(const Point&)> a, int dim, double sup_a_plus, double R_a,
                         double ell, double R_ell);

  double operator()(const Point& x) const;
  double plus(const Point& x) const;

  ResourceFamily family() const { return family_; }
  const ResourceParams& params() const { return params_; }
  int dim() const { return dim_; }
  double sup_a_plus() const { return sup_a_plus_; }
  /// sup |a|
  double sup_abs() const { return sup_abs_; }
  /// supp(a+) lies in the closed ball of this radius.
  double R_a() const { return R_a_; }
  double ell() const { return ell_; }
  double R_ell() const { return R_ell_; }

  /// Centers of the positive bumps (one or two).
  std::vector<Point> centers() const;

 private:
  Resource() = default;
  void validate_shells() const;

  ResourceFamily family_ = ResourceFamily::compact_bump;
  ResourceParams params_{};
  int dim_ = 1;
  double sup_a_plus_ = 0.0;
  double sup_abs_ = 0.0;
  double R_a_ = 0.0;
  double ell_ = 0.0;
  double R_ell_ = 0.0;
  std::function<double(const Point&)> custom_;
};

Field sample(const Resource& a, const GridPtr& g);
Field sample_plus(const Resource& a, const GridPtr& g);

}  // namespace nlkpp
