#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "nlkpp/grid.hpp"
#include "nlkpp/kernel.hpp"
#include "nlkpp/nonlocal_op.hpp"
#include "nlkpp/resource.hpp"

namespace nlkpp {

using Point = std::array<double, 2>;

/// psi(r) = max((1 - r)^3, 0).
double psi(double r);

/// Laplacian of Psi(x) = psi(|x|) in dimension N at |x| = r > 0:
/// 3(1 - r)(2 - (N - 1)(1 - r)/r) on (0, 1], zero beyond.
double laplacian_Psi(double r, int N);

/// max(1/2, (N - 1)/(N + 1)).
double kappa(int N);

/// Unit-mass radial bump C * min(psi(r), psi(kappa)) supported in the unit ball.
struct PhiProfile {
  int dim = 1;
  double kappa = 0.5;
  double C = 1.0;
  double operator()(double r) const;
  /// Mass by quadrature (should be 1).
  double mass() const;
};

PhiProfile build_phi(int N);

struct SubSolutionSpec {
  Point z{0.0, 0.0};
  double theta = 0.3;
  double R_loc = 0.0;    // (1 - theta/4) a+(z) <= a+ on the ball of radius 2 R_loc around z
  double kappa = 0.5;
  double C_kappa = 1.0;
  double a_plus_z = 0.0;
  double plateau = 0.0;  // cap height on the inner ball: (1 - 3 theta/4) a+(z)
  double eps_threshold = 0.0;  // 0 until validated
  int dim = 1;
};

/// Mollified cap around z: the cap eta (plateau on B_{R/2}, C^2 quintic ramp to
/// zero at R) convolved with phi scaled to radius R/2. Radial in |x - z|,
/// supported in the ball of radius 3R/2.
class SubSolution {
 public:
  SubSolution(SubSolutionSpec spec, std::vector<double> table, double dr);

  const SubSolutionSpec& spec() const { return spec_; }
  SubSolutionSpec& spec() { return spec_; }
  double support_radius() const { return 1.5 * spec_.R_loc; }

  /// Value as a function of the distance to z.
  double radial(double r) const;
  double operator()(const Point& x) const;

  /// Cap function eta at distance r.
  double eta(double r) const;

  /// Samples on a grid; the grid must put at least 8 cells across R_loc/2.
  Field sample(const GridPtr& g) const;

 private:
  SubSolutionSpec spec_;
  struct Spline;
  std::shared_ptr<const Spline> spline_;
};

/// Largest R with (1 - theta/4) a+(z) <= a+ on the closed ball of radius 2R around z.
double local_radius(const Resource& a, const Point& z, double theta);

SubSolution build_subsolution(const Resource& a, const Point& z, double theta);

struct SubValidationEntry {
  double eps = 0.0;
  double h = 0.0;
  std::size_t nodes = 0;
  double min_residual = 0.0;
  double predicted_slack = 0.0;  // (theta/8) a+(z) times the peak of the sub-solution
  bool passed = false;
};

struct SubValidation {
  std::vector<SubValidationEntry> entries;  // descending eps
  double tol = 0.0;
  /// Largest listed eps such that it and every smaller listed eps pass; 0 if none.
  double threshold = 0.0;
};

struct ValidationOptions {
  double spacing_factor = 4.0;
  double tol_scale = 1e-8;  // tol_sub = tol_scale * sup a+
  ApplyMode mode = ApplyMode::automatic;
  /// The construction needs a finite m-th moment; the fat-tail experiment lifts this
  /// to observe the failure.
  bool allow_infinite_moment = false;
};

/// Evaluates M[u] + u(a - u) for the sub-solution at every eps on a grid
/// covering its support. For unbounded kernels the cutoff covers the support
/// diameter, so the result is the full-space residual.
SubValidation validate_subsolution(const SubSolution& sub, const Resource& a, const KernelProfile& J, double m,
                                   std::vector<double> eps_list, const ValidationOptions& opt = {});

struct SuperSolutionSpec {
  double beta = 2.0;
  double tau = 0.5;
  double R_sup = 1.0;
  double C_tauR = 1.0;
  double ell = 0.0;
  double sup_a_plus = 0.0;
  double epsilon = 0.0;
  double m = 0.0;
  double R_ext = 0.0;
  bool found = false;
  int attempts = 0;
  std::size_t eval_points = 0;
  double max_residual = 0.0;           // over all evaluation points
  double max_outer_ratio = 0.0;        // max residual / u over |x| >= R_sup (needs <= -ell/2)
  double min_margin_over_a_plus = 0.0; // min (u - a+)
};

/// u(x) = C tau / (1 + tau max(R, |x|)^beta) with C = (1/tau + R^beta) sup a+.
class SuperSolution {
 public:
  explicit SuperSolution(SuperSolutionSpec spec) : spec_(spec) {}
  const SuperSolutionSpec& spec() const { return spec_; }
  double radial(double r) const;
  double operator()(const Point& x) const { return radial(std::hypot(x[0], x[1])); }
  Field sample(const GridPtr& g) const;

 private:
  SuperSolutionSpec spec_;
};

double default_beta(const KernelProfile& J);

struct SuperSearchOptions {
  int max_radius_doublings = 8;
  int max_tau_halvings = 40;
  double tol_scale = 1e-8;               // residual tolerance inside, times sup a+
  std::size_t eval_budget = 20'000'000;  // kernel taps times evaluation points
};

/// Searches R = R_ell 2^i and tau = 2^-j until the residual of the explicit
/// profile on the ball of radius R_ext (with the given discrete kernel) is at
/// most tol everywhere, at most -(ell/2) u for |x| >= R, and u >= a+.
/// `found` is false when the schedule is exhausted. Throws when the beta-th
/// moment of J is infinite.
SuperSolution build_supersolution(const Resource& a, const KernelProfile& J, const DiscreteKernel& kernel, double m, double beta,
                                  double R_ext, const SuperSearchOptions& opt = {});

}  // namespace nlkpp
