#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nlkpp {

enum class KernelFamily { uniform_ball, triangle, gaussian, power_tail, custom };

const char* family_name(KernelFamily f);
KernelFamily parse_kernel_family(const std::string& s);

struct KernelParams {
  double radius = 1.0;  // uniform_ball, triangle
  double sigma = 1.0;   // gaussian
  double alpha = 1.0;   // power_tail: J ~ (1+|x|)^-(N+alpha)
};

/// Radial unit-mass dispersal density J(x) = profile(|x|) in dimension 1 or 2.
class KernelProfile {
 public:
  static KernelProfile make(KernelFamily family, const KernelParams& params, int dim);

  /// Arbitrary nonnegative radial profile, renormalized to unit mass.
  /// `tail_alpha` declares algebraic decay profile(r) ~ r^-(N+tail_alpha) for
  /// unbounded supports, which drives the divergent-moment test.
  static KernelProfile custom(std::function<double(double)> profile, int dim,
                              double support_radius = std::numeric_limits<double>::infinity(),
                              std::optional<double> tail_alpha = std::nullopt);

  double operator()(double r) const { return norm_ * raw(r); }

  int dim() const { return dim_; }
  KernelFamily family() const { return family_; }
  const KernelParams& params() const { return params_; }
  double support_radius() const { return support_; }
  bool compact() const { return std::isfinite(support_); }

  /// Length scale that the lattice must resolve with at least four cells.
  double core_radius() const;

  /// Exponent bound: moments of order >= this are infinite.
  double divergence_order() const { return divergence_order_; }

  /// Surface measure of the unit sphere in R^dim (2 in 1D, 2*pi in 2D).
  double sphere_area() const;

  /// Points where the profile is not smooth.
  std::vector<double> breakpoints() const;

 private:
  KernelProfile() = default;
  double raw(double r) const;
  double raw_mass() const;

  KernelFamily family_ = KernelFamily::uniform_ball;
  KernelParams params_{};
  int dim_ = 1;
  double support_ = 1.0;
  double norm_ = 1.0;
  double divergence_order_ = std::numeric_limits<double>::infinity();
  std::function<double(double)> custom_;
};

/// int J(x)|x|^beta dx; +infinity when beta reaches the divergence order.
double moment(const KernelProfile& J, double beta);

/// Same integral restricted to |x| <= cutoff (always finite).
double truncated_moment(const KernelProfile& J, double beta, double cutoff);

/// int_{|y| >= radius} J(y) dy.
double tail_mass(const KernelProfile& J, double radius);

/// Cell-integrated weights of the rescaled kernel on a square lattice of spacing h.
struct DiscreteKernel {
  int dim = 1;
  double epsilon = 1.0;
  double spacing = 1.0;
  int half_width = 0;              // offsets k with |k_i| <= half_width
  std::vector<double> weights;     // dense, lexicographic over offsets
  double mass_deficit = 0.0;       // analytic mass outside the cutoff

  int side() const { return 2 * half_width + 1; }
  double at(int k) const { return weights[static_cast<std::size_t>(k + half_width)]; }
  double at(int k1, int k2) const {
    return weights[static_cast<std::size_t>(k1 + half_width) * side() + (k2 + half_width)];
  }
  double total() const;
};

/// Discretizes J_eps(z) = eps^-N J(z/eps) with lattice spacing h.
/// Compact kernels keep every cell meeting the support; unbounded kernels keep
/// offsets with |k|h <= cutoff and are rescaled to the analytic mass inside it.
DiscreteKernel discretize(const KernelProfile& J, double epsilon, double h,
                          std::optional<double> cutoff = std::nullopt);

void write_kernel_csv(const DiscreteKernel& k, std::ostream& os);

/// Lattice spacing eps/q with q the smallest integer that is at least
/// `spacing_factor`, puts four cells across the kernel core, and gives h <= max_h.
double lattice_spacing(const KernelProfile& J, double epsilon, double spacing_factor = 4.0,
                       double max_h = std::numeric_limits<double>::infinity());

}  // namespace nlkpp
