#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nlkpp/grid.hpp"
#include "nlkpp/kernel.hpp"

namespace nlkpp {

enum class ApplyMode { direct, fft, automatic };

const char* mode_name(ApplyMode m);
ApplyMode parse_apply_mode(const std::string& s);

/// Truncated nonlocal operator on a ball grid:
///   M[phi](x) = eps^-m ( sum_{y in grid} w(x - y) phi(y) - phi(x) ).
/// The -phi(x) term keeps full weight, so nodes near the boundary leak mass.
class NonlocalOperator {
 public:
  NonlocalOperator(DiscreteKernel kernel, GridPtr grid, double m, ApplyMode mode = ApplyMode::automatic);
  ~NonlocalOperator();
  NonlocalOperator(const NonlocalOperator&) = delete;
  NonlocalOperator& operator=(const NonlocalOperator&) = delete;

  const GridPtr& grid() const { return grid_; }
  const DiscreteKernel& kernel() const { return kernel_; }
  double m() const { return m_; }
  double epsilon() const { return kernel_.epsilon; }
  /// eps^-m
  double rate() const { return rate_; }
  /// Resolved mode (never automatic).
  ApplyMode mode() const { return mode_; }

  /// out(x) = sum_y w(x - y) in(y) over grid nodes; `out` is overwritten.
  void convolve(const double* in, double* out) const;
  Field convolve(const Field& phi) const;

  Field apply(const Field& phi) const;

  /// sum over grid nodes y of w(x - y), per node x.
  const std::vector<double>& inside_mass() const { return inside_mass_; }

  /// True when the whole stencil around node n stays inside the grid.
  bool interior(std::size_t n) const;

 private:
  struct Tap {
    int di;
    int dj;
    double w;
  };
  struct FftPlan;

  void convolve_direct(const double* in, double* out) const;
  void convolve_fft(const double* in, double* out) const;

  DiscreteKernel kernel_;
  GridPtr grid_;
  double m_;
  double rate_;
  ApplyMode mode_;
  std::vector<Tap> taps_;  // nonzero weights, lexicographic offsets
  std::unique_ptr<FftPlan> fft_;
  std::vector<double> inside_mass_;
};

/// M[u] + u (a - u), nodewise.
Field kpp_residual(const NonlocalOperator& op, const Field& u, const Field& a);

/// Second-difference form of the operator at node n for u extended by zero:
///   (M_m/2) sum_{d != 0} rho(d) (u(x+d) - 2u(x) + u(x-d)) / |d h|^m,
/// with the discrete mollifier rho(d) = eps^-m |d h|^m w(d) / M_m.
/// Throws when the m-th moment of J is infinite.
double second_difference_form(const NonlocalOperator& op, const KernelProfile& J, const Field& u,
                              std::size_t n);

}  // namespace nlkpp
