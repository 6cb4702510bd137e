#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlkpp/barriers.hpp"
#include "nlkpp/grid.hpp"
#include "nlkpp/kernel.hpp"
#include "nlkpp/nonlocal_op.hpp"
#include "nlkpp/resource.hpp"

namespace nlkpp {

enum class StartKind { subsolution, zero, custom, eigen };

const char* start_name(StartKind k);
StartKind parse_start_kind(const std::string& s);

struct StartSpec {
  StartKind kind = StartKind::subsolution;
  Point z{0.0, 0.0};
  double theta = 0.3;
  std::optional<Field> custom;  // any grid containing the first stage (zero-extended)
};

struct SolverConfig {
  double epsilon = 0.1;
  double m = 1.0;
  std::optional<double> k;  // default: default_k
  double tol_inner = 1e-15;
  double tol_outer = 1e-14;
  double tol_R = 1e-10;
  std::vector<double> R_schedule;  // empty: {2 R_ell, 4 R_ell}
  int max_outer = 500000;
  int max_inner = 10000;
  double spacing_factor = 4.0;
  std::optional<double> h;       // default: lattice_spacing, also resolving the sub-solution
  std::optional<double> cutoff;  // unbounded kernels
  ApplyMode mode = ApplyMode::automatic;
  StartSpec start;
  bool keep_history = false;
};

struct StageReport {
  double R = 0.0;
  std::size_t nodes = 0;
  int outer_iters = 0;
  long inner_iters = 0;
  double residual_sup = 0.0;
  double monotonicity_violation = 0.0;  // max_j sup(u^j - u^{j+1})
  double bracket_violation = 0.0;       // max_j sup(max(start - u^j, u^j - sup a+))
  double positivity_min = 0.0;
  double start_residual_min = 0.0;      // min residual of the start on this stage
  double final_change = 0.0;
  double error_estimate = 0.0;    // change * q / (1 - q), q the mean step ratio over recent steps
  bool roundoff_limited = false;  // stopped at the rounding floor before error_estimate < tol_outer
  bool converged = false;
};

struct SolveReport {
  std::vector<StageReport> stages;
  int outer_iters = 0;
  double residual_sup = 0.0;
  double monotonicity_violation = 0.0;
  double bracket_violation = 0.0;
  double positivity_min = 0.0;
  double R_monotonicity_violation = 0.0;  // max over stages of sup(u_R - u_R') on common nodes
  double window_change = 0.0;             // last stage change on the ball of radius R_ell
  double k = 0.0;
  double h = 0.0;
  double epsilon = 0.0;
  double m = 0.0;
  std::string start_kind;
  bool certified = false;  // start is a sub-solution within tol_sub on the first stage
  bool roundoff_limited = false;  // some stage stopped at the rounding floor
  bool converged = false;
  std::vector<Field> history;  // iterates of the last stage when keep_history is set
};

struct SolveResult {
  Field u;
  SolveReport report;
};

/// 1 + max(2 eps^-m, 4 sup a+ + sup |a|).
double default_k(double epsilon, double m, const Resource& a);

/// Solves M[u] - k u = g by u <- (eps^-m K u - g)/(eps^-m + k), starting from
/// `warm` (zero when absent), until the sup change is below tol.
Field inner_solve(const NonlocalOperator& op, double k, const Field& g, const Field* warm = nullptr,
                  double tol = 1e-14, int max_iters = 10000, long* iters = nullptr);

/// Monotone scheme on one ball: u^{j+1} = inner_solve(k, -k u^j - f(u^j)),
/// f(x, s) = s(a(x) - s), from the given start.
SolveResult solve_truncated(const NonlocalOperator& op, const Field& a, double sup_a_plus, const Field& start,
                            const SolverConfig& cfg);

/// Runs the R schedule with zero-extension between stages and stops once the
/// change on the ball of radius R_ell drops below tol_R.
SolveResult solve_minimal(const KernelProfile& J, const Resource& a, const SolverConfig& cfg);

/// Lattice spacing and kernel used by solve_minimal for this configuration.
double solver_spacing(const KernelProfile& J, const Resource& a, const SolverConfig& cfg);
DiscreteKernel solver_kernel(const KernelProfile& J, const Resource& a, const SolverConfig& cfg);
std::vector<double> solver_schedule(const Resource& a, const SolverConfig& cfg, double h);

/// lambda v for the principal eigenpair (mu, v) of eps^-m (K - I) + diag(a),
/// scaled so it is a sub-solution below sup a+; zero when mu <= 0.
Field principal_eigen_start(const NonlocalOperator& op, const Field& a, double sup_a_plus, double* mu = nullptr);

struct MaxPrincipleVerdict {
  bool hypothesis = false;  // min(M[w] - k w) >= 0
  bool conclusion = false;  // max w <= tol
  double min_lhs = 0.0;
  double max_w = 0.0;
  bool consistent() const { return !hypothesis || conclusion; }
};

MaxPrincipleVerdict check_max_principle(const NonlocalOperator& op, double k, const Field& w, double tol = 1e-12);

struct ComparisonVerdict {
  bool rejected = false;  // an input failed its residual sign check
  std::string reason;
  double sub_min_residual = 0.0;
  double super_max_residual = 0.0;
  double max_excess = 0.0;  // max(u - v)
  bool holds = false;
};

ComparisonVerdict check_comparison(const NonlocalOperator& op, const Field& a, const Field& u_sub,
                                   const Field& v_super, double tol = 1e-8, double residual_tol = 1e-8);

}  // namespace nlkpp
