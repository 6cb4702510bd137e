#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlkpp/barriers.hpp"
#include "nlkpp/solver.hpp"

namespace nlkpp {

/// eps^-m h^N sum over ordered pairs of grid nodes of w(x - y)(u(x) - u(y))^2.
/// The |z|^m factors of the weight rho_eps(z)/|z|^m cancel, so coincident
/// nodes need no special case.
double bbm_energy(const NonlocalOperator& op, const Field& u);

struct MassBalance {
  double reaction = 0.0;  // int u (a - u)
  double leakage = 0.0;   // eps^-m int u (1 - inside mass)
  double scale = 0.0;     // int |u (a - u)|, for relative comparisons
};

MassBalance mass_residual(const NonlocalOperator& op, const Field& u, const Field& a);

/// int u v (v - u) - int (u M[v] - v M[u]); both inputs must solve the
/// truncated problem within `residual_tol` (std::invalid_argument otherwise).
double uniqueness_probe(const NonlocalOperator& op, const Field& u, const Field& v, const Field& a,
                        double residual_tol);

struct SweepEntry {
  double eps = 0.0;
  double h = 0.0;
  std::size_t nodes = 0;
  double deficit = 0.0;  // max over supp(a+) nodes away from its edge of (a+ - u)+
  double excess = 0.0;   // max over the other nodes of (u - a+)+
  double bbm = 0.0;
  double reaction = 0.0;
  double leakage = 0.0;
  double reaction_l1 = 0.0;  // int |u (a - u)|
  double mass = 0.0;         // int u
  double boundary_sup = 0.0; // sup of u over |x| >= R_ell
  double lower_bound_gap = 0.0;  // min of u - (a - 1)+
  double upper_excess = 0.0;     // max of u - sup a+
  double positivity_min = 0.0;
  bool identically_zero = false;
  bool certified = false;
  std::string error;
  SolveReport report;
  std::optional<Field> u;
};

struct SweepOptions {
  bool keep_fields = false;
  double collar_cells = 2.0;  // excluded band at the edge of supp(a+), in cells
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // aligned with the (descending) eps list
  double R = 0.0;
};

/// Solves for each eps with the configured start and R (the radius of the
/// last schedule stage is kept fixed across eps). Failures are recorded per entry.
SweepResult sweep_epsilon(const KernelProfile& J, const Resource& a, double m, std::vector<double> eps_list,
                          const SolverConfig& base, const SweepOptions& opt = {});

/// Nodes of supp(a+) whose distance to the edge of supp(a+) exceeds `collar`.
std::vector<std::size_t> support_interior(const Resource& a, const Grid& g, double collar);

struct MomentRow {
  double beta = 0.0;
  double cutoff = 0.0;  // radius of the truncated moment
  double value = 0.0;   // (m - beta) * truncated moment
};

struct SharpnessEntry {
  double alpha = 0.0;
  std::vector<MomentRow> rows;
  std::vector<double> ratios;  // successive value ratios
  SubValidation validation;
};

struct SharpnessOptions {
  std::vector<double> beta_offsets{0.1, 0.05, 0.01};
  double theta = 0.9;
  Point z{0.0, 0.0};
  ValidationOptions validation{};
};

/// For each power_tail(alpha): (m - beta) times the moment of order beta
/// truncated at exp(1/(m - beta)), as beta approaches m; plus sub-solution
/// validation over eps_list.
std::vector<SharpnessEntry> moment_sharpness_experiment(double m, const std::vector<double>& alpha_list,
                                                        const std::vector<double>& eps_list, const Resource& a,
                                                        const SharpnessOptions& opt = {});

}  // namespace nlkpp
