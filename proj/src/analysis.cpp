#include "nlkpp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nlkpp/parallel.hpp"

namespace nlkpp {

double bbm_energy(const NonlocalOperator& op, const Field& u) {
  require_same_grid(u, Field(op.grid()), "bbm_energy");
  const Grid& g = *op.grid();
  const DiscreteKernel& dk = op.kernel();
  const int K = dk.half_width;
  const std::size_t n = g.size();
  std::vector<double> per_node(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    const auto [i, j] = g.index(p);
    double s = 0.0;
    const int bmax = g.dim() == 1 ? 0 : K;
    for (int a = -K; a <= K; ++a) {
      for (int b = -bmax; b <= bmax; ++b) {
        const double w = g.dim() == 1 ? dk.at(a) : dk.at(a, b);
        if (w == 0.0) continue;
        const long q = g.find(i + a, j + b);
        if (q < 0) continue;
        const double d = u[p] - u[static_cast<std::size_t>(q)];
        s += w * d * d;
      }
    }
    per_node[p] = s;
  }
  return op.rate() * g.cell_volume() * pairwise_sum(per_node);
}

MassBalance mass_residual(const NonlocalOperator& op, const Field& u, const Field& a) {
  require_same_grid(u, a, "mass_residual");
  const std::size_t n = u.size();
  std::vector<double> react(n), leak(n), absr(n);
  const auto& inside = op.inside_mass();
  for (std::size_t i = 0; i < n; ++i) {
    react[i] = u[i] * (a[i] - u[i]);
    absr[i] = std::fabs(react[i]);
    leak[i] = u[i] * (1.0 - inside[i]);
  }
  const double vol = op.grid()->cell_volume();
  return {pairwise_sum(react) * vol, op.rate() * pairwise_sum(leak) * vol, pairwise_sum(absr) * vol};
}

double uniqueness_probe(const NonlocalOperator& op, const Field& u, const Field& v, const Field& a,
                        double residual_tol) {
  require_same_grid(u, v, "uniqueness_probe");
  if (sup_norm(kpp_residual(op, u, a)) > residual_tol) {
    throw std::invalid_argument("uniqueness_probe: first field does not solve the truncated problem");
  }
  if (sup_norm(kpp_residual(op, v, a)) > residual_tol) {
    throw std::invalid_argument("uniqueness_probe: second field does not solve the truncated problem");
  }
  const Field mu = op.apply(u);
  const Field mv = op.apply(v);
  const std::size_t n = u.size();
  std::vector<double> cubic(n), cross(n);
  for (std::size_t i = 0; i < n; ++i) {
    cubic[i] = u[i] * v[i] * (v[i] - u[i]);
    cross[i] = u[i] * mv[i] - v[i] * mu[i];
  }
  return (pairwise_sum(cubic) - pairwise_sum(cross)) * op.grid()->cell_volume();
}

std::vector<std::size_t> support_interior(const Resource& a, const Grid& g, double collar) {
  std::vector<std::size_t> out;
  const int dirs = g.dim() == 1 ? 2 : 32;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto x = g.point(n);
    if (!(a(x) > 0.0)) continue;
    bool inside = true;
    for (double frac : {0.5, 1.0}) {
      for (int k = 0; k < dirs && inside; ++k) {
        const double t = g.dim() == 1 ? (k == 0 ? 0.0 : std::numbers::pi) : 2.0 * std::numbers::pi * k / dirs;
        const Point y{x[0] + frac * collar * std::cos(t), x[1] + frac * collar * std::sin(t)};
        if (!(a(y) > 0.0)) inside = false;
      }
    }
    if (inside) out.push_back(n);
  }
  return out;
}

SweepResult sweep_epsilon(const KernelProfile& J, const Resource& a, double m, std::vector<double> eps_list,
                          const SolverConfig& base, const SweepOptions& opt) {
  if (!(m >= 0.0 && m < 2.0)) throw std::invalid_argument("sweeps need 0 <= m < 2");
  if (m > 0.0 && !std::isfinite(moment(J, m))) throw std::invalid_argument("the m-th kernel moment is infinite");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
  SweepResult out;
  out.R = base.R_schedule.empty() ? 4.0 * a.R_ell() : base.R_schedule.back();
  const double sup = a.sup_a_plus();
  for (double eps : eps_list) {
    SweepEntry e;
    e.eps = eps;
    try {
      SolverConfig cfg = base;
      cfg.epsilon = eps;
      cfg.m = m;
      e.h = solver_spacing(J, a, cfg);
      cfg.h = e.h;
      cfg.R_schedule = {round_up_to_spacing(out.R, e.h)};
      const auto grid = Grid::make(J.dim(), cfg.R_schedule[0], e.h);
      NonlocalOperator op(solver_kernel(J, a, cfg), grid, m, cfg.mode);
      const Field av = sample(a, grid);
      if (cfg.start.kind == StartKind::subsolution) {
        const SubSolution sub = build_subsolution(a, cfg.start.z, cfg.start.theta);
        const Field r = kpp_residual(op, sub.sample(grid), av);
        const double rmin = *std::min_element(r.values().begin(), r.values().end());
        // uncertified eps: fall back to the principal-eigenvector sub-solution
        if (rmin < -1e-8 * sup) cfg.start.kind = StartKind::eigen;
      }
      SolveResult res = solve_minimal(J, a, cfg);
      const Field& u = res.u;
      e.nodes = u.size();
      e.certified = res.report.certified;
      const auto interior = support_interior(a, *grid, opt.collar_cells * e.h);
      e.deficit = 0.0;
      for (auto n : interior) e.deficit = std::max(e.deficit, a.plus(grid->point(n)) - u[n]);
      e.excess = 0.0;
      e.boundary_sup = 0.0;
      e.lower_bound_gap = std::numeric_limits<double>::infinity();
      e.upper_excess = -std::numeric_limits<double>::infinity();
      bool all_zero = true;
      for (std::size_t n = 0; n < u.size(); ++n) {
        const auto x = grid->point(n);
        if (!(a(x) > 0.0)) e.excess = std::max(e.excess, u[n]);
        if (grid->norm(n) >= a.R_ell()) e.boundary_sup = std::max(e.boundary_sup, u[n]);
        e.lower_bound_gap = std::min(e.lower_bound_gap, u[n] - std::max(0.0, a(x) - 1.0));
        e.upper_excess = std::max(e.upper_excess, u[n] - sup);
        if (u[n] != 0.0) all_zero = false;
      }
      e.identically_zero = all_zero;
      e.positivity_min = res.report.positivity_min;
      e.bbm = bbm_energy(op, u);
      const MassBalance mb = mass_residual(op, u, av);
      e.reaction = mb.reaction;
      e.leakage = mb.leakage;
      e.reaction_l1 = mb.scale;
      e.mass = integrate(u);
      e.report = std::move(res.report);
      e.report.history.clear();
      if (opt.keep_fields) e.u = u;
      if (!e.report.converged) e.error = "solver did not converge";
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

std::vector<SharpnessEntry> moment_sharpness_experiment(double m, const std::vector<double>& alpha_list,
                                                        const std::vector<double>& eps_list, const Resource& a,
                                                        const SharpnessOptions& opt) {
  if (!(m > 0.0 && m < 2.0)) throw std::invalid_argument("the moment experiment needs 0 < m < 2");
  std::vector<SharpnessEntry> out;
  const SubSolution sub = build_subsolution(a, opt.z, opt.theta);
  for (double alpha : alpha_list) {
    KernelParams p;
    p.alpha = alpha;
    const auto J = KernelProfile::make(KernelFamily::power_tail, p, a.dim());
    SharpnessEntry e;
    e.alpha = alpha;
    for (double off : opt.beta_offsets) {
      MomentRow r;
      r.beta = m - off;
      r.cutoff = std::exp(1.0 / off);
      r.value = off * truncated_moment(J, r.beta, r.cutoff);
      e.rows.push_back(r);
    }
    for (std::size_t i = 1; i < e.rows.size(); ++i) e.ratios.push_back(e.rows[i].value / e.rows[i - 1].value);
    ValidationOptions vo = opt.validation;
    vo.allow_infinite_moment = true;
    e.validation = validate_subsolution(sub, a, J, m, eps_list, vo);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace nlkpp
