#include "nlkpp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "nlkpp/io.hpp"
#include "nlkpp/simd.hpp"

namespace nlkpp {

const char* start_name(StartKind k) {
  switch (k) {
    case StartKind::subsolution: return "subsolution";
    case StartKind::zero: return "zero";
    case StartKind::custom: return "custom";
    case StartKind::eigen: return "eigen";
  }
  return "?";
}

StartKind parse_start_kind(const std::string& s) {
  for (auto k : {StartKind::subsolution, StartKind::zero, StartKind::custom, StartKind::eigen}) {
    if (s == start_name(k)) return k;
  }
  throw std::invalid_argument("unknown start kind '" + s + "'");
}

double default_k(double epsilon, double m, const Resource& a) {
  return 1.0 + std::max(2.0 * std::pow(epsilon, -m), 4.0 * a.sup_a_plus() + a.sup_abs());
}

Field inner_solve(const NonlocalOperator& op, double k, const Field& g, const Field* warm, double tol,
                  int max_iters, long* iters) {
  require_same_grid(g, Field(op.grid()), "inner_solve");
  const double rate = op.rate();
  if (!(k > 2.0 * rate)) throw std::invalid_argument("inner_solve needs k > 2 eps^-m");
  g.require_finite("inner_solve right-hand side");
  const std::size_t n = g.size();
  Field u = warm ? *warm : Field(op.grid(), 0.0);
  if (warm) require_same_grid(*warm, g, "inner_solve warm start");
  Field next(op.grid());
  const double inv = 1.0 / (rate + k);
  int it = 0;
  for (; it < max_iters; ++it) {
    op.convolve(u.data(), next.data());
    double* nx = next.data();
    const double* gv = g.data();
    for (std::size_t i = 0; i < n; ++i) nx[i] = (rate * nx[i] - gv[i]) * inv;
    const double change = simd::max_abs_diff(nx, u.data(), n);
    std::swap(u.values(), next.values());
    if (change < tol) {
      ++it;
      break;
    }
  }
  if (iters) *iters += it;
  return u;
}

SolveResult solve_truncated(const NonlocalOperator& op, const Field& a, double sup_a_plus, const Field& start,
                            const SolverConfig& cfg) {
  require_same_grid(a, start, "solve_truncated");
  require_same_grid(a, Field(op.grid()), "solve_truncated");
  start.require_finite("start");
  const double rate = op.rate();
  double sup_abs = 0.0;
  for (double v : a.values()) sup_abs = std::max(sup_abs, std::fabs(v));
  const double k = cfg.k.value_or(1.0 + std::max(2.0 * rate, 4.0 * sup_a_plus + sup_abs));
  if (!(k > 2.0 * rate)) throw std::invalid_argument("k must exceed 2 eps^-m");
  if (!(k >= 4.0 * sup_a_plus + sup_abs)) throw std::invalid_argument("k must be at least 4 sup a+ + sup |a|");

  const std::size_t n = a.size();
  SolveResult out{start, {}};
  StageReport st;
  st.R = op.grid()->radius();
  st.nodes = n;
  {
    const Field r0 = kpp_residual(op, start, a);
    st.start_residual_min = n ? *std::min_element(r0.values().begin(), r0.values().end()) : 0.0;
  }
  Field& u = out.u;
  Field g(op.grid());
  double last_change = std::max(1.0, sup_a_plus);
  // step changes are multiples of an ulp of u: the rate is sampled well above
  // that, and the loop may give up on the tail estimate only near it
  const double ulp = std::numeric_limits<double>::epsilon() * std::max(1.0, sup_a_plus);
  constexpr std::size_t span = 32;
  std::deque<double> changes;
  double q = 0.0;
  if (cfg.keep_history) out.report.history.push_back(u);
  for (int j = 0; j < cfg.max_outer; ++j) {
    for (std::size_t i = 0; i < n; ++i) g[i] = -k * u[i] - u[i] * (a[i] - u[i]);
    const double tol_in = std::max(cfg.tol_inner, 1e-2 * last_change);
    Field next = inner_solve(op, k, g, &u, tol_in, cfg.max_inner, &st.inner_iters);
    double change = 0.0;
    double viol = 0.0;
    double bracket = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = next[i] - u[i];
      change = std::max(change, std::fabs(d));
      viol = std::max(viol, -d);
      bracket = std::max({bracket, start[i] - next[i], next[i] - sup_a_plus});
    }
    st.monotonicity_violation = std::max(st.monotonicity_violation, viol);
    st.bracket_violation = std::max(st.bracket_violation, bracket);
    u = std::move(next);
    ++st.outer_iters;
    if (change > 256.0 * ulp) {
      changes.push_back(change);
      if (changes.size() > span + 1) changes.pop_front();
      if (changes.size() > 1) {
        q = std::pow(changes.back() / changes.front(), 1.0 / static_cast<double>(changes.size() - 1));
      }
    }
    // distance to the limit of a linearly converging sequence: change * q / (1 - q)
    const double tail = q < 1.0 ? change * q / (1.0 - q) : std::numeric_limits<double>::infinity();
    st.error_estimate = tail;
    last_change = change;
    if (cfg.keep_history) out.report.history.push_back(u);
    if (!u.all_finite()) throw std::runtime_error("iterate became non-finite");
    const bool at_floor = change <= 8.0 * ulp;
    if (change < cfg.tol_outer && (tail < cfg.tol_outer || at_floor)) {
      const Field r = kpp_residual(op, u, a);
      st.residual_sup = sup_norm(r);
      if (st.residual_sup <= cfg.tol_outer * (k + 2.0)) {
        st.converged = true;
        st.roundoff_limited = tail >= cfg.tol_outer;
        break;
      }
    }
  }
  if (!st.converged) st.residual_sup = sup_norm(kpp_residual(op, u, a));
  st.final_change = last_change;
  st.positivity_min = n ? *std::min_element(u.values().begin(), u.values().end()) : 0.0;
  auto& rep = out.report;
  rep.stages.push_back(st);
  rep.outer_iters = st.outer_iters;
  rep.residual_sup = st.residual_sup;
  rep.monotonicity_violation = st.monotonicity_violation;
  rep.bracket_violation = st.bracket_violation;
  rep.positivity_min = st.positivity_min;
  rep.k = k;
  rep.h = op.grid()->spacing();
  rep.epsilon = op.epsilon();
  rep.m = op.m();
  rep.converged = st.converged;
  rep.roundoff_limited = st.roundoff_limited;
  return out;
}

double solver_spacing(const KernelProfile& J, const Resource& a, const SolverConfig& cfg) {
  if (cfg.h) return *cfg.h;
  double max_h = std::numeric_limits<double>::infinity();
  if (cfg.start.kind == StartKind::subsolution) max_h = local_radius(a, cfg.start.z, cfg.start.theta) / 16.0;
  return lattice_spacing(J, cfg.epsilon, cfg.spacing_factor, max_h);
}

std::vector<double> solver_schedule(const Resource& a, const SolverConfig& cfg, double h) {
  std::vector<double> s = cfg.R_schedule;
  if (s.empty()) s = {2.0 * a.R_ell(), 4.0 * a.R_ell()};
  for (double& R : s) R = round_up_to_spacing(R, h);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == 0 && s[i] < a.R_ell()) throw std::invalid_argument("R schedule must start at or beyond R_ell");
    if (i > 0 && !(s[i] > s[i - 1])) throw std::invalid_argument("R schedule must be increasing");
  }
  return s;
}

DiscreteKernel solver_kernel(const KernelProfile& J, const Resource& a, const SolverConfig& cfg) {
  const double h = solver_spacing(J, a, cfg);
  std::optional<double> cutoff;
  if (!J.compact()) {
    const auto sched = solver_schedule(a, cfg, h);
    cutoff = cfg.cutoff.value_or(std::max(5.0 * cfg.epsilon, std::min(2.0 * sched.back(), 40.0 * cfg.epsilon)));
  }
  return discretize(J, cfg.epsilon, h, cutoff);
}

Field principal_eigen_start(const NonlocalOperator& op, const Field& a, double sup_a_plus, double* mu_out) {
  const Grid& g = *op.grid();
  const std::size_t n = g.size();
  const double rate = op.rate();
  const DiscreteKernel& dk = op.kernel();
  const int K = dk.half_width;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  double mu = 0.0;
  if (n <= 2048) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < n; ++p) {
      const auto [i, j] = g.index(p);
      for (std::size_t q = 0; q < n; ++q) {
        const auto [i2, j2] = g.index(q);
        const int di = i2 - i;
        const int dj = j2 - j;
        if (std::abs(di) > K || std::abs(dj) > K) continue;
        L(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = rate * (g.dim() == 1 ? dk.at(di) : dk.at(di, dj));
      }
      L(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) += a[p] - rate;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigen solver failed");
    mu = es.eigenvalues()(static_cast<Eigen::Index>(n) - 1);
    v = es.eigenvectors().col(static_cast<Eigen::Index>(n) - 1);
  } else {
    // power iteration on the entrywise nonnegative shift L + s I
    double sup_abs = 0.0;
    for (double x : a.values()) sup_abs = std::max(sup_abs, std::fabs(x));
    const double s = rate + sup_abs;
    Field x(op.grid(), 1.0), y(op.grid());
    for (int it = 0; it < 100000; ++it) {
      op.convolve(x.data(), y.data());
      double norm = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        y[p] = rate * y[p] + (a[p] - rate + s) * x[p];
        norm = std::max(norm, std::fabs(y[p]));
      }
      for (std::size_t p = 0; p < n; ++p) y[p] /= norm;
      const double change = simd::max_abs_diff(x.data(), y.data(), n);
      std::swap(x.values(), y.values());
      if (change < 1e-13) break;
    }
    op.convolve(x.data(), y.data());
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double lx = rate * (y[p] - x[p]) + a[p] * x[p];
      num += x[p] * lx;
      den += x[p] * x[p];
    }
    mu = num / den;
    for (std::size_t p = 0; p < n; ++p) v(static_cast<Eigen::Index>(p)) = x[p];
  }
  if (mu_out) *mu_out = mu;
  Field start(op.grid(), 0.0);
  if (!(mu > 1e-14 * (rate + sup_a_plus))) return start;
  double vmax = 0.0;
  for (std::size_t p = 0; p < n; ++p) vmax = std::max(vmax, std::fabs(v(static_cast<Eigen::Index>(p))));
  const double lambda = 0.5 * std::min(mu, sup_a_plus) / vmax;
  for (std::size_t p = 0; p < n; ++p) start[p] = lambda * std::fabs(v(static_cast<Eigen::Index>(p)));
  return start;
}

SolveResult solve_minimal(const KernelProfile& J, const Resource& a, const SolverConfig& cfg) {
  if (J.dim() != a.dim()) throw std::invalid_argument("kernel and resource dimensions differ");
  if (cfg.m > 0.0 && !std::isfinite(moment(J, cfg.m))) {
    throw std::invalid_argument("the m-th kernel moment is infinite");
  }
  const double h = solver_spacing(J, a, cfg);
  const auto schedule = solver_schedule(a, cfg, h);
  const DiscreteKernel dk = solver_kernel(J, a, cfg);
  const double tol_sub = 1e-8 * a.sup_a_plus();

  SolveResult result;
  SolveReport& rep = result.report;
  rep.start_kind = start_name(cfg.start.kind);
  Field prev;
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    auto grid = Grid::make(J.dim(), schedule[s], h);
    NonlocalOperator op(dk, grid, cfg.m, cfg.mode);
    const Field av = sample(a, grid);
    Field start(grid, 0.0);
    if (s == 0) {
      switch (cfg.start.kind) {
        case StartKind::subsolution: {
          const SubSolution sub = build_subsolution(a, cfg.start.z, cfg.start.theta);
          const double zr = std::hypot(cfg.start.z[0], cfg.start.z[1]);
          if (zr + sub.support_radius() > schedule[0]) {
            throw std::invalid_argument("first R stage does not contain the sub-solution support");
          }
          start = sub.sample(grid);
          break;
        }
        case StartKind::zero: break;
        case StartKind::custom: {
          if (!cfg.start.custom) throw std::invalid_argument("custom start needs a field");
          const Field& c = *cfg.start.custom;
          start = c.grid()->radius() >= grid->radius() ? restrict_to(c, grid) : extend_by_zero(c, grid);
          break;
        }
        case StartKind::eigen: start = principal_eigen_start(op, av, a.sup_a_plus()); break;
      }
    } else {
      start = extend_by_zero(prev, grid);
    }
    SolverConfig stage_cfg = cfg;
    stage_cfg.keep_history = cfg.keep_history && s + 1 == schedule.size();
    SolveResult stage = solve_truncated(op, av, a.sup_a_plus(), start, stage_cfg);
    StageReport st = stage.report.stages.front();
    if (s == 0) {
      rep.certified = cfg.start.kind == StartKind::subsolution && st.start_residual_min >= -tol_sub;
      rep.k = stage.report.k;
    }
    if (s > 0) {
      double window = 0.0;
      double r_viol = 0.0;
      for (std::size_t p = 0; p < prev.size(); ++p) {
        const auto [i, j] = prev.grid()->index(p);
        const auto q = static_cast<std::size_t>(grid->find(i, j));
        r_viol = std::max(r_viol, prev[p] - stage.u[q]);
        if (prev.grid()->norm(p) <= a.R_ell()) window = std::max(window, std::fabs(prev[p] - stage.u[q]));
      }
      rep.R_monotonicity_violation = std::max(rep.R_monotonicity_violation, r_viol);
      rep.window_change = window;
    }
    rep.outer_iters += st.outer_iters;
    rep.monotonicity_violation = std::max(rep.monotonicity_violation, st.monotonicity_violation);
    rep.bracket_violation = std::max(rep.bracket_violation, st.bracket_violation);
    rep.roundoff_limited = rep.roundoff_limited || st.roundoff_limited;
    rep.stages.push_back(st);
    if (stage_cfg.keep_history) rep.history = std::move(stage.report.history);
    prev = std::move(stage.u);
    if (s > 0 && rep.window_change < cfg.tol_R) break;
  }
  const StageReport& last = rep.stages.back();
  rep.residual_sup = last.residual_sup;
  rep.positivity_min = last.positivity_min;
  rep.h = h;
  rep.epsilon = cfg.epsilon;
  rep.m = cfg.m;
  rep.converged = last.converged && (rep.stages.size() == 1 ? schedule.size() == 1 : rep.window_change < cfg.tol_R);
  result.u = std::move(prev);
  return result;
}

MaxPrincipleVerdict check_max_principle(const NonlocalOperator& op, double k, const Field& w, double tol) {
  if (!(k > 0.0)) throw std::invalid_argument("k must be positive");
  const Field mw = op.apply(w);
  MaxPrincipleVerdict v;
  v.min_lhs = std::numeric_limits<double>::infinity();
  v.max_w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    v.min_lhs = std::min(v.min_lhs, mw[i] - k * w[i]);
    v.max_w = std::max(v.max_w, w[i]);
  }
  v.hypothesis = v.min_lhs >= -tol;
  v.conclusion = v.max_w <= tol;
  return v;
}

ComparisonVerdict check_comparison(const NonlocalOperator& op, const Field& a, const Field& u_sub,
                                   const Field& v_super, double tol, double residual_tol) {
  require_same_grid(u_sub, v_super, "check_comparison");
  ComparisonVerdict c;
  const Field ru = kpp_residual(op, u_sub, a);
  const Field rv = kpp_residual(op, v_super, a);
  c.sub_min_residual = *std::min_element(ru.values().begin(), ru.values().end());
  c.super_max_residual = *std::max_element(rv.values().begin(), rv.values().end());
  const double u_min = *std::min_element(u_sub.values().begin(), u_sub.values().end());
  const double v_min = *std::min_element(v_super.values().begin(), v_super.values().end());
  if (u_min < 0.0 || c.sub_min_residual < -residual_tol) {
    c.rejected = true;
    c.reason = "lower field is not a nonnegative sub-solution (min residual " + format_double(c.sub_min_residual) + ")";
  } else if (!(v_min > 0.0) || c.super_max_residual > residual_tol) {
    c.rejected = true;
    c.reason = "upper field is not a positive super-solution (max residual " + format_double(c.super_max_residual) + ")";
  }
  c.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u_sub.size(); ++i) c.max_excess = std::max(c.max_excess, u_sub[i] - v_super[i]);
  c.holds = !c.rejected && c.max_excess <= tol;
  return c;
}

}  // namespace nlkpp
