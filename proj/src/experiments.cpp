#include "nlkpp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "nlkpp/analysis.hpp"
#include "nlkpp/barriers.hpp"
#include "nlkpp/nonlocal_op.hpp"
#include "nlkpp/solver.hpp"

namespace nlkpp {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> coordinate_header(int dim) {
  return dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
}

/// Columns x[,y] followed by one column per field; all fields share a grid.
CsvWriter field_table(const std::vector<std::pair<std::string, const Field*>>& columns) {
  const GridPtr& g = columns.front().second->grid();
  auto header = coordinate_header(g->dim());
  for (const auto& c : columns) header.push_back(c.first);
  CsvWriter csv(header);
  std::vector<double> row;
  for (std::size_t n = 0; n < g->size(); ++n) {
    const auto x = g->point(n);
    row.assign(x.begin(), x.begin() + g->dim());
    for (const auto& c : columns) row.push_back((*c.second)[n]);
    csv.row(row);
  }
  return csv;
}

Json stage_json(const StageReport& s) {
  return {{"R", s.R},
          {"nodes", s.nodes},
          {"outer_iters", s.outer_iters},
          {"inner_iters", s.inner_iters},
          {"residual_sup", json_number(s.residual_sup)},
          {"monotonicity_violation", json_number(s.monotonicity_violation)},
          {"bracket_violation", json_number(s.bracket_violation)},
          {"positivity_min", json_number(s.positivity_min)},
          {"start_residual_min", json_number(s.start_residual_min)},
          {"final_change", json_number(s.final_change)},
          {"error_estimate", json_number(s.error_estimate)},
          {"roundoff_limited", s.roundoff_limited},
          {"converged", s.converged}};
}

Json solve_report_json(const SolveReport& r) {
  Json stages = Json::array();
  for (const auto& s : r.stages) stages.push_back(stage_json(s));
  return {{"converged", r.converged},
          {"certified", r.certified},
          {"roundoff_limited", r.roundoff_limited},
          {"start", r.start_kind},
          {"epsilon", r.epsilon},
          {"m", r.m},
          {"k", r.k},
          {"h", r.h},
          {"outer_iters", r.outer_iters},
          {"residual_sup", json_number(r.residual_sup)},
          {"monotonicity_violation", json_number(r.monotonicity_violation)},
          {"bracket_violation", json_number(r.bracket_violation)},
          {"positivity_min", json_number(r.positivity_min)},
          {"R_monotonicity_violation", json_number(r.R_monotonicity_violation)},
          {"window_change", json_number(r.window_change)},
          {"stages", stages}};
}

Json validation_json(const SubValidation& v) {
  Json entries = Json::array();
  for (const auto& e : v.entries) {
    entries.push_back({{"eps", e.eps},
                       {"h", e.h},
                       {"nodes", e.nodes},
                       {"min_residual", json_number(e.min_residual)},
                       {"predicted_slack", json_number(e.predicted_slack)},
                       {"passed", e.passed}});
  }
  return {{"tol", v.tol}, {"threshold", v.threshold}, {"entries", entries}};
}

Json sub_spec_json(const SubSolutionSpec& s) {
  return {{"z", s.dim == 1 ? Json::array({s.z[0]}) : Json::array({s.z[0], s.z[1]})},
          {"theta", s.theta},
          {"R_loc", s.R_loc},
          {"kappa", s.kappa},
          {"C_kappa", s.C_kappa},
          {"a_plus_z", s.a_plus_z},
          {"plateau", s.plateau},
          {"support_radius", 1.5 * s.R_loc}};
}

Json super_spec_json(const SuperSolutionSpec& s) {
  return {{"found", s.found},
          {"beta", s.beta},
          {"tau", s.tau},
          {"R_sup", s.R_sup},
          {"C_tauR", s.C_tauR},
          {"ell", s.ell},
          {"sup_a_plus", s.sup_a_plus},
          {"epsilon", s.epsilon},
          {"m", s.m},
          {"R_ext", s.R_ext},
          {"attempts", s.attempts},
          {"eval_points", s.eval_points},
          {"max_residual", json_number(s.max_residual)},
          {"max_outer_ratio", json_number(s.max_outer_ratio)},
          {"min_margin_over_a_plus", json_number(s.min_margin_over_a_plus)}};
}

std::string solve_failure(const SolveReport& r, double tol_R) {
  for (const auto& st : r.stages) {
    if (!st.converged) return "outer iteration did not converge on the ball of radius " + format_double(st.R);
  }
  return "R schedule exhausted: change on the R_ell window is " + format_double(r.window_change) +
         ", above tol_R = " + format_double(tol_R) + "; extend R_schedule or raise tol_R";
}

RunSummary run_solve(const RunConfig& cfg, const fs::path& dir) {
  const KernelProfile J = make_kernel(cfg);
  const Resource a = make_resource(cfg);
  const SolverConfig s = solver_config(cfg);
  SolveResult res = solve_minimal(J, a, s);
  const Field& u = res.u;
  const GridPtr& g = u.grid();
  const NonlocalOperator op(solver_kernel(J, a, s), g, s.m, s.mode);
  const Field av = sample(a, g);
  const MassBalance mb = mass_residual(op, u, av);

  field_table({{"u", &u}, {"a", &av}}).save(dir / "fields" / "u.csv");

  RunSummary out;
  const double bound = s.tol_outer * (res.report.k + 2.0);
  out.report = {{"experiment", "solve"},
                {"nodes", u.size()},
                {"R", g->radius()},
                {"residual_bound", bound},
                {"residual_below_bound", res.report.residual_sup <= bound},
                {"mass", integrate(u)},
                {"bbm_energy", bbm_energy(op, u)},
                {"reaction", mb.reaction},
                {"leakage", mb.leakage},
                {"reaction_l1", mb.scale},
                {"solver", solve_report_json(res.report)}};
  if (!res.report.converged) {
    out.exit_code = 2;
    out.message = solve_failure(res.report, s.tol_R);
  }
  return out;
}

RunSummary run_sweep(const RunConfig& cfg, const fs::path& dir) {
  const KernelProfile J = make_kernel(cfg);
  const Resource a = make_resource(cfg);
  const SolverConfig s = solver_config(cfg);
  SweepOptions so;
  so.keep_fields = true;
  const SweepResult sw = sweep_epsilon(J, a, s.m, cfg.solver.eps_list, s, so);

  CsvWriter results({"eps", "h", "nodes", "deficit", "excess", "bbm", "reaction", "leakage", "reaction_l1", "mass",
                     "boundary_sup", "lower_bound_gap", "upper_excess", "positivity_min", "identically_zero",
                     "certified", "converged", "roundoff_limited", "outer_iters", "residual_sup", "error"});
  auto profile_header = std::vector<std::string>{"eps"};
  for (const auto& c : coordinate_header(cfg.dim)) profile_header.push_back(c);
  profile_header.push_back("u");
  profile_header.push_back("a_plus");
  CsvWriter profiles(profile_header);

  Json entries = Json::array();
  bool failed = false;
  for (const auto& e : sw.entries) {
    const bool ok = e.error.empty();
    failed = failed || !ok;
    results.row(std::vector<std::string>{
        format_double(e.eps), format_double(e.h), std::to_string(e.nodes), format_double(e.deficit),
        format_double(e.excess), format_double(e.bbm), format_double(e.reaction), format_double(e.leakage),
        format_double(e.reaction_l1), format_double(e.mass), format_double(e.boundary_sup),
        format_double(e.lower_bound_gap), format_double(e.upper_excess), format_double(e.positivity_min),
        e.identically_zero ? "1" : "0", e.certified ? "1" : "0", e.report.converged ? "1" : "0",
        e.report.roundoff_limited ? "1" : "0", std::to_string(e.report.outer_iters),
        format_double(e.report.residual_sup), e.error});
    if (e.u) {
      const GridPtr& g = e.u->grid();
      for (std::size_t n = 0; n < g->size(); ++n) {
        const auto x = g->point(n);
        std::vector<double> row{e.eps};
        row.insert(row.end(), x.begin(), x.begin() + cfg.dim);
        row.push_back((*e.u)[n]);
        row.push_back(a.plus(x));
        profiles.row(row);
      }
    }
    entries.push_back({{"eps", e.eps},
                       {"deficit", json_number(e.deficit)},
                       {"excess", json_number(e.excess)},
                       {"bbm", json_number(e.bbm)},
                       {"reaction_l1", json_number(e.reaction_l1)},
                       {"boundary_sup", json_number(e.boundary_sup)},
                       {"error", e.error},
                       {"solver", solve_report_json(e.report)}});
  }
  results.save(dir / "results.csv");
  profiles.save(dir / "fields" / "profiles.csv");

  bool strictly_decreasing = true;
  bool l1_decreasing = true;
  double bbm_min = std::numeric_limits<double>::infinity();
  double bbm_max = 0.0;
  for (std::size_t i = 0; i < sw.entries.size(); ++i) {
    const auto& e = sw.entries[i];
    bbm_min = std::min(bbm_min, e.bbm);
    bbm_max = std::max(bbm_max, e.bbm);
    if (i == 0) continue;
    const auto& p = sw.entries[i - 1];
    strictly_decreasing = strictly_decreasing && e.deficit < p.deficit;
    l1_decreasing = l1_decreasing && e.reaction_l1 < p.reaction_l1;
  }
  RunSummary out;
  out.report = {{"experiment", "sweep"},
                {"R", sw.R},
                {"m", s.m},
                {"sup_a_plus", a.sup_a_plus()},
                {"collar_cells", so.collar_cells},
                {"deficit_strictly_decreasing", strictly_decreasing},
                {"reaction_l1_decreasing", l1_decreasing},
                {"bbm_max_over_min", json_number(bbm_max / bbm_min)},
                {"entries", entries}};
  if (failed) {
    out.exit_code = 2;
    out.message = "at least one eps failed; see results.csv";
  }
  return out;
}

RunSummary run_barriers(const RunConfig& cfg, const fs::path& dir) {
  const KernelProfile J = make_kernel(cfg);
  const Resource a = make_resource(cfg);
  const SolverConfig s = solver_config(cfg);
  const auto& b = cfg.barriers;

  const SubSolution sub = build_subsolution(a, b.z, b.theta);
  ValidationOptions vo;
  vo.spacing_factor = s.spacing_factor;
  vo.tol_scale = b.tol_scale;
  vo.mode = s.mode;
  const SubValidation val = validate_subsolution(sub, a, J, s.m, b.eps_list, vo);
  {
    const double R_loc = sub.spec().R_loc;
    const double hs = R_loc / 32.0;
    const double reach = std::hypot(b.z[0], b.z[1]) + sub.support_radius();
    const GridPtr g = Grid::make(cfg.dim, round_up_to_spacing(reach, hs), hs);
    const Field f = sub.sample(g);
    field_table({{"u_sub", &f}}).save(dir / "fields" / "subsolution.csv");
  }
  CsvWriter vcsv({"eps", "h", "nodes", "min_residual", "predicted_slack", "passed"});
  for (const auto& e : val.entries) {
    vcsv.row(std::vector<std::string>{format_double(e.eps), format_double(e.h), std::to_string(e.nodes),
                                      format_double(e.min_residual), format_double(e.predicted_slack),
                                      e.passed ? "1" : "0"});
  }
  vcsv.save(dir / "validation.csv");

  const double beta = b.beta.value_or(default_beta(J));
  const double R_ext = b.R_ext.value_or(4.0 * a.R_ell());
  const double h = lattice_spacing(J, s.epsilon, s.spacing_factor);
  std::optional<double> cutoff;
  if (!J.compact()) cutoff = s.cutoff.value_or(std::max(5.0 * s.epsilon, std::min(2.0 * R_ext, 40.0 * s.epsilon)));
  const DiscreteKernel K = discretize(J, s.epsilon, h, cutoff);
  SuperSearchOptions so;
  so.tol_scale = b.tol_scale;
  const SuperSolution sup = build_supersolution(a, J, K, s.m, beta, R_ext, so);
  {
    const GridPtr g = Grid::make(cfg.dim, round_up_to_spacing(R_ext, h), h);
    const Field f = sup.sample(g);
    const Field ap = sample_plus(a, g);
    field_table({{"u_super", &f}, {"a_plus", &ap}}).save(dir / "fields" / "supersolution.csv");
  }

  RunSummary out;
  out.report = {{"experiment", "barriers"},
                {"m", s.m},
                {"subsolution", sub_spec_json(sub.spec())},
                {"validation", validation_json(val)},
                {"supersolution", super_spec_json(sup.spec())}};
  if (!sup.spec().found) {
    out.exit_code = 2;
    out.message = "super-solution search exhausted its schedule";
  }
  return out;
}

RunSummary run_moments(const RunConfig& cfg, const fs::path& dir) {
  const KernelProfile J = make_kernel(cfg);
  CsvWriter csv({"beta", "moment"});
  Json rows = Json::array();
  for (double beta : cfg.moments.betas) {
    const double M = moment(J, beta);
    csv.row(std::vector<double>{beta, M});
    rows.push_back({{"beta", beta}, {"moment", json_number(M)}, {"finite", std::isfinite(M)}});
  }
  csv.save(dir / "results.csv");
  RunSummary out;
  out.report = {{"experiment", "moments"},
                {"kernel", family_name(J.family())},
                {"divergence_order", json_number(J.divergence_order())},
                {"moments", rows}};
  return out;
}

RunSummary run_appendix(const RunConfig& cfg, const fs::path& dir) {
  const Resource a = make_resource(cfg);
  const auto& ap = cfg.appendix;
  SharpnessOptions so;
  so.theta = ap.theta;
  so.z = ap.z;
  so.validation.spacing_factor = cfg.solver.base.spacing_factor;
  so.validation.mode = cfg.solver.base.mode;
  const auto entries = moment_sharpness_experiment(ap.m, ap.alpha_list, ap.eps_list, a, so);

  CsvWriter csv({"alpha", "beta", "cutoff", "value"});
  CsvWriter vcsv({"alpha", "eps", "h", "nodes", "min_residual", "passed"});
  Json list = Json::array();
  for (const auto& e : entries) {
    for (const auto& r : e.rows) csv.row(std::vector<double>{e.alpha, r.beta, r.cutoff, r.value});
    for (const auto& v : e.validation.entries) {
      vcsv.row(std::vector<std::string>{format_double(e.alpha), format_double(v.eps), format_double(v.h),
                                        std::to_string(v.nodes), format_double(v.min_residual),
                                        v.passed ? "1" : "0"});
    }
    const bool bounded = std::all_of(e.ratios.begin(), e.ratios.end(), [](double r) { return r <= 2.0; });
    const bool growing = std::all_of(e.ratios.begin(), e.ratios.end(), [](double r) { return r > 2.0; });
    const bool fails_small_eps = std::all_of(e.validation.entries.begin(), e.validation.entries.end(),
                                             [](const SubValidationEntry& v) { return v.eps > 1e-2 || v.min_residual < 0.0; });
    Json ratios = Json::array();
    for (double r : e.ratios) ratios.push_back(json_number(r));
    list.push_back({{"alpha", e.alpha},
                    {"ratios", ratios},
                    {"bounded", bounded},
                    {"growing", growing},
                    {"negative_residual_at_small_eps", fails_small_eps},
                    {"validation", validation_json(e.validation)}});
  }
  csv.save(dir / "results.csv");
  vcsv.save(dir / "validation.csv");
  RunSummary out;
  out.report = {{"experiment", "appendix"}, {"m", ap.m}, {"kernels", list}};
  return out;
}

}  // namespace

RunSummary run_experiment(Experiment e, const RunConfig& cfg, const RunOptions& opt) {
  const fs::path dir = opt.out_dir.empty() ? cfg.output_dir : opt.out_dir;
  fs::create_directories(dir);
  RunConfig resolved = cfg;
  resolved.experiment = e;
  resolved.output_dir = dir;
  Json manifest;
  manifest["program"] = "nlkpp";
  manifest["experiment"] = experiment_name(e);
  manifest["threads"] = opt.threads;
  manifest["seed"] = opt.seed ? Json(*opt.seed) : Json(nullptr);
  manifest["config"] = to_json(resolved);
  write_json(dir / "manifest.json", manifest);

  RunSummary out;
  switch (e) {
    case Experiment::solve: out = run_solve(cfg, dir); break;
    case Experiment::sweep: out = run_sweep(cfg, dir); break;
    case Experiment::barriers: out = run_barriers(cfg, dir); break;
    case Experiment::moments: out = run_moments(cfg, dir); break;
    case Experiment::appendix: out = run_appendix(cfg, dir); break;
  }
  out.report["exit_code"] = out.exit_code;
  if (!out.message.empty()) out.report["message"] = out.message;
  write_json(dir / "report.json", out.report);
  return out;
}

}  // namespace nlkpp
