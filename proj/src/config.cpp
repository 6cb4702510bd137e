#include "nlkpp/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace nlkpp {

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::solve: return "solve";
    case Experiment::sweep: return "sweep";
    case Experiment::barriers: return "barriers";
    case Experiment::moments: return "moments";
    case Experiment::appendix: return "appendix";
  }
  return "?";
}

Experiment parse_experiment(const std::string& s) {
  for (auto e : {Experiment::solve, Experiment::sweep, Experiment::barriers, Experiment::moments,
                 Experiment::appendix}) {
    if (s == experiment_name(e)) return e;
  }
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

namespace {

std::string error_text(const std::string& source, int line, const std::string& key, const std::string& message) {
  std::ostringstream os;
  os << source << ':' << line << ": " << key << ": " << message;
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::string source, int line, std::string key, const std::string& message)
    : std::runtime_error(error_text(source, line, key, message)), line_(line), key_(std::move(key)) {}

namespace {

int line_of(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

// Typed access to one table; remembers which keys were read so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const std::string& source, const toml::table* table, std::string name, int line,
          std::map<std::string, int>& lines)
      : source_(source), table_(table), name_(std::move(name)), line_(line), lines_(lines) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const toml::node* n = table_ ? table_->get(key) : nullptr;
    throw ConfigError(source_, n ? line_of(*n) : line_, qualified(key), message);
  }

  std::optional<double> number(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (!n->is_number()) fail(key, "expected a number");
    return n->value<double>();
  }

  std::optional<int> integer(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) fail(key, "expected an integer");
    const auto v = *n->value<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(key, "integer out of range");
    return static_cast<int>(v);
  }

  std::optional<std::string> string(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) fail(key, "expected a string");
    return n->value<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(*e.value<double>());
    }
    return out;
  }

  /// One or two coordinates; a missing second coordinate is 0.
  std::optional<Point> point(const std::string& key) {
    const auto v = numbers(key);
    if (!v) return std::nullopt;
    if (v->empty() || v->size() > 2) fail(key, "expected one or two coordinates");
    return Point{(*v)[0], v->size() > 1 ? (*v)[1] : 0.0};
  }

  template <class Parse>
  auto choice(const std::string& key, Parse parse) -> std::optional<decltype(parse(std::string{}))> {
    const auto s = string(key);
    if (!s) return std::nullopt;
    try {
      return parse(*s);
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }

  void finish() const {
    if (!table_) return;
    for (auto&& [k, v] : *table_) {
      if (!used_.count(std::string(k.str()))) {
        throw ConfigError(source_, line_of(v), qualified(std::string(k.str())), "unknown key");
      }
    }
  }

 private:
  const toml::node* find(const std::string& key) {
    used_.insert(key);
    if (!table_) return nullptr;
    const toml::node* n = table_->get(key);
    if (n) lines_[qualified(key)] = line_of(*n);
    return n;
  }

  std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  const std::string& source_;
  const toml::table* table_;
  std::string name_;
  int line_;
  std::map<std::string, int>& lines_;
  std::set<std::string> used_;
};

Section section(const std::string& source, const toml::table& root, const std::string& name,
                std::map<std::string, int>& lines) {
  const toml::node* n = root.get(name);
  if (!n) return Section(source, nullptr, name, 1, lines);
  const toml::table* t = n->as_table();
  if (!t) throw ConfigError(source, line_of(*n), name, "expected a table");
  lines[name] = line_of(*n);
  return Section(source, t, name, line_of(*n), lines);
}

template <class T>
void assign(T& dst, const std::optional<T>& v) {
  if (v) dst = *v;
}

void read_kernel(Section s, RunConfig& cfg) {
  auto family = s.choice("family", parse_kernel_family);
  if (!family) s.fail("family", "missing required key");
  if (*family == KernelFamily::custom) s.fail("family", "custom kernels are available from the library only");
  cfg.kernel.family = *family;
  assign(cfg.kernel.params.radius, s.number("radius"));
  assign(cfg.kernel.params.sigma, s.number("sigma"));
  assign(cfg.kernel.params.alpha, s.number("alpha"));
  cfg.kernel.cutoff = s.number("cutoff");
  s.finish();
}

void read_resource(Section s, RunConfig& cfg) {
  auto family = s.choice("family", parse_resource_family);
  if (!family) s.fail("family", "missing required key");
  if (*family == ResourceFamily::custom) s.fail("family", "custom resources are available from the library only");
  cfg.resource.family = *family;
  assign(cfg.resource.params.amplitude, s.number("amplitude"));
  assign(cfg.resource.params.width, s.number("width"));
  assign(cfg.resource.params.offset, s.number("offset"));
  assign(cfg.resource.params.separation, s.number("separation"));
  s.finish();
}

void read_solver(Section s, RunConfig& cfg) {
  SolverConfig& b = cfg.solver.base;
  assign(b.epsilon, s.number("epsilon"));
  assign(b.m, s.number("m"));
  b.k = s.number("k");
  assign(b.tol_inner, s.number("tol_inner"));
  assign(b.tol_outer, s.number("tol_outer"));
  assign(b.tol_R, s.number("tol_R"));
  assign(b.R_schedule, s.numbers("R_schedule"));
  assign(b.max_outer, s.integer("max_outer"));
  assign(b.max_inner, s.integer("max_inner"));
  assign(b.spacing_factor, s.number("spacing_factor"));
  b.h = s.number("h");
  assign(b.mode, s.choice("mode", parse_apply_mode));
  assign(b.start.kind, s.choice("start", parse_start_kind));
  if (b.start.kind == StartKind::custom) s.fail("start", "custom starts are available from the library only");
  assign(b.start.z, s.point("z"));
  assign(b.start.theta, s.number("theta"));
  assign(cfg.solver.eps_list, s.numbers("eps_list"));
  s.finish();
}

void read_barriers(Section s, RunConfig& cfg) {
  auto& b = cfg.barriers;
  assign(b.eps_list, s.numbers("eps_list"));
  assign(b.z, s.point("z"));
  assign(b.theta, s.number("theta"));
  b.beta = s.number("beta");
  b.R_ext = s.number("R_ext");
  assign(b.tol_scale, s.number("tol_scale"));
  s.finish();
}

void read_moments(Section s, RunConfig& cfg) {
  assign(cfg.moments.betas, s.numbers("betas"));
  s.finish();
}

void read_appendix(Section s, RunConfig& cfg) {
  auto& a = cfg.appendix;
  assign(a.m, s.number("m"));
  assign(a.alpha_list, s.numbers("alpha_list"));
  assign(a.eps_list, s.numbers("eps_list"));
  assign(a.z, s.point("z"));
  assign(a.theta, s.number("theta"));
  s.finish();
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source, static_cast<int>(e.source().begin.line), "syntax", std::string(e.description()));
  }
  RunConfig cfg;
  Section top(source, &root, "", 1, cfg.lines);
  cfg.experiment = top.choice("experiment", parse_experiment);
  if (auto dir = top.string("output_dir")) cfg.output_dir = *dir;
  assign(cfg.dim, top.integer("dim"));
  // tables are checked by their readers, scalars here
  for (auto&& [k, v] : root) {
    const std::string key(k.str());
    if (v.is_table()) {
      static const std::set<std::string> tables{"kernel", "resource", "solver", "barriers", "moments", "appendix"};
      if (!tables.count(key)) throw ConfigError(source, line_of(v), key, "unknown section");
    } else if (key != "experiment" && key != "output_dir" && key != "dim") {
      throw ConfigError(source, line_of(v), key, "unknown key");
    }
  }
  if (!root.get("kernel")) throw ConfigError(source, 1, "kernel.family", "missing required key (no [kernel] section)");
  if (!root.get("resource")) {
    throw ConfigError(source, 1, "resource.family", "missing required key (no [resource] section)");
  }
  read_kernel(section(source, root, "kernel", cfg.lines), cfg);
  read_resource(section(source, root, "resource", cfg.lines), cfg);
  read_solver(section(source, root, "solver", cfg.lines), cfg);
  read_barriers(section(source, root, "barriers", cfg.lines), cfg);
  read_moments(section(source, root, "moments", cfg.lines), cfg);
  read_appendix(section(source, root, "appendix", cfg.lines), cfg);
  validate(cfg, source);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(path.string(), 0, "file", "cannot open");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

KernelProfile make_kernel(const RunConfig& cfg) {
  return KernelProfile::make(cfg.kernel.family, cfg.kernel.params, cfg.dim);
}

Resource make_resource(const RunConfig& cfg) {
  return Resource::make(cfg.resource.family, cfg.resource.params, cfg.dim);
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s = cfg.solver.base;
  s.cutoff = cfg.kernel.cutoff;
  return s;
}

void validate(const RunConfig& cfg, const std::string& source) {
  auto fail = [&](const std::string& key, const std::string& message) {
    int line = 0;
    if (auto it = cfg.lines.find(key); it != cfg.lines.end()) {
      line = it->second;
    } else if (auto sec = cfg.lines.find(key.substr(0, key.find('.'))); sec != cfg.lines.end()) {
      line = sec->second;
    }
    throw ConfigError(source, line, key, message);
  };
  auto positive = [&](const std::string& key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be a positive number");
  };
  auto positive_list = [&](const std::string& key, const std::vector<double>& v) {
    for (double x : v) {
      if (!(x > 0.0) || !std::isfinite(x)) fail(key, "entries must be positive numbers");
    }
  };

  if (cfg.dim != 1 && cfg.dim != 2) fail("dim", "must be 1 or 2");

  const auto& kp = cfg.kernel.params;
  positive("kernel.radius", kp.radius);
  positive("kernel.sigma", kp.sigma);
  positive("kernel.alpha", kp.alpha);
  std::optional<KernelProfile> J;
  try {
    J = make_kernel(cfg);
  } catch (const std::exception& e) {
    fail("kernel.family", e.what());
  }
  if (cfg.kernel.cutoff) {
    if (J->compact()) fail("kernel.cutoff", "applies to kernels with unbounded support only");
    positive("kernel.cutoff", *cfg.kernel.cutoff);
  }

  const auto& rp = cfg.resource.params;
  positive("resource.amplitude", rp.amplitude);
  positive("resource.width", rp.width);
  positive("resource.offset", rp.offset);
  positive("resource.separation", rp.separation);
  try {
    (void)make_resource(cfg);
  } catch (const std::exception& e) {
    fail("resource.family", e.what());
  }

  const SolverConfig& s = cfg.solver.base;
  positive("solver.epsilon", s.epsilon);
  if (!(s.m >= 0.0 && s.m < 2.0)) fail("solver.m", "must lie in [0, 2)");
  if (s.m > 0.0 && !std::isfinite(moment(*J, s.m))) {
    fail("solver.m", "the kernel moment of this order is infinite (power_tail needs m < alpha)");
  }
  if (s.k) positive("solver.k", *s.k);
  positive("solver.tol_inner", s.tol_inner);
  positive("solver.tol_outer", s.tol_outer);
  positive("solver.tol_R", s.tol_R);
  positive_list("solver.R_schedule", s.R_schedule);
  for (std::size_t i = 1; i < s.R_schedule.size(); ++i) {
    if (!(s.R_schedule[i] > s.R_schedule[i - 1])) fail("solver.R_schedule", "must be increasing");
  }
  if (s.max_outer < 1) fail("solver.max_outer", "must be at least 1");
  if (s.max_inner < 1) fail("solver.max_inner", "must be at least 1");
  if (!(s.spacing_factor >= 1.0)) fail("solver.spacing_factor", "must be at least 1");
  if (s.h) positive("solver.h", *s.h);
  if (!(s.start.theta > 0.0 && s.start.theta < 1.0)) fail("solver.theta", "must lie in (0, 1)");
  if (cfg.solver.eps_list.empty()) fail("solver.eps_list", "must not be empty");
  positive_list("solver.eps_list", cfg.solver.eps_list);

  const auto& b = cfg.barriers;
  if (b.eps_list.empty()) fail("barriers.eps_list", "must not be empty");
  positive_list("barriers.eps_list", b.eps_list);
  if (!(b.theta > 0.0 && b.theta < 1.0)) fail("barriers.theta", "must lie in (0, 1)");
  if (b.beta) positive("barriers.beta", *b.beta);
  if (b.beta && !std::isfinite(moment(*J, *b.beta))) fail("barriers.beta", "the kernel moment of this order is infinite");
  if (b.R_ext) positive("barriers.R_ext", *b.R_ext);
  positive("barriers.tol_scale", b.tol_scale);

  for (double beta : cfg.moments.betas) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) fail("moments.betas", "entries must be finite and nonnegative");
  }

  const auto& a = cfg.appendix;
  if (!(a.m > 0.0 && a.m < 2.0)) fail("appendix.m", "must lie in (0, 2)");
  if (a.alpha_list.empty()) fail("appendix.alpha_list", "must not be empty");
  positive_list("appendix.alpha_list", a.alpha_list);
  if (a.eps_list.empty()) fail("appendix.eps_list", "must not be empty");
  positive_list("appendix.eps_list", a.eps_list);
  if (!(a.theta > 0.0 && a.theta < 1.0)) fail("appendix.theta", "must lie in (0, 1)");
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? json_number(*v) : Json(nullptr); }

Json list(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

Json point(const Point& p, int dim) { return dim == 1 ? list({p[0]}) : list({p[0], p[1]}); }

}  // namespace

Json to_json(const RunConfig& cfg) {
  Json j;
  j["experiment"] = cfg.experiment ? Json(experiment_name(*cfg.experiment)) : Json(nullptr);
  j["output_dir"] = cfg.output_dir.generic_string();
  j["dim"] = cfg.dim;

  const auto& kp = cfg.kernel.params;
  j["kernel"] = {{"family", family_name(cfg.kernel.family)},
                 {"radius", kp.radius},
                 {"sigma", kp.sigma},
                 {"alpha", kp.alpha},
                 {"cutoff", optional_number(cfg.kernel.cutoff)}};
  if (!cfg.kernel.cutoff) j["kernel"]["cutoff_rule"] = "max(5 eps, min(2 R_last, 40 eps))";

  const auto& rp = cfg.resource.params;
  j["resource"] = {{"family", family_name(cfg.resource.family)},
                   {"amplitude", rp.amplitude},
                   {"width", rp.width},
                   {"offset", rp.offset},
                   {"separation", rp.separation}};

  const SolverConfig& s = cfg.solver.base;
  Json sj;
  sj["epsilon"] = s.epsilon;
  sj["m"] = s.m;
  sj["k"] = optional_number(s.k);
  if (!s.k) sj["k_rule"] = "1 + max(2 eps^-m, 4 sup a+ + sup |a|)";
  sj["tol_inner"] = s.tol_inner;
  sj["tol_outer"] = s.tol_outer;
  sj["tol_R"] = s.tol_R;
  std::vector<double> schedule = s.R_schedule;
  if (schedule.empty()) {
    const double R_ell = make_resource(cfg).R_ell();
    schedule = {2.0 * R_ell, 4.0 * R_ell};
  }
  sj["R_schedule"] = list(schedule);
  sj["max_outer"] = s.max_outer;
  sj["max_inner"] = s.max_inner;
  sj["spacing_factor"] = s.spacing_factor;
  sj["h"] = optional_number(s.h);
  if (!s.h) sj["h_rule"] = "eps/q, q >= spacing_factor, 4 cells per kernel core, sub-solution resolved";
  sj["mode"] = mode_name(s.mode);
  sj["start"] = start_name(s.start.kind);
  sj["z"] = point(s.start.z, cfg.dim);
  sj["theta"] = s.start.theta;
  sj["eps_list"] = list(cfg.solver.eps_list);
  j["solver"] = sj;

  const auto& b = cfg.barriers;
  const KernelProfile J = make_kernel(cfg);
  j["barriers"] = {{"eps_list", list(b.eps_list)},
                   {"z", point(b.z, cfg.dim)},
                   {"theta", b.theta},
                   {"beta", b.beta ? json_number(*b.beta) : json_number(default_beta(J))},
                   {"R_ext", b.R_ext ? json_number(*b.R_ext) : json_number(4.0 * make_resource(cfg).R_ell())},
                   {"tol_scale", b.tol_scale}};
  j["moments"] = {{"betas", list(cfg.moments.betas)}};
  const auto& a = cfg.appendix;
  j["appendix"] = {{"m", a.m},
                   {"alpha_list", list(a.alpha_list)},
                   {"eps_list", list(a.eps_list)},
                   {"z", point(a.z, cfg.dim)},
                   {"theta", a.theta}};
  return j;
}

}  // namespace nlkpp
