#include <doctest.h>

#include <string>

#include "nlkpp/config.hpp"

using namespace nlkpp;

namespace {

const char* kFull = R"(# sweep over four eps
experiment = "sweep"
output_dir = "runs/a"
dim = 1

[kernel]
family = "uniform_ball"
radius = 1.0

[resource]
family = "compact_bump"
amplitude = 1
width = 3.0
offset = 0.5

[solver]
m = 1.0
epsilon = 0.2
eps_list = [0.4, 0.2, 0.1, 0.05]
R_schedule = [5.0]
tol_outer = 1e-13
start = "subsolution"
z = [0.25]
theta = 0.9
mode = "direct"
)";

std::string minimal(const std::string& extra = "") {
  return "[kernel]\nfamily = \"uniform_ball\"\n[resource]\nfamily = \"compact_bump\"\n" + extra;
}

ConfigError error_of(const std::string& text) {
  try {
    parse_config(text, "t.toml");
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a config error");
  throw;
}

}  // namespace

TEST_CASE("full configuration parses") {
  const RunConfig c = parse_config(kFull, "t.toml");
  REQUIRE(c.experiment.has_value());
  CHECK(*c.experiment == Experiment::sweep);
  CHECK(c.output_dir == "runs/a");
  CHECK(c.dim == 1);
  CHECK(c.kernel.family == KernelFamily::uniform_ball);
  CHECK(c.resource.params.amplitude == 1.0);
  CHECK(c.resource.params.width == 3.0);
  CHECK(c.solver.base.m == 1.0);
  CHECK(c.solver.base.epsilon == 0.2);
  CHECK(c.solver.eps_list == std::vector<double>{0.4, 0.2, 0.1, 0.05});
  CHECK(c.solver.base.R_schedule == std::vector<double>{5.0});
  CHECK(c.solver.base.tol_outer == 1e-13);
  CHECK(c.solver.base.start.z[0] == 0.25);
  CHECK(c.solver.base.start.z[1] == 0.0);
  CHECK(c.solver.base.start.theta == 0.9);
  CHECK(c.solver.base.mode == ApplyMode::direct);
  CHECK(c.lines.at("solver.epsilon") == 18);
}

TEST_CASE("defaults fill everything but the families") {
  const RunConfig c = parse_config(minimal());
  const SolverConfig d;
  CHECK_FALSE(c.experiment.has_value());
  CHECK(c.output_dir == "out");
  CHECK(c.solver.base.tol_outer == d.tol_outer);
  CHECK(c.solver.base.tol_inner == d.tol_inner);
  CHECK(c.solver.base.epsilon == d.epsilon);
  CHECK_FALSE(c.solver.base.k.has_value());
  CHECK(c.barriers.theta == 0.3);
  CHECK(c.appendix.alpha_list == std::vector<double>{0.75, 1.5});
}

TEST_CASE("missing kernel family names the key") {
  const auto e = error_of("[kernel]\nradius = 2.0\n[resource]\nfamily = \"compact_bump\"\n");
  CHECK(e.key() == "kernel.family");
  CHECK(e.line() == 1);
  CHECK(std::string(e.what()).find("kernel.family") != std::string::npos);
  CHECK(std::string(e.what()).find("t.toml:1:") == 0);
  const auto e2 = error_of("[resource]\nfamily = \"compact_bump\"\n");
  CHECK(e2.key() == "kernel.family");
  const auto e3 = error_of("[kernel]\nfamily = \"uniform_ball\"\n");
  CHECK(e3.key() == "resource.family");
}

TEST_CASE("errors are anchored to the offending line") {
  auto e = error_of(minimal("[solver]\nepsilon = 0.1\nepsilom = 0.2\n"));
  CHECK(e.key() == "solver.epsilom");
  CHECK(e.line() == 7);
  CHECK(std::string(e.what()).find("unknown key") != std::string::npos);

  e = error_of(minimal("[solver]\nepsilon = \"small\"\n"));
  CHECK(e.key() == "solver.epsilon");
  CHECK(e.line() == 6);

  e = error_of(minimal("[solver]\n\nepsilon = -0.1\n"));
  CHECK(e.key() == "solver.epsilon");
  CHECK(e.line() == 7);

  e = error_of(minimal("[solver]\nm = 2.5\n"));
  CHECK(e.key() == "solver.m");
  CHECK(e.line() == 6);

  e = error_of(minimal("[solver]\nR_schedule = [4.0, 3.0]\n"));
  CHECK(e.key() == "solver.R_schedule");

  e = error_of(minimal("[solver]\nmax_outer = 1.5\n"));
  CHECK(e.key() == "solver.max_outer");

  e = error_of(minimal("[solver]\nz = [1.0, 2.0, 3.0]\n"));
  CHECK(e.key() == "solver.z");

  e = error_of(minimal("[solver]\nmode = \"gpu\"\n"));
  CHECK(e.key() == "solver.mode");
  CHECK(e.line() == 6);

  e = error_of(minimal("[output]\ndir = \"x\"\n"));
  CHECK(e.key() == "output");
  CHECK(e.line() == 5);

  e = error_of(minimal("colour = 3\n"));
  CHECK(e.key() == "resource.colour");

  e = error_of("dim = 3\n" + minimal());
  CHECK(e.key() == "dim");
  CHECK(e.line() == 1);
}

TEST_CASE("syntax errors carry the line") {
  const auto e = error_of(minimal("[solver]\nepsilon = = 0.1\n"));
  CHECK(e.key() == "syntax");
  CHECK(e.line() == 6);
}

TEST_CASE("moment finiteness is checked for fat tails") {
  const std::string base = "[kernel]\nfamily = \"power_tail\"\nalpha = 0.75\n[resource]\nfamily = \"compact_bump\"\n";
  const auto e = error_of(base + "[solver]\nm = 1.0\n");
  CHECK(e.key() == "solver.m");
  CHECK(e.line() == 7);
  CHECK_NOTHROW(parse_config(base + "[solver]\nm = 0.5\n"));
  CHECK_NOTHROW(parse_config(base + "[solver]\nm = 0.0\n"));
  const auto eb = error_of(base + "[solver]\nm = 0.5\n[barriers]\nbeta = 1.0\n");
  CHECK(eb.key() == "barriers.beta");
}

TEST_CASE("cutoff only for unbounded kernels") {
  auto e = error_of("[kernel]\nfamily = \"uniform_ball\"\ncutoff = 3.0\n[resource]\nfamily = \"compact_bump\"\n");
  CHECK(e.key() == "kernel.cutoff");
  CHECK(e.line() == 3);
  const RunConfig c =
      parse_config("[kernel]\nfamily = \"gaussian\"\ncutoff = 3.0\n[resource]\nfamily = \"compact_bump\"\n");
  REQUIRE(solver_config(c).cutoff.has_value());
  CHECK(*solver_config(c).cutoff == 3.0);
}

TEST_CASE("library-only families are rejected") {
  CHECK(error_of("[kernel]\nfamily = \"custom\"\n[resource]\nfamily = \"compact_bump\"\n").key() == "kernel.family");
  CHECK(error_of("[kernel]\nfamily = \"bessel\"\n[resource]\nfamily = \"compact_bump\"\n").key() == "kernel.family");
  CHECK(error_of(minimal("[solver]\nstart = \"custom\"\n")).key() == "solver.start");
}

TEST_CASE("experiment names round-trip") {
  for (auto e : {Experiment::solve, Experiment::sweep, Experiment::barriers, Experiment::moments,
                 Experiment::appendix}) {
    CHECK(parse_experiment(experiment_name(e)) == e);
  }
  CHECK_THROWS_AS(parse_experiment("plot"), std::invalid_argument);
  CHECK(error_of("experiment = \"plot\"\n" + minimal()).key() == "experiment");
}

TEST_CASE("resolved json writes every default") {
  const RunConfig c = parse_config(minimal());
  const Json j = to_json(c);
  CHECK(j["solver"]["tol_outer"].get<double>() == SolverConfig{}.tol_outer);
  CHECK(j["solver"]["k"].is_null());
  CHECK(j["solver"].contains("k_rule"));
  const double R_ell = make_resource(c).R_ell();
  CHECK(j["solver"]["R_schedule"] == Json::array({2.0 * R_ell, 4.0 * R_ell}));
  CHECK(j["barriers"]["beta"].get<double>() == 2.0);
  CHECK(j["barriers"]["R_ext"].get<double>() == 4.0 * R_ell);
  CHECK(j["kernel"]["family"] == "uniform_ball");
  CHECK(j["solver"]["z"] == Json::array({0.0}));
  // stable key order
  CHECK(j.dump() == to_json(parse_config(minimal())).dump());
  auto it = j.begin();
  CHECK(it.key() == "experiment");
}
