#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlkpp/barriers.hpp"
#include "nlkpp/io.hpp"
#include "nlkpp/kernel.hpp"
#include "nlkpp/resource.hpp"
#include "nlkpp/solver.hpp"

namespace nlkpp {

enum class Experiment { solve, sweep, barriers, moments, appendix };

const char* experiment_name(Experiment e);
/// Throws std::invalid_argument for unknown names.
Experiment parse_experiment(const std::string& s);

/// Parse or validation failure. what() reads "<source>:<line>: <key>: <message>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, std::string key, const std::string& message);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

struct KernelSection {
  KernelFamily family = KernelFamily::uniform_ball;
  KernelParams params;
  std::optional<double> cutoff;  // unbounded kernels: radius of the discrete kernel, at least 5 eps
};

struct ResourceSection {
  ResourceFamily family = ResourceFamily::compact_bump;
  ResourceParams params;
};

struct SolverSection {
  SolverConfig base;             // epsilon, m, tolerances, schedule, start
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};  // sweep
};

struct BarriersSection {
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
  Point z{0.0, 0.0};
  double theta = 0.3;
  std::optional<double> beta;   // default: default_beta(kernel)
  std::optional<double> R_ext;  // default: 4 R_ell
  double tol_scale = 1e-8;
};

struct MomentsSection {
  std::vector<double> betas{0.5, 1.0, 1.5};
};

struct AppendixSection {
  double m = 1.0;
  std::vector<double> alpha_list{0.75, 1.5};
  std::vector<double> eps_list{1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4};
  Point z{0.0, 0.0};
  double theta = 0.9;
};

struct RunConfig {
  std::optional<Experiment> experiment;  // optional in the file; the subcommand decides
  std::filesystem::path output_dir = "out";
  int dim = 1;
  KernelSection kernel;
  ResourceSection resource;
  SolverSection solver;
  BarriersSection barriers;
  MomentsSection moments;
  AppendixSection appendix;
  std::map<std::string, int> lines;  // "section.key" (or "section") -> line in the source file
};

/// Parses and validates. Unknown keys are errors; kernel.family and
/// resource.family are required, everything else has a default.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Cross-field checks (also run by parse_config). `source` only labels errors.
void validate(const RunConfig& cfg, const std::string& source = "<config>");

/// Resolved configuration with every default written out.
Json to_json(const RunConfig& cfg);

KernelProfile make_kernel(const RunConfig& cfg);
Resource make_resource(const RunConfig& cfg);

/// Solver configuration with the kernel cutoff applied.
SolverConfig solver_config(const RunConfig& cfg);

}  // namespace nlkpp
