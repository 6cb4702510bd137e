// nlkpp: runs solver experiments from a TOML configuration.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlkpp/config.hpp"
#include "nlkpp/experiments.hpp"
#include "nlkpp/parallel.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kSolverFailure = 2;
constexpr int kUsage = 64;

struct Flags {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "TOML configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (default: output_dir from the config, else ./out)");
  cmd->add_option("--threads", f.threads,
                  "worker threads; 0 falls back to NONLOCAL_KPP_THREADS, then to all cores (default 0)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "seed recorded in the manifest (randomized tests only)");
}

}  // namespace

int main(int argc, char** argv) {
  using nlkpp::Experiment;
  CLI::App app{"Stationary solutions of the nonlocal KPP equation on truncated balls", "nlkpp"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<Experiment, const char*> commands[] = {
      {Experiment::solve, "minimal solution for one eps: fields/u.csv, report.json"},
      {Experiment::sweep, "eps sweep: results.csv (one row per eps), fields/profiles.csv"},
      {Experiment::barriers, "sub- and super-solution fields, validation.csv"},
      {Experiment::moments, "kernel moments M_beta for the configured betas: results.csv"},
      {Experiment::appendix, "moment sharpness for fat-tailed kernels: results.csv, validation.csv"},
  };
  std::optional<Experiment> chosen;
  for (const auto& [e, help] : commands) {
    CLI::App* cmd = app.add_subcommand(nlkpp::experiment_name(e), help);
    add_flags(cmd, flags);
    cmd->callback([&chosen, e = e] { chosen = e; });
  }

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto& c : commands) known = known || std::string(argv[1]) == nlkpp::experiment_name(c.first);
    if (!known) {
      std::cerr << "nlkpp: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
      return kUsage;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  int threads = flags.threads > 0 ? flags.threads : nlkpp::thread_count_from_env();
  if (threads > 0) nlkpp::set_thread_count(threads);

  nlkpp::RunConfig cfg;
  try {
    cfg = nlkpp::load_config(flags.config);
    if (cfg.experiment && *cfg.experiment != *chosen) {
      throw nlkpp::ConfigError(flags.config, cfg.lines.count("experiment") ? cfg.lines.at("experiment") : 0,
                               "experiment",
                               std::string("names '") + nlkpp::experiment_name(*cfg.experiment) +
                                   "' but the subcommand is '" + nlkpp::experiment_name(*chosen) + "'");
    }
  } catch (const nlkpp::ConfigError& e) {
    std::cerr << "nlkpp: config error: " << e.what() << '\n';
    return kConfigError;
  }

  nlkpp::RunOptions opt;
  opt.out_dir = flags.out;
  opt.threads = threads;
  opt.seed = flags.seed;
  try {
    const auto summary = nlkpp::run_experiment(*chosen, cfg, opt);
    if (summary.exit_code != 0) {
      std::cerr << "nlkpp: " << summary.message << '\n';
      return summary.exit_code;
    }
  } catch (const std::invalid_argument& e) {
    // the library rejects parameter combinations the config checks cannot see
    std::cerr << "nlkpp: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "nlkpp: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
