#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "nlkpp/config.hpp"
#include "nlkpp/io.hpp"

namespace nlkpp {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: cfg.output_dir
  int threads = 0;                // recorded in the manifest; the caller sets the pool size
  std::optional<std::uint64_t> seed;
};

struct RunSummary {
  int exit_code = 0;  // 0 success, 2 solver failure
  std::string message;
  Json report;
};

/// Writes manifest.json (resolved configuration) before computing anything,
/// then runs the experiment and writes report.json and the CSV outputs:
///   solve     fields/u.csv
///   sweep     results.csv, fields/profiles.csv
///   barriers  fields/subsolution.csv, fields/supersolution.csv, validation.csv
///   moments   results.csv
///   appendix  results.csv, validation.csv
RunSummary run_experiment(Experiment e, const RunConfig& cfg, const RunOptions& opt = {});

}  // namespace nlkpp
