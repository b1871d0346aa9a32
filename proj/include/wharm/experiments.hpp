#pragma once

/// Experiment configuration and pipelines behind the command-line tool.
///
/// Config format: flat "key = value" lines, '#' comments. Documented keys and
/// defaults are listed by config_keys(); data.<param> keys are passed to the
/// boundary-data generator and validated against it.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wharm/generators.hpp"
#include "wharm/smalldata.hpp"

namespace wharm {

enum class ExitCode : int { Success = 0, NonConvergence = 2, ConstraintViolation = 3, InvalidConfig = 4 };

struct ExperimentConfig {
  std::string mode = "halfspace-small-data";  // | box-perturbation | norms-only
  int grid_n = 65;
  double grid_L = 4.0;
  double grid_H = 8.0;
  double grid_sigma = 0.0;  // 0: refinement_sigma(n)
  int box_d = 3;
  int box_n = 17;
  std::string box_base = "constant";  // | flow
  double box_base_amplitude = 1.0;
  TargetOptions target;
  std::string generator = "geodesic_cap";
  GeneratorParams data = generator_defaults("geodesic_cap");
  SolverOptions solver;
  double subharmonic_tolerance = 1e-6;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;

  bool operator==(const ExperimentConfig& o) const;
};

// Documented keys in canonical order.
const std::vector<std::string>& config_keys();

// Throws InvalidConfig; messages name the offending key.
ExperimentConfig parse_config(const std::string& text);
// Canonical text: every documented key, then data.<param> keys, sorted.
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

GridPtr make_halfspace_grid(const ExperimentConfig& cfg);
TargetManifold make_target(const ExperimentConfig& cfg);

// Pipelines write their artifacts under out and return the exit code.
ExitCode run_extend(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExitCode run_solve(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExitCode run_norms(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExitCode run_perturb(const ExperimentConfig& cfg, const std::filesystem::path& out);
// Dispatches on cfg.mode.
ExitCode run(const ExperimentConfig& cfg, const std::filesystem::path& out);
// Checks the constraint of a stored field against the configured target.
ExitCode run_verify(const ExperimentConfig& cfg, const std::filesystem::path& field,
                    const std::filesystem::path& out);
// One run per amplitude under out/run_<k>; writes out/sweep.csv.
ExitCode run_sweep(const ExperimentConfig& cfg, const std::vector<double>& amplitudes,
                   const std::filesystem::path& out);

// Column order of the consolidated table.
const std::vector<std::string>& export_columns();
// One row per run directory (dir itself or its subdirectories) holding a
// summary.txt, sorted by amplitude then directory name. Throws MissingArtifacts.
std::string export_results(const std::filesystem::path& dir);

}  // namespace wharm
