// Command-line driver: extend, solve, perturb, norms, verify, sweep, export.
//
// Exit codes: 0 success, 2 non-convergence, 3 constraint violation,
// 4 invalid configuration (or unusable arguments).

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <iostream>

#include "wharm/error.hpp"
#include "wharm/experiments.hpp"
#include "wharm/io.hpp"
#include "wharm/simd.hpp"

namespace fs = std::filesystem;
using namespace wharm;

namespace {

struct Common {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool need_config) {
  auto* opt = sub->add_option("--config", c.config, "Configuration file (key = value)");
  if (need_config) opt->required();
  sub->add_option("--out", c.out, "Output directory (overrides output.dir)");
  sub->add_option("--seed", c.seed, "Seed for randomized audits (overrides seed)");
  sub->add_option("--threads", c.threads, "Worker threads (overrides threads)")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (c.threads > 0) cfg.threads = c.threads;
  return cfg;
}

int code_for(ErrorCode e) {
  switch (e) {
    case ErrorCode::NonContraction:
    case ErrorCode::MaxIterations:
    case ErrorCode::SingularOperator:
    case ErrorCode::SolverFailure:
    case ErrorCode::NewtonDivergence:
      return 2;
    case ErrorCode::OutsideTube:
      return 3;
    default:
      return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic-map solvers on the half-space and the unit box"};
  app.require_subcommand(1);
  Common c;
  std::string field, dir, csv_out;
  std::vector<double> amplitudes = {0.05, 0.1, 0.2, 0.4};

  auto* extend = app.add_subcommand("extend", "Poisson extension of the configured boundary data");
  add_common(extend, c, true);
  auto* solve = app.add_subcommand("solve", "Small-data Picard solve on the half-space");
  add_common(solve, c, true);
  auto* perturb = app.add_subcommand("perturb", "Perturbation solve around a base map on the box");
  add_common(perturb, c, true);
  auto* norms = app.add_subcommand("norms", "X-norm of the extension and BMO norm of the data");
  add_common(norms, c, true);
  auto* verify = app.add_subcommand("verify", "Constraint check of a stored field");
  add_common(verify, c, false);
  verify->add_option("--field", field, "Field file to check")->required();
  auto* sweep = app.add_subcommand("sweep", "Amplitude sweep, one run directory per amplitude");
  add_common(sweep, c, true);
  sweep->add_option("--amplitudes", amplitudes, "Amplitudes to run")->delimiter(',');
  auto* exp = app.add_subcommand("export", "Consolidated CSV of all runs below a directory");
  exp->add_option("--dir", dir, "Run directory")->required();
  exp->add_option("--csv", csv_out, "Write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    if (exp->parsed()) {
      const std::string table = export_results(dir);
      if (csv_out.empty())
        std::cout << table;
      else
        write_text(csv_out, table);
      return 0;
    }
    const ExperimentConfig cfg = resolve(c);
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    write_text(out / "config.txt", serialize_config(cfg));
    ExitCode code = ExitCode::Success;
    if (extend->parsed()) code = run_extend(cfg, out);
    else if (solve->parsed()) code = run_solve(cfg, out);
    else if (perturb->parsed()) code = run_perturb(cfg, out);
    else if (norms->parsed()) code = run_norms(cfg, out);
    else if (verify->parsed()) code = run_verify(cfg, field, out);
    else if (sweep->parsed()) code = run_sweep(cfg, amplitudes, out);
    rc = static_cast<int>(code);
  } catch (const Error& e) {
    std::cerr << "wharm: " << e.what() << "\n";
    return code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "wharm: " << e.what() << "\n";
    return 4;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "wharm: done in %.2f s (kernels: %s), exit %d\n", secs, simd::kernels().name, rc);
  return rc;
}
