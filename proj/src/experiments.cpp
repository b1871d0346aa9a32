#include "wharm/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wharm/error.hpp"
#include "wharm/io.hpp"
#include "wharm/parallel.hpp"
#include "wharm/perturbation.hpp"

namespace wharm {
namespace fs = std::filesystem;

namespace {

using KV = std::vector<std::pair<std::string, std::string>>;

std::string kv_text(const KV& kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += k + " = " + v + "\n";
  return s;
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    throw Error(ErrorCode::InvalidConfig, "invalid number for key '" + key + "': '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw Error(ErrorCode::InvalidConfig, "invalid integer for key '" + key + "': '" + v + "'");
  return x;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, "key '" + key + "' " + what);
}

std::string mode_of(const std::string& m) {
  if (m == "halfspace-small-data" || m == "box-perturbation" || m == "norms-only") return m;
  throw Error(ErrorCode::InvalidConfig, "key 'mode' must be halfspace-small-data, box-perturbation or norms-only");
}

KV param_entries(const ExperimentConfig& cfg) {
  KV kv;
  for (const auto& [k, v] : cfg.data) kv.emplace_back("param." + k, format_double(v));
  return kv;
}

double amplitude_of(const GeneratorParams& p) {
  if (p.count("amplitude")) return p.at("amplitude");
  if (p.count("lambda")) return p.at("lambda");
  return 0.0;
}

std::string params_cell(const GeneratorParams& p) {
  std::string s;
  for (const auto& [k, v] : p) s += (s.empty() ? "" : ";") + k + "=" + format_double(v);
  return s.empty() ? "none" : s;
}

// Common summary block; every export column is present in every mode.
KV summary_head(const ExperimentConfig& cfg, const std::string& mode, int n) {
  KV kv = {{"mode", mode},
           {"generator", cfg.generator},
           {"params", params_cell(cfg.data)},
           {"amplitude", format_double(amplitude_of(cfg.data))},
           {"n", std::to_string(n)},
           {"seed", std::to_string(cfg.seed)},
           {"threads", std::to_string(cfg.threads)}};
  return kv;
}

std::string norms_csv(const std::vector<std::pair<std::string, NormReport>>& rows) {
  std::string s = "# wharm-norms v1\nfield," + NormReport::csv_header() + "\n";
  for (const auto& [name, r] : rows) s += name + "," + r.csv_row() + "\n";
  return s;
}

bool constraint_ok(bool tube_ok, double defect, double boundary_dist, double tol) {
  return tube_ok && defect >= -tol && boundary_dist <= 1e-10;
}

BoundaryData make_data(const ExperimentConfig& cfg, const HalfSpaceGrid& grid, const TargetManifold& M) {
  BoundaryData f = generate_boundary_data(cfg.generator, cfg.data, grid.n(), grid.L());
  f.check_on_target(M);
  return f;
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return serialize_config(*this) == serialize_config(o);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mode",           "grid.n",           "grid.L",                  "grid.H",
      "grid.sigma",     "box.d",            "box.n",                   "box.base",
      "box.base_amplitude", "target.tube_radius", "target.cutoff_inner", "target.cutoff_outer",
      "target.curvature_sign", "data.generator", "solver.max_iterations", "solver.residual_tolerance",
      "solver.ball_radius", "solver.damping", "solver.lambda",          "solver.seminorm",
      "solver.subharmonic_tolerance", "output.dir", "seed",             "threads"};
  return keys;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto kv = parse_kv(text);
  ExperimentConfig c;
  // The generator decides which data.<param> keys are legal, so read it first.
  if (kv.count("data.generator")) c.generator = kv.at("data.generator");
  try {
    c.data = generator_defaults(c.generator);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, "key 'data.generator' names an unknown generator '" + c.generator + "'");
  }
  const auto& keys = config_keys();
  for (const auto& [key, value] : kv) {
    if (key.rfind("data.", 0) == 0 && key != "data.generator") {
      const std::string p = key.substr(5);
      require(c.data.count(p) > 0, key, "is not a parameter of generator '" + c.generator + "'");
      c.data[p] = parse_double(key, value);
      continue;
    }
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    if (key == "mode") c.mode = mode_of(value);
    else if (key == "grid.n") c.grid_n = static_cast<int>(parse_int(key, value));
    else if (key == "grid.L") c.grid_L = parse_double(key, value);
    else if (key == "grid.H") c.grid_H = parse_double(key, value);
    else if (key == "grid.sigma") c.grid_sigma = value == "auto" ? 0.0 : parse_double(key, value);
    else if (key == "box.d") c.box_d = static_cast<int>(parse_int(key, value));
    else if (key == "box.n") c.box_n = static_cast<int>(parse_int(key, value));
    else if (key == "box.base") c.box_base = value;
    else if (key == "box.base_amplitude") c.box_base_amplitude = parse_double(key, value);
    else if (key == "target.tube_radius") c.target.tube_radius = parse_double(key, value);
    else if (key == "target.cutoff_inner") c.target.cutoff_inner = parse_double(key, value);
    else if (key == "target.cutoff_outer") c.target.cutoff_outer = parse_double(key, value);
    else if (key == "target.curvature_sign") {
      require(value == "classical" || value == "literal", key, "must be classical or literal");
      c.target.curvature_sign = value == "literal" ? CurvatureSign::Literal : CurvatureSign::Classical;
    } else if (key == "data.generator") {
    } else if (key == "solver.max_iterations") c.solver.max_iterations = static_cast<int>(parse_int(key, value));
    else if (key == "solver.residual_tolerance") c.solver.residual_tolerance = parse_double(key, value);
    else if (key == "solver.ball_radius") c.solver.ball_radius = parse_double(key, value);
    else if (key == "solver.damping") c.solver.damping = parse_double(key, value);
    else if (key == "solver.lambda") c.solver.lambda = parse_double(key, value);
    else if (key == "solver.seminorm") {
      require(value == "0" || value == "1", key, "must be 0 or 1");
      c.solver.seminorm_residual = value == "1";
    } else if (key == "solver.subharmonic_tolerance") c.subharmonic_tolerance = parse_double(key, value);
    else if (key == "output.dir") c.output_dir = value;
    else if (key == "seed") {
      const long long s = parse_int(key, value);
      require(s >= 0, key, "must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "threads") c.threads = static_cast<int>(parse_int(key, value));
  }
  require(c.grid_n >= 9 && c.grid_n % 2 == 1, "grid.n", "must be odd and >= 9");
  require(c.grid_L > 0.0, "grid.L", "must be > 0");
  require(c.grid_H > 0.0, "grid.H", "must be > 0");
  require(c.grid_sigma == 0.0 || (c.grid_sigma > 0.0 && c.grid_sigma < 1.0), "grid.sigma", "must be auto or in (0, 1)");
  require(c.box_d == 2 || c.box_d == 3, "box.d", "must be 2 or 3");
  require(c.box_n >= 5, "box.n", "must be >= 5");
  require(c.box_base == "constant" || c.box_base == "flow", "box.base", "must be constant or flow");
  require(c.threads >= 1, "threads", "must be >= 1");
  require(c.subharmonic_tolerance > 0.0, "solver.subharmonic_tolerance", "must be > 0");
  try {
    (void)TargetManifold::sphere(3, c.target);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("target keys: ") + e.what());
  }
  require(c.solver.max_iterations >= 1, "solver.max_iterations", "must be >= 1");
  require(c.solver.residual_tolerance > 0.0, "solver.residual_tolerance", "must be > 0");
  require(c.solver.ball_radius > 0.0, "solver.ball_radius", "must be > 0");
  require(c.solver.damping > 0.0 && c.solver.damping <= 1.0, "solver.damping", "must lie in (0, 1]");
  require(c.solver.lambda >= 0.0, "solver.lambda", "must be >= 0");
  c.solver.validate();
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  KV kv = {{"mode", c.mode},
           {"grid.n", std::to_string(c.grid_n)},
           {"grid.L", format_double(c.grid_L)},
           {"grid.H", format_double(c.grid_H)},
           {"grid.sigma", c.grid_sigma == 0.0 ? "auto" : format_double(c.grid_sigma)},
           {"box.d", std::to_string(c.box_d)},
           {"box.n", std::to_string(c.box_n)},
           {"box.base", c.box_base},
           {"box.base_amplitude", format_double(c.box_base_amplitude)},
           {"target.tube_radius", format_double(c.target.tube_radius)},
           {"target.cutoff_inner", format_double(c.target.cutoff_inner)},
           {"target.cutoff_outer", format_double(c.target.cutoff_outer)},
           {"target.curvature_sign", c.target.curvature_sign == CurvatureSign::Literal ? "literal" : "classical"},
           {"data.generator", c.generator},
           {"solver.max_iterations", std::to_string(c.solver.max_iterations)},
           {"solver.residual_tolerance", format_double(c.solver.residual_tolerance)},
           {"solver.ball_radius", format_double(c.solver.ball_radius)},
           {"solver.damping", format_double(c.solver.damping)},
           {"solver.lambda", format_double(c.solver.lambda)},
           {"solver.seminorm", c.solver.seminorm_residual ? "1" : "0"},
           {"solver.subharmonic_tolerance", format_double(c.subharmonic_tolerance)},
           {"output.dir", c.output_dir},
           {"seed", std::to_string(c.seed)},
           {"threads", std::to_string(c.threads)}};
  for (const auto& [k, v] : c.data) kv.emplace_back("data." + k, format_double(v));
  return kv_text(kv);
}

ExperimentConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, "cannot read config " + path.string());
  }
  return parse_config(text);
}

GridPtr make_halfspace_grid(const ExperimentConfig& cfg) {
  const double sigma = cfg.grid_sigma > 0.0 ? cfg.grid_sigma : HalfSpaceGrid::refinement_sigma(cfg.grid_n);
  return std::make_shared<const HalfSpaceGrid>(cfg.grid_n, cfg.grid_L, cfg.grid_H, sigma, 3);
}

TargetManifold make_target(const ExperimentConfig& cfg) { return TargetManifold::sphere(3, cfg.target); }

ExitCode run_extend(const ExperimentConfig& cfg, const fs::path& out) {
  set_thread_count(cfg.threads);
  const GridPtr grid = make_halfspace_grid(cfg);
  const TargetManifold M = make_target(cfg);
  const BoundaryData f = make_data(cfg, *grid, M);
  const Field v = poisson_extend(grid, f);
  write_text(out / "field.txt", field_to_text(v));
  const ConstraintReport c = verify_constraint(v, M);
  const NormReport xv = x_norm(v);
  KV kv = summary_head(cfg, "extend", grid->n());
  for (const auto& e : param_entries(cfg)) kv.push_back(e);
  kv.insert(kv.end(), {{"converged", "1"},
                       {"iterations", "0"},
                       {"final_residual", "0"},
                       {"theta", "0"},
                       {"max_theta", "0"},
                       {"sup_dist", format_double(c.sup_dist)},
                       {"subharmonic_defect", format_double(c.subharmonic_defect)},
                       {"boundary_dist", format_double(c.boundary_dist)},
                       {"x_norm_total", format_double(xv.total)},
                       {"bmo_norm", format_double(bmo_norm(f))},
                       {"exit_status", "0"}});
  write_text(out / "summary.txt", kv_text(kv));
  return ExitCode::Success;
}

ExitCode run_solve(const ExperimentConfig& cfg, const fs::path& out) {
  set_thread_count(cfg.threads);
  const GridPtr grid = make_halfspace_grid(cfg);
  const TargetManifold M = make_target(cfg);
  const BoundaryData f = make_data(cfg, *grid, M);
  const SolveResult res = solve_traced(grid, f, M, cfg.solver);
  const ConstraintReport c = verify_constraint(res.u, M);
  const NormReport xu = x_norm(res.u), xv = x_norm(res.v);
  const double bmo = bmo_norm(f);
  write_text(out / "trace.csv", res.trace.csv());
  write_text(out / "field.txt", field_to_text(res.u));
  write_text(out / "constraint.txt", c.to_kv());
  write_text(out / "norms.txt", xu.to_kv() + "bmo_norm = " + format_double(bmo) + "\n");
  write_text(out / "norms.csv", norms_csv({{"u", xu}, {"v", xv}}));
  ExitCode code = ExitCode::Success;
  if (res.trace.failure)
    code = ExitCode::NonConvergence;
  else if (!constraint_ok(c.tube_ok, c.subharmonic_defect, c.boundary_dist, cfg.subharmonic_tolerance))
    code = ExitCode::ConstraintViolation;
  const IterationTrace& t = res.trace;
  KV kv = summary_head(cfg, "solve", grid->n());
  for (const auto& e : param_entries(cfg)) kv.push_back(e);
  kv.insert(kv.end(),
            {{"converged", t.converged ? "1" : "0"},
             {"iterations", std::to_string(t.iterations)},
             {"final_residual", format_double(t.residuals.empty() ? 0.0 : t.residuals.back())},
             {"theta", format_double(t.limiting_ratio())},
             {"max_theta", format_double(t.max_ratio_after_burn_in(cfg.solver.burn_in))},
             {"sup_dist", format_double(c.sup_dist)},
             {"subharmonic_defect", format_double(c.subharmonic_defect)},
             {"boundary_dist", format_double(c.boundary_dist)},
             {"x_norm_total", format_double(xu.total)},
             {"bmo_norm", format_double(bmo)},
             {"failure", t.failure ? error_code_name(*t.failure) : "none"},
             {"exit_status", std::to_string(static_cast<int>(code))}});
  write_text(out / "summary.txt", kv_text(kv));
  return code;
}

ExitCode run_norms(const ExperimentConfig& cfg, const fs::path& out) {
  set_thread_count(cfg.threads);
  const GridPtr grid = make_halfspace_grid(cfg);
  const TargetManifold M = make_target(cfg);
  const BoundaryData f = make_data(cfg, *grid, M);
  const Field v = poisson_extend(grid, f);
  const NormReport xv = x_norm(v);
  const BmoReport bmo = bmo_report(f);
  const double ratio = bmo.value > 0.0 ? xv.carleson_energy / bmo.value : 0.0;
  write_text(out / "norms.txt", xv.to_kv() + "bmo_norm = " + format_double(bmo.value) + "\n" +
                                    "bmo_radius = " + format_double(bmo.radius) + "\n" +
                                    "carleson_bmo_ratio = " + format_double(ratio) + "\n");
  write_text(out / "norms.csv", norms_csv({{"v", xv}}));
  KV kv = summary_head(cfg, "norms", grid->n());
  for (const auto& e : param_entries(cfg)) kv.push_back(e);
  kv.insert(kv.end(), {{"converged", "1"},
                       {"iterations", "0"},
                       {"final_residual", "0"},
                       {"theta", "0"},
                       {"max_theta", "0"},
                       {"sup_dist", "0"},
                       {"subharmonic_defect", "0"},
                       {"boundary_dist", "0"},
                       {"x_norm_total", format_double(xv.total)},
                       {"bmo_norm", format_double(bmo.value)},
                       {"carleson_bmo_ratio", format_double(ratio)},
                       {"exit_status", "0"}});
  write_text(out / "summary.txt", kv_text(kv));
  return ExitCode::Success;
}

ExitCode run_perturb(const ExperimentConfig& cfg, const fs::path& out) {
  set_thread_count(cfg.threads);
  if (cfg.generator != "geodesic_cap" && cfg.generator != "constant")
    throw Error(ErrorCode::InvalidConfig, "key 'data.generator' must be geodesic_cap or constant in box mode");
  const TargetManifold M = make_target(cfg);
  const auto grid = std::make_shared<const BoxGrid>(cfg.box_d, cfg.box_n);
  const int m = 3, d = grid->d();
  // Base trace: p = e3, or exp_p(a (x1 + x2^2 / 2) e1) relaxed by the flow.
  BoxField g(grid, m, 0.0);
  for (std::size_t s = 0; s < grid->nodes(); ++s) {
    const double t = cfg.box_base == "flow"
                         ? cfg.box_base_amplitude * (grid->coord(s, 0) + 0.5 * grid->coord(s, 1) * grid->coord(s, 1))
                         : 0.0;
    g.set_value(s, {std::sin(t), 0.0, std::cos(t)});
  }
  BoxField v = g;
  int flow_steps = 0;
  if (cfg.box_base == "flow") {
    const BoxFlowResult fr = box_gradient_flow(g, M);
    v = fr.u;
    flow_steps = fr.steps;
  }
  const BaseMap base = BaseMap::make(v, M);
  StabilityOptions so;
  so.throw_if_indefinite = false;
  const StabilityEstimate est = estimate_stability_constant(base, so);
  // New data: rotate the base trace in the (e1, e3) plane by a cap profile
  // centred on the face x_d = 0.
  PerturbationProblem prob;
  prob.base = &base;
  prob.f = BoxField(grid, m, 0.0);
  const double amp = cfg.generator == "geodesic_cap" ? cfg.data.at("amplitude") : 0.0;
  const double r0 = cfg.generator == "geodesic_cap" ? cfg.data.at("radius") : 1.0;
  for (std::size_t s : grid->boundary()) {
    double rr = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = grid->coord(s, a) - (a == d - 1 ? 0.0 : 0.5);
      rr += x * x;
    }
    const double ang = amp * bump(std::sqrt(rr) / r0);
    const double c = std::cos(ang), sn = std::sin(ang);
    const double x = v.at(0, s), y = v.at(1, s), z = v.at(2, s);
    prob.f.set_value(s, {c * x + sn * z, y, -sn * x + c * z});
  }
  prob.options.max_iterations = cfg.solver.max_iterations;
  prob.options.residual_tolerance = cfg.solver.residual_tolerance;
  const BoxSolveResult res = solve_perturbation(prob);
  const BoxConstraintReport c = verify_box_constraint(res.u, M);
  const NormReport wu = w_norm(res.u);
  write_text(out / "trace.csv", res.trace.csv());
  write_text(out / "field.txt", field_to_text(res.u));
  ConstraintReport cr{c.sup_dist, c.subharmonic_defect, c.boundary_dist, c.tube_ok};
  write_text(out / "constraint.txt", cr.to_kv());
  write_text(out / "norms.txt", wu.to_kv());
  write_text(out / "norms.csv", norms_csv({{"u", wu}}));
  ExitCode code = ExitCode::Success;
  if (res.trace.failure)
    code = ExitCode::NonConvergence;
  else if (!constraint_ok(c.tube_ok, c.subharmonic_defect, c.boundary_dist, cfg.subharmonic_tolerance))
    code = ExitCode::ConstraintViolation;
  const IterationTrace& t = res.trace;
  KV kv = summary_head(cfg, "perturb", grid->n());
  for (const auto& e : param_entries(cfg)) kv.push_back(e);
  kv.insert(kv.end(),
            {{"box_d", std::to_string(d)},
             {"base", cfg.box_base},
             {"flow_steps", std::to_string(flow_steps)},
             {"stability_M", format_double(est.M)},
             {"stable", est.stable ? "1" : "0"},
             {"converged", t.converged ? "1" : "0"},
             {"iterations", std::to_string(t.iterations)},
             {"final_residual", format_double(t.residuals.empty() ? 0.0 : t.residuals.back())},
             {"theta", format_double(t.limiting_ratio())},
             {"max_theta", format_double(t.max_ratio_after_burn_in(prob.options.burn_in))},
             {"sup_dist", format_double(c.sup_dist)},
             {"subharmonic_defect", format_double(c.subharmonic_defect)},
             {"boundary_dist", format_double(c.boundary_dist)},
             {"x_norm_total", format_double(wu.total)},
             {"bmo_norm", "0"},
             {"failure", t.failure ? error_code_name(*t.failure) : "none"},
             {"exit_status", std::to_string(static_cast<int>(code))}});
  write_text(out / "summary.txt", kv_text(kv));
  return code;
}

ExitCode run(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.mode == "box-perturbation") return run_perturb(cfg, out);
  if (cfg.mode == "norms-only") return run_norms(cfg, out);
  return run_solve(cfg, out);
}

ExitCode run_verify(const ExperimentConfig& cfg, const fs::path& field, const fs::path& out) {
  set_thread_count(cfg.threads);
  const TargetManifold M = make_target(cfg);
  const LoadedField lf = field_from_text(read_text(field));
  ConstraintReport c;
  if (lf.half) {
    c = verify_constraint(*lf.half, M);
  } else {
    const BoxConstraintReport b = verify_box_constraint(*lf.box, M);
    c = {b.sup_dist, b.subharmonic_defect, b.boundary_dist, b.tube_ok};
  }
  write_text(out / "constraint.txt", c.to_kv());
  return constraint_ok(c.tube_ok, c.subharmonic_defect, c.boundary_dist, cfg.subharmonic_tolerance)
             ? ExitCode::Success
             : ExitCode::ConstraintViolation;
}

ExitCode run_sweep(const ExperimentConfig& cfg, const std::vector<double>& amplitudes, const fs::path& out) {
  if (!cfg.data.count("amplitude"))
    throw Error(ErrorCode::InvalidConfig, "key 'data.generator' has no amplitude parameter to sweep");
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    ExperimentConfig c = cfg;
    c.data["amplitude"] = amplitudes[k];
    try {
      run(c, out / ("run_" + std::to_string(k)));
    } catch (const Error& e) {
      // A run that cannot start (e.g. amplitude out of range) is still recorded.
      if (e.code() != ErrorCode::AmplitudeOutOfRange) throw;
      KV kv = summary_head(c, cfg.mode, cfg.grid_n);
      for (const auto& e2 : param_entries(c)) kv.push_back(e2);
      kv.insert(kv.end(), {{"converged", "0"},          {"iterations", "0"},  {"final_residual", "nan"},
                           {"theta", "nan"},            {"max_theta", "nan"}, {"sup_dist", "nan"},
                           {"subharmonic_defect", "nan"}, {"boundary_dist", "nan"}, {"x_norm_total", "nan"},
                           {"bmo_norm", "nan"},         {"exit_status", "4"}});
      write_text(out / ("run_" + std::to_string(k)) / "summary.txt", kv_text(kv));
    }
  }
  write_text(out / "sweep.csv", export_results(out));
  return ExitCode::Success;
}

const std::vector<std::string>& export_columns() {
  static const std::vector<std::string> cols = {
      "run",        "mode",           "generator", "params",   "amplitude",          "n",
      "converged",  "iterations",     "final_residual", "theta", "max_theta",       "sup_dist",
      "subharmonic_defect", "x_norm_total", "bmo_norm", "exit_status"};
  return cols;
}

std::string export_results(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingArtifacts, "no such run directory " + dir.string());
  std::vector<std::pair<std::string, fs::path>> runs;
  if (fs::exists(dir / "summary.txt")) runs.emplace_back(".", dir);
  std::vector<fs::path> subs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "summary.txt")) subs.push_back(e.path());
  std::sort(subs.begin(), subs.end());
  for (const auto& p : subs) runs.emplace_back(p.filename().string(), p);
  if (runs.empty()) throw Error(ErrorCode::MissingArtifacts, "no run summaries under " + dir.string());
  struct Row {
    double amplitude;
    std::string name, line;
  };
  std::vector<Row> rows;
  for (const auto& [name, path] : runs) {
    const auto kv = parse_kv(read_text(path / "summary.txt"));
    std::string line = name;
    for (std::size_t i = 1; i < export_columns().size(); ++i) {
      const std::string& col = export_columns()[i];
      if (!kv.count(col)) throw Error(ErrorCode::MissingArtifacts, path.string() + "/summary.txt lacks '" + col + "'");
      line += "," + kv.at(col);
    }
    double a = 0.0;
    std::from_chars(kv.at("amplitude").data(), kv.at("amplitude").data() + kv.at("amplitude").size(), a);
    rows.push_back({a, name, line});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    return x.amplitude != y.amplitude ? x.amplitude < y.amplitude : x.name < y.name;
  });
  std::string out = "# wharm-export v1\n";
  for (std::size_t i = 0; i < export_columns().size(); ++i) out += (i ? "," : "") + export_columns()[i];
  out += "\n";
  for (const auto& r : rows) out += r.line + "\n";
  return out;
}

}  // namespace wharm
