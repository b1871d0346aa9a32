#include "wharm/smalldata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "wharm/parallel.hpp"
#include "wharm/simd.hpp"

namespace wharm {
namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double sup_dist_field(const Field& u, const TargetManifold& M, std::size_t begin, std::size_t end) {
  const int m = u.m;
  const std::size_t N = u.nodes();
  double best = 0.0;
  std::vector<double> z(m);
  for (std::size_t s = begin; s < end; ++s) {
    for (int c = 0; c < m; ++c) z[c] = u.data[c * N + s];
    best = std::max(best, M.dist_ptr(z.data()));
  }
  return best;
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be >= 1");
  if (!(residual_tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "residual_tolerance must be > 0");
  if (!(ball_radius > 0.0)) throw Error(ErrorCode::InvalidConfig, "ball_radius must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorCode::InvalidConfig, "damping must lie in (0, 1]");
  if (lambda < 0.0) throw Error(ErrorCode::InvalidConfig, "lambda must be >= 0");
}

double IterationTrace::max_ratio_after_burn_in(int burn_in) const {
  double best = 0.0;
  for (std::size_t k = burn_in; k < ratios.size(); ++k)
    if (std::isfinite(ratios[k])) best = std::max(best, ratios[k]);
  return best;
}

double IterationTrace::limiting_ratio() const {
  double logsum = 0.0;
  int count = 0;
  for (std::size_t k = ratios.size(); k-- > 0 && count < 3;)
    if (std::isfinite(ratios[k]) && ratios[k] > 0.0) {
      logsum += std::log(ratios[k]);
      ++count;
    }
  return count ? std::exp(logsum / count) : 0.0;
}

std::string IterationTrace::csv() const {
  std::ostringstream os;
  os << "# wharm-trace v1\n";
  os << "iteration,residual,theta,distance_to_v,sup_dist\n";
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    os << k + 1 << "," << fmt(residuals[k]) << ",";
    // theta_k compares step k with step k-1.
    if (k >= 1 && std::isfinite(ratios[k - 1])) os << fmt(ratios[k - 1]);
    os << "," << fmt(distance_to_v[k]) << "," << fmt(sup_dist[k]) << "\n";
  }
  return os.str();
}

std::string ConstraintReport::to_kv() const {
  std::ostringstream os;
  os << "sup_dist = " << fmt(sup_dist) << "\n";
  os << "subharmonic_defect = " << fmt(subharmonic_defect) << "\n";
  os << "boundary_dist = " << fmt(boundary_dist) << "\n";
  os << "tube_ok = " << (tube_ok ? 1 : 0) << "\n";
  return os.str();
}

Field harmonic_source(const Field& u, const TargetManifold& M) {
  const int m = u.m, d = u.grid->d();
  if (m != M.dim()) throw Error(ErrorCode::InvalidArgument, "field and target dimensions differ");
  const std::size_t N = u.nodes();
  const Gradient G = gradient(u);
  Field out(u.grid, m, 0.0);
  const std::size_t chunk = 4096;
  const std::size_t chunks = (N + chunk - 1) / chunk;
  parallel_for(chunks, [&](std::size_t b) {
    const std::size_t s0 = b * chunk, s1 = std::min(N, s0 + chunk);
    std::vector<double> z(m), V(m), g(m), acc(m);
    std::size_t run = s0;
    // Runs of nodes where the sphere formula holds go through the SIMD kernel.
    auto flush = [&](std::size_t a, std::size_t e) {
      if (a >= e) return;
      std::vector<const double*> up(m), gp(static_cast<std::size_t>(d) * m);
      std::vector<double*> op(m);
      for (int c = 0; c < m; ++c) {
        up[c] = u.comp(c) + a;
        op[c] = out.comp(c) + a;
      }
      for (int j = 0; j < d; ++j)
        for (int c = 0; c < m; ++c) gp[static_cast<std::size_t>(j) * m + c] = G.part(j, c) + a;
      simd::kernels().sphere_source(m, d, up.data(), gp.data(), op.data(), e - a);
    };
    for (std::size_t s = s0; s < s1; ++s) {
      for (int c = 0; c < m; ++c) z[c] = u.at(c, s);
      if (M.sphere_formula_valid(z.data())) continue;
      flush(run, s);
      run = s + 1;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int j = 0; j < d; ++j) {
        for (int c = 0; c < m; ++c) V[c] = G.part(j, c)[s];
        M.gamma_tilde_into(z.data(), V.data(), V.data(), g.data());
        for (int c = 0; c < m; ++c) acc[c] += g[c];
      }
      for (int c = 0; c < m; ++c) out.at(c, s) = acc[c];
    }
    flush(run, s1);
  });
  return out;
}

Field apply_S(const Field& v, const Field& u, const TargetManifold& M, PotentialBackend backend) {
  PotentialOptions po;
  po.backend = backend;
  return v + newton_potential(harmonic_source(u, M), po);
}

double residual_norm(const Field& diff, bool seminorm) {
  const NormReport r = x_norm(diff);
  return seminorm ? r.seminorm() : r.total;
}

SolveResult iterate(const Field& v, const Field& u0, const TargetManifold& M,
                    const SolverOptions& opts) {
  opts.validate();
  SolveResult res;
  res.v = v;
  res.u = u0;
  IterationTrace& tr = res.trace;
  int streak = 0;
  for (int k = 0; k < opts.max_iterations; ++k) {
    Field next = apply_S(v, res.u, M, opts.backend);
    if (opts.damping != 1.0) next = (1.0 - opts.damping) * res.u + opts.damping * next;
    const double r = residual_norm(next - res.u, opts.seminorm_residual);
    res.u = std::move(next);
    tr.iterations = k + 1;
    if (!tr.residuals.empty()) {
      const double prev = tr.residuals.back();
      tr.ratios.push_back(prev > 0.0 ? r / prev : std::numeric_limits<double>::quiet_NaN());
    }
    tr.residuals.push_back(r);
    tr.distance_to_v.push_back(residual_norm(res.u - v, opts.seminorm_residual));
    tr.sup_dist.push_back(sup_dist_field(res.u, M, 0, res.u.nodes()));
    if (r < opts.residual_tolerance) {
      tr.converged = true;
      return res;
    }
    const std::size_t idx = tr.ratios.size();
    if (idx > static_cast<std::size_t>(opts.burn_in) && tr.ratios.back() >= 1.0) {
      if (++streak >= opts.noncontraction_window) {
        tr.failure = ErrorCode::NonContraction;
        return res;
      }
    } else {
      streak = 0;
    }
    if (!std::isfinite(r)) {
      tr.failure = ErrorCode::NonContraction;
      return res;
    }
  }
  tr.failure = ErrorCode::MaxIterations;
  return res;
}

SolveResult solve_traced(const GridPtr& grid, const BoundaryData& f, const TargetManifold& M,
                         const SolverOptions& opts) {
  const Field v = poisson_extend(grid, f);
  return iterate(v, v, M, opts);
}

SolveResult solve(const GridPtr& grid, const BoundaryData& f, const TargetManifold& M,
                  const SolverOptions& opts) {
  SolveResult res = solve_traced(grid, f, M, opts);
  if (res.trace.failure) {
    const ErrorCode c = *res.trace.failure;
    throw Error(c, c == ErrorCode::NonContraction ? "Picard iteration does not contract"
                                                  : "Picard iteration hit max_iterations");
  }
  return res;
}

double estimate_contraction(const Field& v, const Field& u1, const Field& u2,
                            const TargetManifold& M) {
  const double den = x_norm(u1 - u2).total;
  if (!(den > 1e-300)) throw Error(ErrorCode::DegeneratePair, "contraction pair coincides");
  return x_norm(apply_S(v, u1, M) - apply_S(v, u2, M)).total / den;
}

ConstraintReport verify_constraint(const Field& u, const TargetManifold& M) {
  const HalfSpaceGrid& g = *u.grid;
  const int m = u.m;
  const std::size_t N = u.nodes(), plane = g.plane();
  ConstraintReport rep;
  rep.sup_dist = sup_dist_field(u, M, 0, N);
  rep.boundary_dist = sup_dist_field(u, M, 0, plane);
  rep.tube_ok = rep.sup_dist < M.tube_radius();
  if (!rep.tube_ok) {
    rep.subharmonic_defect = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  Field G(u.grid, 1, 0.0);
  std::vector<double> z(m), ups(m);
  for (std::size_t s = 0; s < N; ++s) {
    for (int c = 0; c < m; ++c) z[c] = u.at(c, s);
    M.project_into(z.data(), ups.data());
    double a = 0.0;
    for (int c = 0; c < m; ++c) a += (z[c] - ups[c]) * (z[c] - ups[c]);
    G.data[s] = 0.5 * a;
  }
  const Field lap = laplacian(G);
  double mn = std::numeric_limits<double>::infinity();
  for (int k = 1; k < g.K(); ++k)
    for (int j = 1; j < g.n() - 1; ++j)
      for (int i = 1; i < g.n() - 1; ++i) mn = std::min(mn, lap.data[g.index(i, j, k)]);
  rep.subharmonic_defect = std::isfinite(mn) ? mn : 0.0;
  return rep;
}

FlowResult gradient_flow_oracle(const Field& v, const TargetManifold& M, const FlowOptions& opts) {
  const HalfSpaceGrid& g = *v.grid;
  const int m = v.m;
  const std::size_t N = v.nodes();
  FlowResult res;
  res.u = v;
  std::vector<double> z(m), q(m);
  for (std::size_t s = 0; s < N; ++s) {
    const int k = static_cast<int>(s / g.plane());
    if (k == 0) continue;
    for (int c = 0; c < m; ++c) z[c] = v.at(c, s);
    M.project_into(z.data(), q.data());
    for (int c = 0; c < m; ++c) res.u.at(c, s) = q[c];
  }
  const double inv_tau = 1.0 / opts.tau;
  for (int step = 1; step <= opts.max_steps; ++step) {
    Field rhs = harmonic_source(res.u, M);
    for (std::size_t i = 0; i < rhs.data.size(); ++i) rhs.data[i] += inv_tau * res.u.data[i];
    Field ut = res.u;
    solve_dirichlet(ut, rhs, inv_tau);
    double change = 0.0;
    for (int k = 1; k < g.K(); ++k)
      for (int j = 1; j < g.n() - 1; ++j)
        for (int i = 1; i < g.n() - 1; ++i) {
          const std::size_t s = g.index(i, j, k);
          for (int c = 0; c < m; ++c) z[c] = ut.at(c, s);
          M.project_into(z.data(), q.data());
          for (int c = 0; c < m; ++c) {
            change = std::max(change, std::abs(q[c] - res.u.at(c, s)));
            res.u.at(c, s) = q[c];
          }
        }
    res.steps = step;
    res.last_change = change;
    if (change < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace wharm
