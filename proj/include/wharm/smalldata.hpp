#pragma once

/// Small-data solver on the half-space: the fixed-point map
/// S u = v + N[Gamma~(u)(grad u, grad u)] with v the Poisson extension of the
/// data, Picard iteration with contraction monitoring, constraint verification,
/// and an independent projected gradient-flow oracle.

#include <optional>
#include <string>
#include <vector>

#include "wharm/error.hpp"
#include "wharm/norms.hpp"
#include "wharm/potential.hpp"

namespace wharm {

struct SolverOptions {
  int max_iterations = 50;
  double residual_tolerance = 1e-8;
  double ball_radius = 0.05;  // admissible X-ball size around v
  double damping = 1.0;       // 1 = pure Picard
  double lambda = 0.0;        // slack of the BMO distance bound
  // BMO data contracts in the semi-norm only; the sup term is then dropped.
  bool seminorm_residual = false;
  int burn_in = 3;
  int noncontraction_window = 5;
  PotentialBackend backend = PotentialBackend::FastDirect;

  void validate() const;
};

struct IterationTrace {
  std::vector<double> residuals;      // ||u_{k+1} - u_k||_X
  std::vector<double> ratios;         // residuals[k+1] / residuals[k]; NaN if undefined
  std::vector<double> distance_to_v;  // ||u_{k+1} - v||_X
  std::vector<double> sup_dist;       // sup dist(u_{k+1}, N)
  bool converged = false;
  int iterations = 0;
  std::optional<ErrorCode> failure;

  // Largest defined ratio at index >= burn_in (0 if none).
  double max_ratio_after_burn_in(int burn_in = 3) const;
  // Geometric mean of the last (up to) three defined ratios.
  double limiting_ratio() const;
  std::string csv() const;
};

struct ConstraintReport {
  double sup_dist = 0.0;
  double subharmonic_defect = 0.0;  // min over interior nodes of Lap(|Upsilon(u)|^2 / 2)
  double boundary_dist = 0.0;
  bool tube_ok = true;

  std::string to_kv() const;
};

struct SolveResult {
  Field v;
  Field u;
  IterationTrace trace;
};

// Gamma~(u)(d_j u, d_j u) summed over j, at every node.
Field harmonic_source(const Field& u, const TargetManifold& M);

Field apply_S(const Field& v, const Field& u, const TargetManifold& M,
              PotentialBackend backend = PotentialBackend::FastDirect);

double residual_norm(const Field& diff, bool seminorm);

// Picard iteration from u0; failures are recorded in trace.failure.
SolveResult iterate(const Field& v, const Field& u0, const TargetManifold& M,
                    const SolverOptions& opts);
// Extends f on the grid and iterates from u0 = v. Never throws on
// non-convergence; see trace.failure.
SolveResult solve_traced(const GridPtr& grid, const BoundaryData& f, const TargetManifold& M,
                         const SolverOptions& opts = {});
// Same, but throws NonContraction or MaxIterations.
SolveResult solve(const GridPtr& grid, const BoundaryData& f, const TargetManifold& M,
                  const SolverOptions& opts = {});

// ||S u1 - S u2||_X / ||u1 - u2||_X; throws DegeneratePair if u1 = u2.
double estimate_contraction(const Field& v, const Field& u1, const Field& u2,
                            const TargetManifold& M);

ConstraintReport verify_constraint(const Field& u, const TargetManifold& M);

struct FlowOptions {
  double tau = 2.0;
  double tolerance = 1e-11;  // max nodal change per step
  int max_steps = 2000;
};

struct FlowResult {
  Field u;
  int steps = 0;
  double last_change = 0.0;
  bool converged = false;
};

// Semi-implicit projected flow (I - tau Lap) u~ = u + tau Gamma~(u)(grad u, grad u),
// u = P_N(u~), with f on the bottom and P_N(v) on the sides and top.
FlowResult gradient_flow_oracle(const Field& v, const TargetManifold& M,
                                const FlowOptions& opts = {});

}  // namespace wharm
