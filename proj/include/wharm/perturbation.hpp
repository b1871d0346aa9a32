#pragma once

/// Large-data perturbation theory on the unit box: the stability form Q_v,
/// the linearized operator L_v w = Lap w - C_v w with C_v the curvature
/// coupling, the nonlinearity F~ = F1 + F2 + F3 and the fixed point
/// w = (-L_v)^{-1} F~(v, phi_h, w).

#include <string>

#include "wharm/box.hpp"
#include "wharm/smalldata.hpp"

namespace wharm {

// A base map v with the per-node curvature matrices C_v (m x m, interior nodes).
struct BaseMap {
  BoxField v;
  TargetManifold target;
  std::vector<double> curvature;  // nodes * m * m, zero on the boundary
  double sup_dist = 0.0;
  double max_second_difference = 0.0;
  double weak_residual = 0.0;  // max |tent-function residual| / cell volume

  static BaseMap make(BoxField v, const TargetManifold& M);
  const BoxGrid& grid() const { return *v.grid; }
  int m() const { return v.m; }
  BoxField trace() const;  // v on the boundary, zero inside
};

// Q_v(phi) = sum_edges |phi_a - phi_b|^2 h^{d-2} + sum_nodes <C_v phi, phi> h^d,
// after projecting phi onto T_v N. Throws NonzeroTrace.
double stability_form(const BaseMap& base, const BoxField& phi);
// Pointwise projection onto T_v N.
BoxField project_tangent(const BaseMap& base, const BoxField& phi);

struct StabilityOptions {
  double tolerance = 1e-12;  // relative change of the Rayleigh quotient
  int max_iterations = 500;
  int block_size = 4;
  bool throw_if_indefinite = true;
};

struct StabilityEstimate {
  double M = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stable = false;
};

// Minimum Rayleigh quotient Q_v / ||phi||^2 over zero-trace tangent fields.
StabilityEstimate estimate_stability_constant(const BaseMap& base, const StabilityOptions& opts = {});

BoxField apply_linearized(const BaseMap& base, const BoxField& w);
// w with -L_v w = H at interior nodes and w = 0 on the boundary; throws
// SingularOperator.
BoxField solve_linearized(const BaseMap& base, const BoxField& H);
// Two-stage path: w0 = (-Lap)^{-1} H, then GMRES on (I + K) w = w0 with
// K = (-Lap)^{-1} C_v.
BoxField solve_linearized_two_stage(const BaseMap& base, const BoxField& H, double tol = 1e-13);

struct InvertibilityReport {
  double sigma_min = 0.0;  // smallest singular value of I + K
  bool pass = false;       // sigma_min > 1e-8
  int iterations = 0;
  std::string to_kv() const;
};
InvertibilityReport check_invertibility(const BaseMap& base);

struct NonlinearityParts {
  BoxField F1, F2, F3, total;
};
// F1 = G(v)(grad u, grad u) - G(v)(grad v, grad v), F2 = C_v w,
// F3 = G(u)(grad u, grad u) - G(v)(grad u, grad u), u = v + phi_h + w,
// G = Gamma~. Zero on the boundary.
NonlinearityParts nonlinearity_F(const BaseMap& base, const BoxField& phi_h, const BoxField& w);

struct PerturbationOptions {
  int max_iterations = 50;
  double residual_tolerance = 1e-10;  // W-norm of w_{k+1} - w_k
  int burn_in = 3;
  int noncontraction_window = 5;
};

struct PerturbationProblem {
  const BaseMap* base = nullptr;
  BoxField f;  // new boundary data on N; interior values ignored
  PerturbationOptions options;

  BoxField h() const;      // f - g on the boundary, zero inside
  BoxField phi_h() const;  // harmonic extension of h
};

struct BoxSolveResult {
  BoxField u;
  BoxField w;
  IterationTrace trace;
};

// Failures are recorded in trace.failure (NonContraction, MaxIterations);
// SingularOperator is thrown.
BoxSolveResult solve_perturbation(const PerturbationProblem& problem);

// Gamma~(u)(d_j u, d_j u) summed over j, zero on the boundary.
BoxField box_harmonic_source(const BoxField& u, const TargetManifold& M);
// Direct Picard iteration u <- H f + (-Lap)^{-1} Gamma~(u)(grad u, grad u) on the box.
BoxSolveResult box_picard(const BoxField& f, const TargetManifold& M, const SolverOptions& opts = {});

// Same semi-implicit projected flow as on the half-space, with boundary data g.
struct BoxFlowResult {
  BoxField u;
  int steps = 0;
  double last_change = 0.0;
  bool converged = false;
};
BoxFlowResult box_gradient_flow(const BoxField& g, const TargetManifold& M, const FlowOptions& opts = {});

struct BoxConstraintReport {
  double sup_dist = 0.0;
  double subharmonic_defect = 0.0;
  double boundary_dist = 0.0;
  bool tube_ok = true;
};
BoxConstraintReport verify_box_constraint(const BoxField& u, const TargetManifold& M);

}  // namespace wharm
