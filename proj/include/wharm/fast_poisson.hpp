#pragma once

#include <vector>

#include "wharm/halfspace.hpp"

namespace wharm {

// Exact direct solver for (-Lap_h + shift) u = rhs on the interior nodes of a
// graded half-space grid: DST-I in x1 and x2, then one tridiagonal system in
// x_d per horizontal mode. Boundary nodes of u hold the Dirichlet values.
class GradedPoissonSolver {
 public:
  explicit GradedPoissonSolver(const HalfSpaceGrid& grid);
  // rhs and u are single-component planar arrays over all grid nodes.
  void solve(const double* rhs, double* u, double shift = 0.0) const;

 private:
  const HalfSpaceGrid& g_;
  std::vector<double> mu_;     // horizontal eigenvalues per mode
  std::vector<double> lower_;  // a_k, coefficient of u_{k-1}
  std::vector<double> upper_;  // c_k, coefficient of u_{k+1}
};

// Same system for a uniform box grid in d dimensions (all directions DST-I).
class UniformPoissonSolver {
 public:
  UniformPoissonSolver(int d, int n, double h);
  // u: all n^d nodes, boundary values are Dirichlet data; rhs at interior nodes.
  void solve(const double* rhs, double* u, double shift = 0.0) const;
  // Interior-only variant: x and b have (n-2)^d entries, zero boundary data.
  void solve_interior(const double* b, double* x, double shift = 0.0) const;

 private:
  int d_, n_;
  double h_;
  std::vector<double> mu1_;
};

}  // namespace wharm
