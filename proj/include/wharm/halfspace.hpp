#pragma once

/// Truncated, vertically graded half-space grid, fields on it, boundary data,
/// the Poisson kernel and its extension operator, the half-space Green
/// function, and finite-difference calculus.
///
/// Node layout: index = (k * n + j) * n + i, with i along x1, j along x2 and
/// k the level. Level 0 is the boundary x_d = 0; levels 1..K are H*sigma^(K-k).
/// Field values are component-planar: data[c * nodes + index].

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wharm/target.hpp"

namespace wharm {

class HalfSpaceGrid {
 public:
  // Only d = 3 is supported for grid operations; n must be odd.
  HalfSpaceGrid(int n = 129, double L = 4.0, double H = 8.0, double sigma = 0.75, int d = 3);

  // Grading that keeps log(1/sigma) proportional to h: 0.75 at n = 129.
  static double refinement_sigma(int n);
  static std::shared_ptr<const HalfSpaceGrid> refined(int n, double L = 4.0, double H = 8.0);

  int d() const { return d_; }
  int n() const { return n_; }
  double L() const { return L_; }
  double h() const { return h_; }
  double H() const { return H_; }
  double sigma() const { return sigma_; }
  int K() const { return K_; }  // number of positive levels
  int levels() const { return K_ + 1; }
  const std::vector<double>& z() const { return z_; }
  double x(int i) const { return (i - (n_ - 1) / 2) * h_; }
  std::size_t plane() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t nodes() const { return plane() * levels(); }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * n_ + j) * n_ + i;
  }
  bool is_boundary(int i, int j, int k) const {
    return k == 0 || k == K_ || i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
  }

  // Horizontal trapezoid weight along one axis.
  double wx(int i) const { return (i == 0 || i == n_ - 1) ? 0.5 * h_ : h_; }
  // Vertical weights of the rule: trapezoid on [0, z_1], then trapezoid in
  // ln z for z * g on the geometric levels.
  const std::vector<double>& zweight() const { return zw_; }
  // Segment (k-1, k) of the same rule: C_k = C_{k-1} + seg_lo[k] g_{k-1} + seg_hi[k] g_k.
  const std::vector<double>& seg_lo() const { return seg_lo_; }
  const std::vector<double>& seg_hi() const { return seg_hi_; }

 private:
  int d_, n_, K_;
  double L_, h_, H_, sigma_;
  std::vector<double> z_, zw_, seg_lo_, seg_hi_;
};

using GridPtr = std::shared_ptr<const HalfSpaceGrid>;

struct Field {
  GridPtr grid;
  int m = 0;
  std::vector<double> data;

  Field() = default;
  Field(GridPtr g, int comps, double fill = 0.0);
  std::size_t nodes() const { return grid->nodes(); }
  double* comp(int c) { return data.data() + static_cast<std::size_t>(c) * nodes(); }
  const double* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * nodes(); }
  double& at(int c, std::size_t node) { return data[static_cast<std::size_t>(c) * nodes() + node]; }
  double at(int c, std::size_t node) const {
    return data[static_cast<std::size_t>(c) * nodes() + node];
  }
  Vec value(std::size_t node) const;
  void set_value(std::size_t node, const Vec& v);
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

// Per-node d x m array: data[(j * m + c) * nodes + node] = d_j u_c.
struct Gradient {
  int d = 0, m = 0;
  std::size_t nodes = 0;
  std::vector<double> data;
  double* part(int j, int c) { return data.data() + (static_cast<std::size_t>(j) * m + c) * nodes; }
  const double* part(int j, int c) const {
    return data.data() + (static_cast<std::size_t>(j) * m + c) * nodes;
  }
  // Frobenius norm squared of the d x m block at a node.
  double norm2(std::size_t node) const;
};

struct BoundaryData {
  int n = 0;
  double L = 0.0;
  Vec p;                   // base point
  std::vector<double> g;   // deviation, component-planar, n*n per component
  std::string generator;
  std::vector<std::pair<std::string, double>> params;

  BoundaryData() = default;
  BoundaryData(int n_, double L_, Vec p_);
  int m() const { return static_cast<int>(p.size()); }
  double h() const { return 2.0 * L / (n - 1); }
  double x(int i) const { return (i - (n - 1) / 2) * h(); }
  std::size_t samples() const { return static_cast<std::size_t>(n) * n; }
  double& dev(int c, std::size_t s) { return g[static_cast<std::size_t>(c) * samples() + s]; }
  double dev(int c, std::size_t s) const { return g[static_cast<std::size_t>(c) * samples() + s]; }
  Vec value(std::size_t s) const;
  // g vanishes outside the open square (-L/2, L/2)^2.
  bool compactly_supported() const;
  double sup_deviation() const;
  // Throws InvalidArgument if some sample is farther than tol from N.
  void check_on_target(const TargetManifold& M, double tol = 1e-10) const;
};

double poisson_constant(int d);
double green_constant(int d);
// P_{x_d}(x') = c_d x_d / (|x'|^2 + x_d^2)^(d/2); throws NonpositiveHeight.
double poisson_kernel(int d, const Vec& xprime, double xd);
double poisson_kernel(const HalfSpaceGrid& grid, const Vec& xprime, double xd);
// Integral of P_z over [0, a] x [0, b] (d = 3).
double poisson_rectangle(double a, double b, double z);

double green_function(int d, const Vec& x, const Vec& y);
double green_function(const HalfSpaceGrid& grid, const Vec& x, const Vec& y);
Vec green_gradient_x(int d, const Vec& x, const Vec& y);

struct KernelMass {
  double window = 0.0;  // quadrature over the boundary window
  double tail = 0.0;    // closed-form mass outside the window
  double total() const { return window + tail; }
};
// Trapezoid on nodes for z >= h; cell-exact integration for z < h.
KernelMass kernel_mass(const HalfSpaceGrid& grid, double z);

// Window quadrature of grad P_z (components x1, x2, x_d). The vertical
// component is integrated cell-exactly for z < 4h and completed by the
// closed-form exterior tail.
Vec cancellation_vector(const HalfSpaceGrid& grid, double z);
double cancellation_check(const HalfSpaceGrid& grid, double z);

// v = p + sum_j g_j W_z(x' - y'_j), W_z the exact cell integral of P_z.
Field poisson_extend(const GridPtr& grid, const BoundaryData& f);

Gradient gradient(const Field& u);
// Discrete Laplacian at interior nodes, zero on boundary nodes.
Field laplacian(const Field& u);

// Quadrature of a nodal scalar over the truncated domain.
double integrate(const HalfSpaceGrid& grid, const std::vector<double>& nodal);
// int x_d |grad u|^2
double weighted_energy(const Field& u);
// int x_d |F|
double weighted_l1(const Field& F);
double sup_abs(const Field& u);

}  // namespace wharm
