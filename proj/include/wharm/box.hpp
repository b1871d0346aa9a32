#pragma once

/// Uniform grids on the unit box (0,1)^d (d = 2 or 3), fields on them,
/// finite-difference calculus, fast Dirichlet solves, and the W/Z norms with
/// the boundary-distance weight d(x).
///
/// Node layout: index = i0 + n * (i1 + n * i2). Field values are
/// component-planar, as on the half-space.

#include <array>
#include <memory>
#include <vector>

#include "wharm/norms.hpp"

namespace wharm {

class BoxGrid {
 public:
  BoxGrid(int d = 3, int n = 33);

  int d() const { return d_; }
  int n() const { return n_; }
  double h() const { return h_; }
  std::size_t nodes() const { return nodes_; }
  double cell_volume() const { return cell_; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  int coord_index(std::size_t node, int axis) const {
    return static_cast<int>((node / stride_[axis]) % static_cast<std::size_t>(n_));
  }
  double coord(std::size_t node, int axis) const { return coord_index(node, axis) * h_; }
  // Distance to the boundary, exact for the box: min over faces.
  double dist(std::size_t node) const { return dist_[node]; }
  bool is_boundary(std::size_t node) const { return dist_[node] == 0.0; }
  const std::vector<std::size_t>& interior() const { return interior_; }
  const std::vector<std::size_t>& boundary() const { return boundary_; }
  // Position of a node in interior(), or -1 for boundary nodes.
  long interior_slot(std::size_t node) const { return slot_[node]; }

 private:
  int d_, n_;
  double h_, cell_;
  std::size_t nodes_;
  std::array<std::size_t, 3> stride_{};
  std::vector<double> dist_;
  std::vector<std::size_t> interior_, boundary_;
  std::vector<long> slot_;
};

using BoxGridPtr = std::shared_ptr<const BoxGrid>;

struct BoxField {
  BoxGridPtr grid;
  int m = 0;
  std::vector<double> data;

  BoxField() = default;
  BoxField(BoxGridPtr g, int comps, double fill = 0.0);
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

BoxField operator+(const BoxField& a, const BoxField& b);
BoxField operator-(const BoxField& a, const BoxField& b);
BoxField operator*(double s, const BoxField& a);

// Same layout as the half-space Gradient: data[(j * m + c) * nodes + node].
Gradient box_gradient(const BoxField& u);
// Discrete Laplacian at interior nodes, zero on the boundary.
BoxField box_laplacian(const BoxField& u);
// Harmonic at interior nodes, boundary values taken from g.
BoxField box_harmonic_extension(const BoxField& g);
// -Lap w = F at interior nodes, w = 0 on the boundary.
BoxField box_potential(const BoxField& F);
// Solves (-Lap + shift) u = rhs at interior nodes, keeping u's boundary values.
void box_solve_dirichlet(BoxField& u, const BoxField& rhs, double shift = 0.0);

// Carleson regions T = Omega ∩ B_r(xi), xi a boundary node, radius from
// 0.5 * 0.75^k >= h. Offsets are kept in node order so that any exhaustive
// enumeration in node order sums the same terms in the same order.
struct CarlesonRegions {
  std::vector<double> radii;
  std::vector<std::vector<std::array<int, 3>>> offsets;

  static CarlesonRegions make(const BoxGrid& grid);
  static bool contains(const BoxGrid& grid, const std::array<int, 3>& off, double r);
};

// max over regions of r^{1-d} sum_{y in T} d(y) q(y) h^d; q nodal.
double box_carleson_max(const BoxGrid& grid, const std::vector<double>& q, std::size_t* best_center,
                        double* best_radius);

NormReport w_norm(const BoxField& u);
double z_norm(const BoxField& F);

}  // namespace wharm
