#pragma once

/// Scale-invariant norms sampled on grid balls: the X-norm of fields, the
/// Y-norm of sources and the BMO norm of boundary data.
///
/// Ball membership is the cell rule |y' - x'| < r + h/2. Radii are the
/// positive grid levels; a ball is sampled only if it lies inside the window.

#include <string>
#include <vector>

#include "wharm/halfspace.hpp"

namespace wharm {

struct NormReport {
  double sup_norm = 0.0;
  double weighted_grad_sup = 0.0;
  double carleson_energy = 0.0;
  double total = 0.0;
  Vec sup_at;            // node coordinates of the sup
  Vec grad_at;           // node coordinates of the weighted gradient sup
  Vec carleson_center;   // boundary center of the maximising ball
  double carleson_radius = 0.0;
  int clipped_balls = 0;  // balls whose cylinder reaches the domain top

  double seminorm() const { return weighted_grad_sup + carleson_energy; }
  std::string to_kv() const;
  static std::string csv_header();
  std::string csv_row() const;
};

// True iff offset (di, dj) cells lies in the ball of radius r (cell rule).
inline bool in_ball(long di, long dj, double h, double r) {
  const double dd = (static_cast<double>(di) * di + static_cast<double>(dj) * dj) * h * h;
  const double rr = r + 0.5 * h;
  return dd < rr * rr;
}

struct BallSampler {
  int n = 0;
  double L = 0.0, h = 0.0;
  std::vector<double> radii;
  std::vector<int> level;                    // grid level of each radius (-1 if none)
  std::vector<std::vector<int>> halfwidth;   // per radius: max |di| for each |dj|

  static BallSampler halfspace(const HalfSpaceGrid& grid);
  static BallSampler boundary(int n, double L, const std::vector<double>& radii);
  // Default BMO radii: 0.75^k * L for k >= 1, down to h.
  static std::vector<double> geometric_radii(double L, double h);
  bool center_inside(int i, int j, std::size_t r) const;
  double x(int i) const { return (i - (n - 1) / 2) * h; }
};

NormReport x_norm(const Field& u);
// Y-norm: sup x_d^2 |F| plus the Carleson integral of y_d |F|.
double y_norm(const Field& F);

struct BmoReport {
  double value = 0.0;
  Vec center;
  double radius = 0.0;
  std::size_t balls = 0;
};
BmoReport bmo_report(const BoundaryData& f, const std::vector<double>& radii);
BmoReport bmo_report(const BoundaryData& f);
double bmo_norm(const BoundaryData& f);

}  // namespace wharm
