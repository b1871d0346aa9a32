#pragma once

#include "wharm/halfspace.hpp"

namespace wharm {

enum class PotentialBackend { FastDirect, SparseDirect, GreenSum };

struct PotentialOptions {
  PotentialBackend backend = PotentialBackend::FastDirect;
  // When set, side and top boundary values are taken from this field instead
  // of the dipole extrapolation.
  const Field* boundary_values = nullptr;
};

// w = N F: zero on x_d = 0, -Lap_h w = F at interior nodes.
Field newton_potential(const Field& F, const PotentialOptions& opts = {});

// Far-field values M1 * P_{x_d}(x') with M1 = sum y_d F dV, written on the side
// and top boundary nodes; zero elsewhere.
Field dipole_boundary(const Field& F);

// Solves (-Lap_h + shift) u = rhs at interior nodes, keeping the boundary
// values already stored in u.
void solve_dirichlet(Field& u, const Field& rhs, double shift = 0.0,
                     PotentialBackend backend = PotentialBackend::FastDirect);

}  // namespace wharm
