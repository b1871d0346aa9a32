#include "wharm/potential.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "wharm/error.hpp"
#include "wharm/fast_poisson.hpp"

namespace wharm {
namespace {

void solve_sparse(const HalfSpaceGrid& g, const double* rhs, double* u, double shift) {
  const int n = g.n(), Kt = g.K();
  const std::size_t plane = g.plane();
  const double ih2 = 1.0 / (g.h() * g.h());
  const auto& z = g.z();
  std::vector<long> id(g.nodes(), -1);
  long count = 0;
  for (int k = 1; k < Kt; ++k)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) id[g.index(i, j, k)] = count++;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(count) * 7);
  Eigen::VectorXd b(count);
  for (int k = 1; k < Kt; ++k) {
    const double h1 = z[k] - z[k - 1], h2 = z[k + 1] - z[k];
    const double a = 2.0 / (h1 * (h1 + h2)), c = 2.0 / (h2 * (h1 + h2));
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t s = g.index(i, j, k);
        const long r = id[s];
        double rb = rhs[s];
        trip.emplace_back(r, r, 4.0 * ih2 + a + c + shift);
        const std::size_t nb[6] = {s - 1, s + 1, s - n, s + n, s - plane, s + plane};
        const double w[6] = {ih2, ih2, ih2, ih2, a, c};
        for (int t = 0; t < 6; ++t) {
          if (id[nb[t]] >= 0)
            trip.emplace_back(r, id[nb[t]], -w[t]);
          else
            rb += w[t] * u[nb[t]];
        }
        b[r] = rb;
      }
  }
  Eigen::SparseMatrix<double> A(count, count);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "sparse factorisation failed");
  const Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "sparse solve failed");
  for (std::size_t s = 0; s < g.nodes(); ++s)
    if (id[s] >= 0) u[s] = x[id[s]];
}

// Continuum potential of the trilinear interpolant of F over the grid cells,
// integrated with midpoint sub-cells (finer next to the target node).
Field green_sum(const Field& F) {
  const HalfSpaceGrid& g = *F.grid;
  const int n = g.n(), Kt = g.K();
  const double kappa = green_constant(3), h = g.h();
  const auto& z = g.z();
  Field w(F.grid, F.m);
  for (int c = 0; c < F.m; ++c) {
    const double* f = F.comp(c);
    for (int kt = 1; kt < Kt + 1; ++kt)
      for (int jt = 0; jt < n; ++jt)
        for (int it = 0; it < n; ++it) {
          const double X[3] = {g.x(it), g.x(jt), z[kt]};
          double acc = 0.0;
          for (int k = 0; k < Kt; ++k)
            for (int j = 0; j < n - 1; ++j)
              for (int i = 0; i < n - 1; ++i) {
                double corner[8];
                bool any = false;
                for (int q = 0; q < 8; ++q) {
                  corner[q] = f[g.index(i + (q & 1), j + ((q >> 1) & 1), k + (q >> 2))];
                  any = any || corner[q] != 0.0;
                }
                if (!any) continue;
                const bool near = std::abs(i - it) <= 1 && std::abs(j - jt) <= 1 && std::abs(k - kt) <= 1;
                const int sub = near ? 12 : 4;
                const double dz = z[k + 1] - z[k];
                const double vol = h * h * dz / (sub * sub * sub);
                for (int c3 = 0; c3 < sub; ++c3) {
                  const double tz = (c3 + 0.5) / sub, yz = z[k] + tz * dz;
                  for (int c2 = 0; c2 < sub; ++c2) {
                    const double ty = (c2 + 0.5) / sub, yy = g.x(j) + ty * h;
                    for (int c1 = 0; c1 < sub; ++c1) {
                      const double tx = (c1 + 0.5) / sub, yx = g.x(i) + tx * h;
                      double val = 0.0;
                      for (int q = 0; q < 8; ++q)
                        val += corner[q] * ((q & 1) ? tx : 1.0 - tx) * (((q >> 1) & 1) ? ty : 1.0 - ty) *
                               ((q >> 2) ? tz : 1.0 - tz);
                      const double ex = X[0] - yx, ey = X[1] - yy, ez = X[2] - yz, es = X[2] + yz;
                      const double G = kappa * (1.0 / std::sqrt(ex * ex + ey * ey + ez * ez) -
                                                1.0 / std::sqrt(ex * ex + ey * ey + es * es));
                      acc += G * val * vol;
                    }
                  }
                }
              }
          w.at(c, g.index(it, jt, kt)) = acc;
        }
  }
  return w;
}

}  // namespace

Field dipole_boundary(const Field& F) {
  const HalfSpaceGrid& g = *F.grid;
  const int n = g.n(), Kt = g.K();
  std::vector<double> M1(F.m, 0.0);
  for (int c = 0; c < F.m; ++c) {
    std::vector<double> e(g.nodes());
    for (int k = 0; k <= Kt; ++k)
      for (std::size_t s = 0; s < g.plane(); ++s) {
        const std::size_t node = static_cast<std::size_t>(k) * g.plane() + s;
        e[node] = g.z()[k] * F.at(c, node);
      }
    M1[c] = integrate(g, e);
  }
  Field b(F.grid, F.m);
  for (int k = 1; k <= Kt; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (!(k == Kt || i == 0 || j == 0 || i == n - 1 || j == n - 1)) continue;
        const double P = poisson_kernel(3, {g.x(i), g.x(j)}, g.z()[k]);
        for (int c = 0; c < F.m; ++c) b.at(c, g.index(i, j, k)) = M1[c] * P;
      }
  return b;
}

void solve_dirichlet(Field& u, const Field& rhs, double shift, PotentialBackend backend) {
  if (u.grid != rhs.grid || u.m != rhs.m)
    throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
  if (backend == PotentialBackend::GreenSum)
    throw Error(ErrorCode::InvalidArgument, "Green-sum backend cannot impose boundary data");
  const HalfSpaceGrid& g = *u.grid;
  if (backend == PotentialBackend::FastDirect) {
    const GradedPoissonSolver solver(g);
    for (int c = 0; c < u.m; ++c) solver.solve(rhs.comp(c), u.comp(c), shift);
  } else {
    for (int c = 0; c < u.m; ++c) solve_sparse(g, rhs.comp(c), u.comp(c), shift);
  }
  for (double x : u.data)
    if (!std::isfinite(x)) throw Error(ErrorCode::SolverFailure, "non-finite potential");
}

Field newton_potential(const Field& F, const PotentialOptions& opts) {
  for (double x : F.data)
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "source must be finite");
  if (opts.backend == PotentialBackend::GreenSum) return green_sum(F);
  Field w = opts.boundary_values ? *opts.boundary_values : dipole_boundary(F);
  if (w.grid != F.grid || w.m != F.m)
    throw Error(ErrorCode::InvalidArgument, "boundary override does not match the source");
  const std::size_t plane = F.grid->plane();
  for (int c = 0; c < w.m; ++c) std::fill(w.comp(c), w.comp(c) + plane, 0.0);
  solve_dirichlet(w, F, 0.0, opts.backend);
  return w;
}

}  // namespace wharm
