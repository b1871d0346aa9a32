#include "wharm/perturbation.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "wharm/error.hpp"
#include "wharm/fast_poisson.hpp"
#include "wharm/parallel.hpp"

namespace wharm {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using VecX = Eigen::VectorXd;

// Gamma~(u)(d_j a, d_j a) summed over j at one node.
void quadratic_at(const TargetManifold& M, const double* z, const Gradient& G, std::size_t s,
                  double* out) {
  const int m = G.m;
  std::vector<double> V(m), g(m);
  std::fill(out, out + m, 0.0);
  for (int j = 0; j < G.d; ++j) {
    for (int c = 0; c < m; ++c) V[c] = G.part(j, c)[s];
    M.gamma_tilde_into(z, V.data(), V.data(), g.data());
    for (int c = 0; c < m; ++c) out[c] += g[c];
  }
}

void check_target(const BoxField& u, const TargetManifold& M) {
  if (u.m != M.dim()) throw Error(ErrorCode::InvalidArgument, "field and target dimensions differ");
}

// -L_v = -Lap + C_v on interior unknowns, index slot * m + c.
SpMat assemble_negative_linearized(const BaseMap& base, bool with_curvature) {
  const BoxGrid& g = base.grid();
  const int m = base.m(), d = g.d();
  const std::size_t NI = g.interior().size();
  const double ih2 = 1.0 / (g.h() * g.h());
  std::vector<Triplet> trips;
  trips.reserve(NI * m * (2 * d + 1 + m));
  for (std::size_t slot = 0; slot < NI; ++slot) {
    const std::size_t s = g.interior()[slot];
    const double* C = base.curvature.data() + s * m * m;
    for (int c = 0; c < m; ++c) {
      const long row = static_cast<long>(slot) * m + c;
      trips.emplace_back(row, row, 2.0 * d * ih2);
      if (with_curvature)
        for (int c2 = 0; c2 < m; ++c2)
          if (C[c * m + c2] != 0.0) trips.emplace_back(row, static_cast<long>(slot) * m + c2, C[c * m + c2]);
      for (int a = 0; a < d; ++a)
        for (int sgn : {-1, 1}) {
          const std::size_t t = sgn > 0 ? s + g.stride(a) : s - g.stride(a);
          const long ts = g.interior_slot(t);
          if (ts >= 0) trips.emplace_back(row, ts * m + c, -ih2);
        }
    }
  }
  SpMat A(static_cast<long>(NI) * m, static_cast<long>(NI) * m);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat speye(long n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

VecX gather_interior(const BoxField& F) {
  const BoxGrid& g = *F.grid;
  const std::size_t NI = g.interior().size();
  VecX b(static_cast<long>(NI) * F.m);
  for (std::size_t slot = 0; slot < NI; ++slot)
    for (int c = 0; c < F.m; ++c) b[static_cast<long>(slot) * F.m + c] = F.at(c, g.interior()[slot]);
  return b;
}

BoxField scatter_interior(const BoxGridPtr& grid, int m, const VecX& x) {
  BoxField w(grid, m, 0.0);
  for (std::size_t slot = 0; slot < grid->interior().size(); ++slot)
    for (int c = 0; c < m; ++c) w.at(c, grid->interior()[slot]) = x[static_cast<long>(slot) * m + c];
  return w;
}

class LinearizedSolver {
 public:
  explicit LinearizedSolver(const BaseMap& base) : base_(base) {
    A_ = assemble_negative_linearized(base, true);
    lu_.analyzePattern(A_);
    lu_.factorize(A_);
    if (lu_.info() != Eigen::Success)
      throw Error(ErrorCode::SingularOperator, "linearized operator is singular at grid level");
  }
  BoxField solve(const BoxField& H) const {
    const VecX x = lu_.solve(gather_interior(H));
    if (lu_.info() != Eigen::Success || !x.allFinite())
      throw Error(ErrorCode::SingularOperator, "linearized solve failed");
    return scatter_interior(base_.v.grid, base_.m(), x);
  }

 private:
  const BaseMap& base_;
  SpMat A_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

// Matrix-free I + K on component-planar interior vectors, K = (-Lap)^{-1} C_v.
class IdentityPlusK;

}  // namespace
}  // namespace wharm

namespace Eigen::internal {
template <>
struct traits<wharm::IdentityPlusK> : public Eigen::internal::traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace wharm {
namespace {

class IdentityPlusK : public Eigen::EigenBase<IdentityPlusK> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  IdentityPlusK(const BaseMap& base)
      : base_(base), solver_(base.grid().d(), base.grid().n(), base.grid().h()) {}
  Eigen::Index rows() const { return static_cast<Eigen::Index>(base_.grid().interior().size()) * base_.m(); }
  Eigen::Index cols() const { return rows(); }

  template <typename Rhs>
  Eigen::Product<IdentityPlusK, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<IdentityPlusK, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  void apply(const double* x, double* y) const {
    const BoxGrid& g = base_.grid();
    const int m = base_.m();
    const std::size_t NI = g.interior().size();
    std::vector<double> cx(NI * m, 0.0), kx(NI * m);
    for (std::size_t slot = 0; slot < NI; ++slot) {
      const double* C = base_.curvature.data() + g.interior()[slot] * m * m;
      for (int r = 0; r < m; ++r) {
        double a = 0.0;
        for (int c = 0; c < m; ++c) a += C[r * m + c] * x[c * NI + slot];
        cx[r * NI + slot] = a;
      }
    }
    for (int c = 0; c < m; ++c) solver_.solve_interior(cx.data() + c * NI, kx.data() + c * NI);
    for (std::size_t i = 0; i < NI * m; ++i) y[i] = x[i] + kx[i];
  }

 private:
  const BaseMap& base_;
  UniformPoissonSolver solver_;
};

}  // namespace
}  // namespace wharm

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<wharm::IdentityPlusK, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<wharm::IdentityPlusK, Rhs,
                                generic_product_impl<wharm::IdentityPlusK, Rhs>> {
  using Scalar = typename Product<wharm::IdentityPlusK, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const wharm::IdentityPlusK& lhs, const Rhs& rhs, const Scalar& alpha) {
    Eigen::VectorXd x = rhs, y(x.size());
    lhs.apply(x.data(), y.data());
    dst.noalias() += alpha * y;
  }
};
}  // namespace Eigen::internal

namespace wharm {

BaseMap BaseMap::make(BoxField v, const TargetManifold& M) {
  check_target(v, M);
  BaseMap b{std::move(v), M, {}, 0.0, 0.0, 0.0};
  const BoxGrid& g = b.grid();
  const int m = b.m(), d = g.d();
  const std::size_t N = g.nodes();
  const Gradient G = box_gradient(b.v);
  b.curvature.assign(N * m * m, 0.0);
  std::vector<double> z(m), grads(static_cast<std::size_t>(d) * m);
  for (std::size_t s : g.interior()) {
    for (int c = 0; c < m; ++c) z[c] = b.v.at(c, s);
    for (int j = 0; j < d; ++j)
      for (int c = 0; c < m; ++c) grads[j * m + c] = G.part(j, c)[s];
    M.curvature_matrix(z.data(), grads.data(), d, b.curvature.data() + s * m * m);
  }
  const double ih2 = 1.0 / (g.h() * g.h());
  const BoxField res = box_laplacian(b.v) + box_harmonic_source(b.v, M);
  for (std::size_t s = 0; s < N; ++s) {
    for (int c = 0; c < m; ++c) z[c] = b.v.at(c, s);
    b.sup_dist = std::max(b.sup_dist, M.dist_ptr(z.data()));
  }
  for (std::size_t s : g.interior())
    for (int c = 0; c < m; ++c) {
      const double* f = b.v.comp(c);
      for (int a = 0; a < d; ++a)
        b.max_second_difference = std::max(
            b.max_second_difference, std::abs(f[s + g.stride(a)] - 2.0 * f[s] + f[s - g.stride(a)]) * ih2);
      b.weak_residual = std::max(b.weak_residual, std::abs(res.at(c, s)));
    }
  return b;
}

BoxField BaseMap::trace() const {
  BoxField t(v.grid, m(), 0.0);
  for (std::size_t s : grid().boundary())
    for (int c = 0; c < m(); ++c) t.at(c, s) = v.at(c, s);
  return t;
}

BoxField project_tangent(const BaseMap& base, const BoxField& phi) {
  const int m = base.m();
  BoxField out = phi;
  std::vector<double> P(m * m), z(m);
  for (std::size_t s = 0; s < phi.nodes(); ++s) {
    for (int c = 0; c < m; ++c) z[c] = base.v.at(c, s);
    base.target.tangent_projector(z.data(), P.data());
    for (int r = 0; r < m; ++r) {
      double a = 0.0;
      for (int c = 0; c < m; ++c) a += P[r * m + c] * phi.at(c, s);
      out.at(r, s) = a;
    }
  }
  return out;
}

double stability_form(const BaseMap& base, const BoxField& phi_in) {
  const BoxGrid& g = base.grid();
  const int m = base.m(), d = g.d();
  for (std::size_t s : g.boundary())
    for (int c = 0; c < m; ++c)
      if (phi_in.at(c, s) != 0.0) throw Error(ErrorCode::NonzeroTrace, "test field must vanish on the boundary");
  const BoxField phi = project_tangent(base, phi_in);
  double edges = 0.0;
  for (std::size_t s = 0; s < g.nodes(); ++s)
    for (int a = 0; a < d; ++a) {
      if (g.coord_index(s, a) == g.n() - 1) continue;
      const std::size_t t = s + g.stride(a);
      for (int c = 0; c < m; ++c) {
        const double e = phi.at(c, t) - phi.at(c, s);
        edges += e * e;
      }
    }
  double curv = 0.0;
  for (std::size_t s : g.interior()) {
    const double* C = base.curvature.data() + s * m * m;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) curv += phi.at(r, s) * C[r * m + c] * phi.at(c, s);
  }
  return edges * g.cell_volume() / (g.h() * g.h()) + curv * g.cell_volume();
}

StabilityEstimate estimate_stability_constant(const BaseMap& base, const StabilityOptions& opts) {
  const BoxGrid& g = base.grid();
  const int m = base.m(), d = g.d(), t = m - 1;
  const std::size_t NI = g.interior().size();
  const double ih2 = 1.0 / (g.h() * g.h());
  // Orthonormal tangent frame per interior node: eigenvectors of the projector
  // with eigenvalue 1.
  std::vector<Eigen::MatrixXd> E(NI);
  std::vector<double> P(m * m), z(m);
  for (std::size_t slot = 0; slot < NI; ++slot) {
    const std::size_t s = g.interior()[slot];
    for (int c = 0; c < m; ++c) z[c] = base.v.at(c, s);
    base.target.tangent_projector(z.data(), P.data());
    Eigen::MatrixXd Pm = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(P.data(), m, m);
    Pm = 0.5 * (Pm + Pm.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Pm);
    E[slot] = es.eigenvectors().rightCols(t);
  }
  std::vector<Triplet> trips;
  std::vector<double> gersh(NI * t, 0.0), diag(NI * t, 0.0);
  for (std::size_t slot = 0; slot < NI; ++slot) {
    const std::size_t s = g.interior()[slot];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> C(
        base.curvature.data() + s * m * m, m, m);
    const Eigen::MatrixXd B = 2.0 * d * ih2 * Eigen::MatrixXd::Identity(t, t) + E[slot].transpose() * C * E[slot];
    auto add = [&](long r, long c, double v) {
      trips.emplace_back(r, c, v);
      if (r == c)
        diag[r] += v;
      else
        gersh[r] += std::abs(v);
    };
    for (int a = 0; a < t; ++a)
      for (int b = 0; b < t; ++b) add(static_cast<long>(slot) * t + a, static_cast<long>(slot) * t + b, B(a, b));
    for (int ax = 0; ax < d; ++ax)
      for (int sgn : {-1, 1}) {
        const std::size_t nb = sgn > 0 ? s + g.stride(ax) : s - g.stride(ax);
        const long ns = g.interior_slot(nb);
        if (ns < 0) continue;
        const Eigen::MatrixXd O = -ih2 * E[slot].transpose() * E[ns];
        for (int a = 0; a < t; ++a)
          for (int b = 0; b < t; ++b) add(static_cast<long>(slot) * t + a, ns * t + b, O(a, b));
      }
  }
  const long dim = static_cast<long>(NI) * t;
  SpMat A(dim, dim);
  A.setFromTriplets(trips.begin(), trips.end());
  double lower = std::numeric_limits<double>::infinity();
  for (long r = 0; r < dim; ++r) lower = std::min(lower, diag[r] - gersh[r]);
  // Shift so that A + shift I is positive definite.
  const double shift = std::max(0.0, -lower) + 1.0;
  const SpMat As = A + shift * speye(dim);
  // Block inverse iteration with Rayleigh-Ritz, so near-degenerate lowest
  // eigenvalues do not stall convergence. CG keeps memory linear in 3D.
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg(As);
  cg.setTolerance(1e-14);
  cg.setMaxIterations(10000);
  const int p = static_cast<int>(std::min<long>(opts.block_size, dim));
  Eigen::MatrixXd X(dim, p);
  for (long r = 0; r < dim; ++r)
    for (int c = 0; c < p; ++c) X(r, c) = 1.0 + 0.25 * std::sin(0.7 * r + 1.3 * c) + 0.1 * c * std::cos(0.11 * r);
  X = Eigen::HouseholderQR<Eigen::MatrixXd>(X).householderQ() * Eigen::MatrixXd::Identity(dim, p);
  StabilityEstimate est;
  double lam = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::MatrixXd Y(dim, p);
    for (int c = 0; c < p; ++c) Y.col(c) = cg.solveWithGuess(X.col(c), X.col(c));
    if (cg.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "stability inner solve failed");
    Y = Eigen::HouseholderQR<Eigen::MatrixXd>(Y).householderQ() * Eigen::MatrixXd::Identity(dim, p);
    Eigen::MatrixXd T = Y.transpose() * (A * Y);
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    X = Y * es.eigenvectors();
    const double next = es.eigenvalues()(0);
    est.iterations = it;
    const bool done = std::abs(next - lam) <= opts.tolerance * std::max(1.0, std::abs(next));
    lam = next;
    if (done) {
      est.converged = true;
      break;
    }
  }
  est.M = lam;
  est.stable = lam > 0.0;
  if (!est.stable && opts.throw_if_indefinite)
    throw Error(ErrorCode::IndefiniteForm, "stability form is not positive at grid level");
  return est;
}

BoxField apply_linearized(const BaseMap& base, const BoxField& w) {
  const int m = base.m();
  BoxField L = box_laplacian(w);
  for (std::size_t s : base.grid().interior()) {
    const double* C = base.curvature.data() + s * m * m;
    for (int r = 0; r < m; ++r) {
      double a = 0.0;
      for (int c = 0; c < m; ++c) a += C[r * m + c] * w.at(c, s);
      L.at(r, s) -= a;
    }
  }
  return L;
}

BoxField solve_linearized(const BaseMap& base, const BoxField& H) {
  return LinearizedSolver(base).solve(H);
}

BoxField solve_linearized_two_stage(const BaseMap& base, const BoxField& H, double tol) {
  const BoxGrid& g = base.grid();
  const int m = base.m();
  const std::size_t NI = g.interior().size();
  const BoxField w0 = box_potential(H);
  VecX b(static_cast<long>(NI) * m);
  for (int c = 0; c < m; ++c)
    for (std::size_t slot = 0; slot < NI; ++slot) b[c * NI + slot] = w0.at(c, g.interior()[slot]);
  const IdentityPlusK op(base);
  Eigen::GMRES<IdentityPlusK, Eigen::IdentityPreconditioner> gmres(op);
  gmres.setTolerance(tol);
  gmres.setMaxIterations(2000);
  gmres.set_restart(200);
  const VecX x = gmres.solve(b);
  if (gmres.info() != Eigen::Success || !x.allFinite())
    throw Error(ErrorCode::SingularOperator, "correction equation did not converge");
  BoxField w(base.v.grid, m, 0.0);
  for (int c = 0; c < m; ++c)
    for (std::size_t slot = 0; slot < NI; ++slot) w.at(c, g.interior()[slot]) = x[c * NI + slot];
  return w;
}

std::string InvertibilityReport::to_kv() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "sigma_min = %.17g\npass = %d\niterations = %d\n", sigma_min, pass ? 1 : 0,
                iterations);
  return buf;
}

InvertibilityReport check_invertibility(const BaseMap& base) {
  InvertibilityReport rep;
  const SpMat L = assemble_negative_linearized(base, true);
  const SpMat D = assemble_negative_linearized(base, false);
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(L);
  lu.factorize(L);
  if (lu.info() != Eigen::Success) return rep;
  // Largest eigenvalue of (-L)^{-1} Lap^2 (-L)^{-1} is 1 / sigma_min^2.
  VecX x(L.rows());
  for (long r = 0; r < x.size(); ++r) x[r] = 1.0 + 0.25 * std::cos(0.3 * r);
  x.normalize();
  double lam = 0.0;
  for (int it = 1; it <= 500; ++it) {
    const VecX y = lu.solve(x);
    const VecX z = D * y;
    const double next = z.squaredNorm();
    x = lu.solve(VecX(D * z));
    rep.iterations = it;
    if (!x.allFinite() || !std::isfinite(next)) {
      lam = std::numeric_limits<double>::infinity();
      break;
    }
    x.normalize();
    const bool done = it > 1 && std::abs(next - lam) <= 1e-12 * next;
    lam = next;
    if (done) break;
  }
  rep.sigma_min = std::isfinite(lam) && lam > 0.0 ? 1.0 / std::sqrt(lam) : 0.0;
  rep.pass = rep.sigma_min > 1e-8;
  return rep;
}

BoxField box_harmonic_source(const BoxField& u, const TargetManifold& M) {
  check_target(u, M);
  const int m = u.m;
  const Gradient G = box_gradient(u);
  BoxField out(u.grid, m, 0.0);
  const auto& in = u.grid->interior();
  parallel_for(in.size(), [&](std::size_t i) {
    const std::size_t s = in[i];
    std::vector<double> z(m), acc(m);
    for (int c = 0; c < m; ++c) z[c] = u.at(c, s);
    quadratic_at(M, z.data(), G, s, acc.data());
    for (int c = 0; c < m; ++c) out.at(c, s) = acc[c];
  });
  return out;
}

NonlinearityParts nonlinearity_F(const BaseMap& base, const BoxField& phi_h, const BoxField& w) {
  const TargetManifold& M = base.target;
  const int m = base.m();
  const BoxField u = base.v + phi_h + w;
  const Gradient Gu = box_gradient(u), Gv = box_gradient(base.v);
  NonlinearityParts P{BoxField(u.grid, m), BoxField(u.grid, m), BoxField(u.grid, m), BoxField(u.grid, m)};
  const auto& in = u.grid->interior();
  parallel_for(in.size(), [&](std::size_t i) {
    const std::size_t s = in[i];
    std::vector<double> zv(m), zu(m), vuu(m), vvv(m), uuu(m);
    for (int c = 0; c < m; ++c) {
      zv[c] = base.v.at(c, s);
      zu[c] = u.at(c, s);
    }
    quadratic_at(M, zv.data(), Gu, s, vuu.data());
    quadratic_at(M, zv.data(), Gv, s, vvv.data());
    quadratic_at(M, zu.data(), Gu, s, uuu.data());
    const double* C = base.curvature.data() + s * m * m;
    for (int r = 0; r < m; ++r) {
      double cw = 0.0;
      for (int c = 0; c < m; ++c) cw += C[r * m + c] * w.at(c, s);
      P.F1.at(r, s) = vuu[r] - vvv[r];
      P.F2.at(r, s) = cw;
      P.F3.at(r, s) = uuu[r] - vuu[r];
      P.total.at(r, s) = P.F1.at(r, s) + P.F2.at(r, s) + P.F3.at(r, s);
    }
  });
  return P;
}

BoxField PerturbationProblem::h() const {
  if (!base) throw Error(ErrorCode::InvalidArgument, "perturbation problem has no base map");
  BoxField out(f.grid, f.m, 0.0);
  for (std::size_t s : f.grid->boundary())
    for (int c = 0; c < f.m; ++c) out.at(c, s) = f.at(c, s) - base->v.at(c, s);
  return out;
}

BoxField PerturbationProblem::phi_h() const { return box_harmonic_extension(h()); }

namespace {

template <class Step>
void fixed_point_loop(BoxField& x, const Step& step, int max_iterations, double tol, int burn_in, int window,
                      const TargetManifold& M, const std::function<BoxField(const BoxField&)>& full,
                      const BoxField& reference, IterationTrace& tr) {
  int streak = 0;
  for (int k = 0; k < max_iterations; ++k) {
    BoxField next = step(x);
    const double r = w_norm(next - x).total;
    x = std::move(next);
    tr.iterations = k + 1;
    if (!tr.residuals.empty()) {
      const double prev = tr.residuals.back();
      tr.ratios.push_back(prev > 0.0 ? r / prev : std::numeric_limits<double>::quiet_NaN());
    }
    tr.residuals.push_back(r);
    const BoxField u = full(x);
    tr.distance_to_v.push_back(w_norm(u - reference).total);
    double sd = 0.0;
    std::vector<double> z(u.m);
    for (std::size_t s = 0; s < u.nodes(); ++s) {
      for (int c = 0; c < u.m; ++c) z[c] = u.at(c, s);
      sd = std::max(sd, M.dist_ptr(z.data()));
    }
    tr.sup_dist.push_back(sd);
    if (r < tol) {
      tr.converged = true;
      return;
    }
    if (!std::isfinite(r)) {
      tr.failure = ErrorCode::NonContraction;
      return;
    }
    if (tr.ratios.size() > static_cast<std::size_t>(burn_in) && tr.ratios.back() >= 1.0) {
      if (++streak >= window) {
        tr.failure = ErrorCode::NonContraction;
        return;
      }
    } else {
      streak = 0;
    }
  }
  tr.failure = ErrorCode::MaxIterations;
}

}  // namespace

BoxSolveResult solve_perturbation(const PerturbationProblem& problem) {
  if (!problem.base) throw Error(ErrorCode::InvalidArgument, "perturbation problem has no base map");
  const BaseMap& base = *problem.base;
  const PerturbationOptions& o = problem.options;
  const BoxField phi = problem.phi_h();
  const LinearizedSolver solver(base);
  BoxSolveResult res;
  res.w = BoxField(base.v.grid, base.m(), 0.0);
  const BoxField v_phi = base.v + phi;
  fixed_point_loop(
      res.w, [&](const BoxField& w) { return solver.solve(nonlinearity_F(base, phi, w).total); }, o.max_iterations,
      o.residual_tolerance, o.burn_in, o.noncontraction_window, base.target,
      [&](const BoxField& w) { return v_phi + w; }, base.v, res.trace);
  res.u = base.v + phi + res.w;
  return res;
}

BoxSolveResult box_picard(const BoxField& f, const TargetManifold& M, const SolverOptions& opts) {
  opts.validate();
  check_target(f, M);
  const BoxField ext = box_harmonic_extension(f);
  BoxSolveResult res;
  res.u = ext;
  fixed_point_loop(
      res.u, [&](const BoxField& u) { return ext + box_potential(box_harmonic_source(u, M)); }, opts.max_iterations,
      opts.residual_tolerance, opts.burn_in, opts.noncontraction_window, M, [](const BoxField& u) { return u; },
      ext, res.trace);
  res.w = res.u - ext;
  return res;
}

BoxFlowResult box_gradient_flow(const BoxField& g, const TargetManifold& M, const FlowOptions& opts) {
  check_target(g, M);
  const BoxGrid& grid = *g.grid;
  const int m = g.m;
  BoxFlowResult res;
  res.u = box_harmonic_extension(g);
  std::vector<double> z(m), q(m);
  auto project_interior = [&](const BoxField& src, double* change) {
    for (std::size_t s : grid.interior()) {
      for (int c = 0; c < m; ++c) z[c] = src.at(c, s);
      M.project_into(z.data(), q.data());
      for (int c = 0; c < m; ++c) {
        if (change) *change = std::max(*change, std::abs(q[c] - res.u.at(c, s)));
        res.u.at(c, s) = q[c];
      }
    }
  };
  project_interior(BoxField(res.u), nullptr);
  const double inv_tau = 1.0 / opts.tau;
  for (int step = 1; step <= opts.max_steps; ++step) {
    BoxField rhs = box_harmonic_source(res.u, M);
    for (std::size_t i = 0; i < rhs.data.size(); ++i) rhs.data[i] += inv_tau * res.u.data[i];
    BoxField ut = res.u;
    box_solve_dirichlet(ut, rhs, inv_tau);
    double change = 0.0;
    project_interior(ut, &change);
    res.steps = step;
    res.last_change = change;
    if (change < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

BoxConstraintReport verify_box_constraint(const BoxField& u, const TargetManifold& M) {
  check_target(u, M);
  const BoxGrid& g = *u.grid;
  const int m = u.m;
  BoxConstraintReport rep;
  std::vector<double> z(m), q(m);
  BoxField G(u.grid, 1, 0.0);
  for (std::size_t s = 0; s < g.nodes(); ++s) {
    for (int c = 0; c < m; ++c) z[c] = u.at(c, s);
    const double dd = M.dist_ptr(z.data());
    rep.sup_dist = std::max(rep.sup_dist, dd);
    if (g.is_boundary(s)) rep.boundary_dist = std::max(rep.boundary_dist, dd);
  }
  rep.tube_ok = rep.sup_dist < M.tube_radius();
  if (!rep.tube_ok) {
    rep.subharmonic_defect = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  for (std::size_t s = 0; s < g.nodes(); ++s) {
    for (int c = 0; c < m; ++c) z[c] = u.at(c, s);
    M.project_into(z.data(), q.data());
    double a = 0.0;
    for (int c = 0; c < m; ++c) a += (z[c] - q[c]) * (z[c] - q[c]);
    G.data[s] = 0.5 * a;
  }
  const BoxField lap = box_laplacian(G);
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t s : g.interior()) mn = std::min(mn, lap.data[s]);
  rep.subharmonic_defect = std::isfinite(mn) ? mn : 0.0;
  return rep;
}

}  // namespace wharm
