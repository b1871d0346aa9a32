#include "wharm/target.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "wharm/error.hpp"
#include "wharm/jet.hpp"

namespace wharm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(const double* x, int m) {
  double s = 0.0;
  for (int c = 0; c < m; ++c) s += x[c] * x[c];
  return std::sqrt(s);
}

double dotp(const double* x, const double* y, int m) {
  double s = 0.0;
  for (int c = 0; c < m; ++c) s += x[c] * y[c];
  return s;
}

Jet psi(Jet s) {
  if (s.v <= 0.0) return Jet::constant(0.0);
  return exp(Jet::constant(0.0) - reciprocal(s));
}

Jet chi_jet(Jet t, double inner, double outer) {
  const Jet s = (Jet::constant(outer) - t) * Jet::constant(1.0 / (outer - inner));
  if (s.v >= 1.0) return Jet::constant(1.0);
  if (s.v <= 0.0) return Jet::constant(0.0);
  const Jet a = psi(s), b = psi(1.0 - s);
  return a / (a + b);
}

// Radial factor of the sphere extension P(z) = z * phi(|z|): 1/r for r >= 1,
// identity near the origin, blended on the inner side of the sphere.
Jet radial_factor(double r, double inner, double outer) {
  const Jet R = Jet::variable(r);
  if (r >= 1.0) return reciprocal(R);
  if (1.0 - r >= outer) return Jet::constant(1.0);
  const Jet chi = chi_jet(1.0 - R, inner, outer);
  return 1.0 + chi * (reciprocal(R) - 1.0);
}

}  // namespace

double blend_cutoff(double t, double inner, double outer) {
  return chi_jet(Jet::constant(t), inner, outer).v;
}

TargetManifold TargetManifold::sphere(int m, TargetOptions opts) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "sphere ambient dimension must be >= 2");
  if (!(opts.tube_radius > 0.0 && opts.tube_radius < 1.0))
    throw Error(ErrorCode::InvalidArgument, "sphere tube radius must lie in (0, 1)");
  if (!(opts.cutoff_inner > 0.0 && opts.cutoff_inner < opts.cutoff_outer &&
        opts.cutoff_outer <= opts.tube_radius))
    throw Error(ErrorCode::InvalidArgument, "need 0 < cutoff_inner < cutoff_outer <= tube radius");
  TargetManifold t;
  t.sphere_ = true;
  t.m_ = m;
  t.opts_ = opts;
  return t;
}

TargetManifold TargetManifold::implicit(int m, ImplicitSurface surface, TargetOptions opts) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "ambient dimension must be >= 2");
  if (!surface.phi || !surface.grad)
    throw Error(ErrorCode::InvalidArgument, "implicit surface needs phi and grad");
  if (!(opts.tube_radius > 0.0 && opts.cutoff_inner > 0.0 &&
        opts.cutoff_inner < opts.cutoff_outer && opts.cutoff_outer <= opts.tube_radius))
    throw Error(ErrorCode::InvalidArgument, "need 0 < cutoff_inner < cutoff_outer <= tube radius");
  TargetManifold t;
  t.sphere_ = false;
  t.m_ = m;
  t.opts_ = opts;
  t.surface_ = std::move(surface);
  return t;
}

TargetManifold TargetManifold::with_curvature_sign(CurvatureSign s) const {
  TargetManifold t = *this;
  t.opts_.curvature_sign = s;
  return t;
}

bool TargetManifold::newton_project(const double* z, double* q) const {
  const int m = m_;
  const int n = m + 1;
  Eigen::VectorXd x(n), g(m), r(n), trial(n), gt(m);
  surface_.grad(z, g.data());
  const double g2 = g.squaredNorm();
  if (!(g2 > 0.0) || !std::isfinite(g2)) return false;
  const double lam0 = surface_.phi(z) / g2;
  for (int c = 0; c < m; ++c) x[c] = z[c] - lam0 * g[c];
  x[m] = lam0;

  auto residual = [&](const Eigen::VectorXd& xx, Eigen::VectorXd& out) {
    Eigen::VectorXd gg(m);
    surface_.grad(xx.data(), gg.data());
    for (int c = 0; c < m; ++c) out[c] = xx[c] - z[c] + xx[m] * gg[c];
    out[m] = surface_.phi(xx.data());
  };

  constexpr double fd = 1e-6;
  residual(x, r);
  for (int it = 0; it < opts_.newton_max_iterations; ++it) {
    const double rn = r.norm();
    if (!std::isfinite(rn)) return false;
    if (rn <= opts_.newton_tolerance) {
      for (int c = 0; c < m; ++c) q[c] = x[c];
      return true;
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd gp(m), gm(m);
    Eigen::VectorXd xp = x.head(m), xm = x.head(m);
    for (int k = 0; k < m; ++k) {
      xp[k] += fd;
      xm[k] -= fd;
      surface_.grad(xp.data(), gp.data());
      surface_.grad(xm.data(), gm.data());
      xp[k] = x[k];
      xm[k] = x[k];
      J.block(0, k, m, 1) = x[m] * (gp - gm) / (2.0 * fd);
    }
    J.topLeftCorner(m, m) = 0.5 * (J.topLeftCorner(m, m) + J.topLeftCorner(m, m).transpose()).eval();
    J.topLeftCorner(m, m) += Eigen::MatrixXd::Identity(m, m);
    surface_.grad(x.data(), gt.data());
    J.block(0, m, m, 1) = gt;
    J.block(m, 0, 1, m) = gt.transpose();
    const Eigen::VectorXd step = J.fullPivLu().solve(-r);
    double alpha = 1.0;
    Eigen::VectorXd rt(n);
    for (int k = 0; k < 30; ++k) {
      trial = x + alpha * step;
      residual(trial, rt);
      if (rt.norm() < rn) break;
      alpha *= 0.5;
    }
    x = trial;
    r = rt;
  }
  if (r.norm() <= opts_.newton_tolerance) {
    for (int c = 0; c < m; ++c) q[c] = x[c];
    return true;
  }
  return false;
}

void TargetManifold::project_into(const double* z, double* q) const {
  if (sphere_) {
    const double r = norm(z, m_);
    if (!(r > 0.0)) throw Error(ErrorCode::OutsideTube, "radial projection undefined at the origin");
    for (int c = 0; c < m_; ++c) q[c] = z[c] / r;
    return;
  }
  if (!newton_project(z, q)) throw Error(ErrorCode::NewtonDivergence, "closest-point Newton failed");
  double d2 = 0.0;
  for (int c = 0; c < m_; ++c) d2 += (z[c] - q[c]) * (z[c] - q[c]);
  if (std::sqrt(d2) >= opts_.tube_radius)
    throw Error(ErrorCode::OutsideTube, "point is outside the tubular neighbourhood");
}

double TargetManifold::dist_ptr(const double* z) const {
  if (sphere_) return std::abs(norm(z, m_) - 1.0);
  Vec q(m_);
  if (!newton_project(z, q.data())) return kInf;
  double d2 = 0.0;
  for (int c = 0; c < m_; ++c) d2 += (z[c] - q[c]) * (z[c] - q[c]);
  const double d = std::sqrt(d2);
  return d < opts_.tube_radius ? d : kInf;
}

void TargetManifold::extended_projection_into(const double* z, double* out) const {
  if (sphere_) {
    const double f = radial_factor(norm(z, m_), opts_.cutoff_inner, opts_.cutoff_outer).v;
    for (int c = 0; c < m_; ++c) out[c] = z[c] * f;
    return;
  }
  Vec q(m_);
  const bool ok = newton_project(z, q.data());
  double d = kInf;
  if (ok) {
    double d2 = 0.0;
    for (int c = 0; c < m_; ++c) d2 += (z[c] - q[c]) * (z[c] - q[c]);
    d = std::sqrt(d2);
  }
  if (!(d < opts_.cutoff_outer)) {
    for (int c = 0; c < m_; ++c) out[c] = z[c];
    return;
  }
  const double chi = blend_cutoff(d, opts_.cutoff_inner, opts_.cutoff_outer);
  for (int c = 0; c < m_; ++c) out[c] = z[c] + chi * (q[c] - z[c]);
}

bool TargetManifold::sphere_formula_valid(const double* z) const {
  return sphere_ && norm(z, m_) >= 1.0 - opts_.cutoff_inner;
}

void TargetManifold::gamma_tilde_into(const double* z, const double* V, const double* W,
                                      double* out) const {
  const int m = m_;
  if (sphere_) {
    const double r = norm(z, m);
    const Jet f = radial_factor(r, opts_.cutoff_inner, opts_.cutoff_outer);
    if (f.d1 == 0.0 && f.d2 == 0.0) {
      for (int c = 0; c < m; ++c) out[c] = 0.0;
      return;
    }
    const double zv = dotp(z, V, m), zw = dotp(z, W, m), vw = dotp(V, W, m);
    const double a = f.d1 / r;
    // Products of zv and zw are formed first so that V <-> W is bitwise symmetric.
    const double vzw = zv * zw;
    const double b = f.d2 * vzw / (r * r) + f.d1 * (vw / r - vzw / (r * r * r));
    for (int c = 0; c < m; ++c) out[c] = -(a * (V[c] * zw + W[c] * zv) + z[c] * b);
    return;
  }
  const double nv = norm(V, m), nw = norm(W, m);
  if (nv == 0.0 || nw == 0.0) {
    for (int c = 0; c < m; ++c) out[c] = 0.0;
    return;
  }
  constexpr double eps = 1e-3;
  Vec pp(m), pm(m), mp(m), mm(m), x(m);
  auto eval = [&](double sv, double sw, Vec& res) {
    for (int c = 0; c < m; ++c) x[c] = z[c] + (sv * eps * V[c] / nv + sw * eps * W[c] / nw);
    extended_projection_into(x.data(), res.data());
  };
  eval(1, 1, pp);
  eval(1, -1, pm);
  eval(-1, 1, mp);
  eval(-1, -1, mm);
  const double scale = nv * nw / (4.0 * eps * eps);
  // (pp + mm) - (pm + mp) is symmetric under V <-> W in floating point.
  for (int c = 0; c < m; ++c) out[c] = -((pp[c] + mm[c]) - (pm[c] + mp[c])) * scale;
}

void TargetManifold::tangent_projector(const double* v, double* P) const {
  const int m = m_;
  Vec nu(m);
  if (sphere_) {
    const double r = norm(v, m);
    for (int c = 0; c < m; ++c) nu[c] = v[c] / r;
  } else {
    Vec q(m);
    project_into(v, q.data());
    surface_.grad(q.data(), nu.data());
    const double gn = norm(nu.data(), m);
    for (int c = 0; c < m; ++c) nu[c] /= gn;
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) P[a * m + b] = (a == b ? 1.0 : 0.0) - nu[a] * nu[b];
}

void TargetManifold::shape_operator(const double* q, double* S) const {
  const int m = m_;
  constexpr double fd = 1e-6;
  Vec g(m), gp(m), gm(m), x(q, q + m), H(m * m), P(m * m);
  surface_.grad(q, g.data());
  const double gn = norm(g.data(), m);
  for (int k = 0; k < m; ++k) {
    x[k] = q[k] + fd;
    surface_.grad(x.data(), gp.data());
    x[k] = q[k] - fd;
    surface_.grad(x.data(), gm.data());
    x[k] = q[k];
    for (int a = 0; a < m; ++a) H[a * m + k] = (gp[a] - gm[a]) / (2.0 * fd);
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < a; ++b) H[a * m + b] = H[b * m + a] = 0.5 * (H[a * m + b] + H[b * m + a]);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) P[a * m + b] = (a == b ? 1.0 : 0.0) - g[a] * g[b] / (gn * gn);
  // S = P H P / |grad phi|
  Vec T(m * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < m; ++k) T[a * m + b] += H[a * m + k] * P[k * m + b];
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += P[a * m + k] * T[k * m + b];
      S[a * m + b] = s / gn;
    }
}

void TargetManifold::curvature_matrix(const double* v, const double* grads, int d, double* C) const {
  const int m = m_;
  Vec P(m * m), a(m);
  tangent_projector(v, P.data());
  for (int k = 0; k < m * m; ++k) C[k] = 0.0;
  if (sphere_) {
    // C = sum_j (a_j a_j^T - |a_j|^2 P), a_j = P d_j v
    for (int j = 0; j < d; ++j) {
      const double* g = grads + static_cast<std::size_t>(j) * m;
      for (int r = 0; r < m; ++r) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += P[r * m + k] * g[k];
        a[r] = s;
      }
      const double a2 = dotp(a.data(), a.data(), m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) C[r * m + c] += a[r] * a[c] - a2 * P[r * m + c];
    }
  } else {
    Vec q(m), S(m * m), Sa(m);
    project_into(v, q.data());
    shape_operator(q.data(), S.data());
    // C = -sum_j (<S a_j, a_j> S - (S a_j)(S a_j)^T)
    for (int j = 0; j < d; ++j) {
      const double* g = grads + static_cast<std::size_t>(j) * m;
      for (int r = 0; r < m; ++r) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += P[r * m + k] * g[k];
        a[r] = s;
      }
      for (int r = 0; r < m; ++r) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += S[r * m + k] * a[k];
        Sa[r] = s;
      }
      const double saa = dotp(Sa.data(), a.data(), m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) C[r * m + c] -= saa * S[r * m + c] - Sa[r] * Sa[c];
    }
  }
  if (opts_.curvature_sign == CurvatureSign::Literal)
    for (int k = 0; k < m * m; ++k) C[k] = -C[k];
}

void TargetManifold::check_gradient_bound(const std::vector<Vec>& samples, double min_norm) const {
  if (sphere_) return;
  Vec g(m_);
  for (const Vec& s : samples) {
    surface_.grad(s.data(), g.data());
    if (!(norm(g.data(), m_) >= min_norm))
      throw Error(ErrorCode::InvalidArgument, "level-set gradient degenerates on the tube");
  }
}

Vec TargetManifold::project(const Vec& z) const {
  Vec q(m_);
  project_into(z.data(), q.data());
  return q;
}

Vec TargetManifold::extended_projection(const Vec& z) const {
  Vec q(m_);
  extended_projection_into(z.data(), q.data());
  return q;
}

Vec TargetManifold::gamma_tilde(const Vec& z, const Vec& V, const Vec& W) const {
  Vec out(m_);
  gamma_tilde_into(z.data(), V.data(), W.data(), out.data());
  return out;
}

Vec TargetManifold::curvature_term(const Vec& v, const std::vector<Vec>& v_grad,
                                   const Vec& phi) const {
  const int d = static_cast<int>(v_grad.size());
  Vec grads;
  for (const Vec& g : v_grad) grads.insert(grads.end(), g.begin(), g.end());
  Vec C(m_ * m_), out(m_, 0.0);
  curvature_matrix(v.data(), grads.data(), d, C.data());
  for (int r = 0; r < m_; ++r)
    for (int c = 0; c < m_; ++c) out[r] += C[r * m_ + c] * phi[c];
  return out;
}

Vec TargetManifold::upsilon(const Vec& z) const {
  Vec q = project(z);
  for (int c = 0; c < m_; ++c) q[c] = z[c] - q[c];
  return q;
}

double TargetManifold::dist(const Vec& z) const { return dist_ptr(z.data()); }

}  // namespace wharm
