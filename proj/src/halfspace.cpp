#include "wharm/halfspace.hpp"

#include <algorithm>
#include <cmath>

#include "wharm/error.hpp"
#include "wharm/parallel.hpp"
#include "wharm/simd.hpp"

namespace wharm {

HalfSpaceGrid::HalfSpaceGrid(int n, double L, double H, double sigma, int d)
    : d_(d), n_(n), K_(0), L_(L), h_(0.0), H_(H), sigma_(sigma) {
  if (d != 3) throw Error(ErrorCode::InvalidArgument, "half-space grids support d = 3 only");
  if (n < 5 || n % 2 == 0) throw Error(ErrorCode::InvalidArgument, "n must be odd and >= 5");
  if (!(L > 0.0 && H > 0.0)) throw Error(ErrorCode::InvalidArgument, "L and H must be positive");
  if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorCode::InvalidArgument, "sigma must lie in (0,1)");
  h_ = 2.0 * L / (n - 1);
  K_ = 4;
  while (H * std::pow(sigma, K_ - 1) > h_) ++K_;
  z_.assign(K_ + 1, 0.0);
  for (int k = 1; k <= K_; ++k) z_[k] = H * std::pow(sigma, K_ - k);
  seg_lo_.assign(K_ + 1, 0.0);
  seg_hi_.assign(K_ + 1, 0.0);
  seg_lo_[1] = seg_hi_[1] = 0.5 * z_[1];
  for (int k = 2; k <= K_; ++k) {
    const double half = 0.5 * (std::log(z_[k]) - std::log(z_[k - 1]));
    seg_lo_[k] = half * z_[k - 1];
    seg_hi_[k] = half * z_[k];
  }
  zw_.assign(K_ + 1, 0.0);
  for (int k = 0; k <= K_; ++k) zw_[k] = seg_hi_[k] + (k < K_ ? seg_lo_[k + 1] : 0.0);
}

double HalfSpaceGrid::refinement_sigma(int n) { return std::pow(0.75, 128.0 / (n - 1)); }

std::shared_ptr<const HalfSpaceGrid> HalfSpaceGrid::refined(int n, double L, double H) {
  return std::make_shared<const HalfSpaceGrid>(n, L, H, refinement_sigma(n));
}

Field::Field(GridPtr g, int comps, double fill)
    : grid(std::move(g)), m(comps), data(grid->nodes() * comps, fill) {}

Vec Field::value(std::size_t node) const {
  Vec v(m);
  for (int c = 0; c < m; ++c) v[c] = at(c, node);
  return v;
}

void Field::set_value(std::size_t node, const Vec& v) {
  for (int c = 0; c < m; ++c) at(c, node) = v[c];
}

namespace {
void check_same(const Field& a, const Field& b) {
  if (a.grid != b.grid || a.m != b.m)
    throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
  check_same(a, b);
  Field r = a;
  for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] += b.data[i];
  return r;
}

Field operator-(const Field& a, const Field& b) {
  check_same(a, b);
  Field r = a;
  for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
  return r;
}

Field operator*(double s, const Field& a) {
  Field r = a;
  for (double& x : r.data) x *= s;
  return r;
}

double Gradient::norm2(std::size_t node) const {
  double s = 0.0;
  for (std::size_t p = 0; p < static_cast<std::size_t>(d) * m; ++p) {
    const double g = data[p * nodes + node];
    s += g * g;
  }
  return s;
}

BoundaryData::BoundaryData(int n_, double L_, Vec p_)
    : n(n_), L(L_), p(std::move(p_)), g(static_cast<std::size_t>(n_) * n_ * p.size(), 0.0) {}

Vec BoundaryData::value(std::size_t s) const {
  Vec v(p);
  for (int c = 0; c < m(); ++c) v[c] += dev(c, s);
  return v;
}

bool BoundaryData::compactly_supported() const {
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(j) * n + i;
      bool nonzero = false;
      for (int c = 0; c < m(); ++c) nonzero = nonzero || dev(c, s) != 0.0;
      if (nonzero && !(std::abs(x(i)) < 0.5 * L && std::abs(x(j)) < 0.5 * L)) return false;
    }
  return true;
}

double BoundaryData::sup_deviation() const {
  double best = 0.0;
  for (std::size_t s = 0; s < samples(); ++s) {
    double a = 0.0;
    for (int c = 0; c < m(); ++c) a += dev(c, s) * dev(c, s);
    best = std::max(best, std::sqrt(a));
  }
  return best;
}

void BoundaryData::check_on_target(const TargetManifold& M, double tol) const {
  if (M.dim() != m()) throw Error(ErrorCode::InvalidArgument, "data/target dimension mismatch");
  for (std::size_t s = 0; s < samples(); ++s)
    if (!(M.dist(value(s)) <= tol))
      throw Error(ErrorCode::InvalidArgument, "boundary sample is off the target manifold");
}

double poisson_constant(int d) { return std::tgamma(0.5 * d) / std::pow(M_PI, 0.5 * d); }

double green_constant(int d) {
  return std::tgamma(0.5 * d) / (2.0 * (d - 2) * std::pow(M_PI, 0.5 * d));
}

double poisson_kernel(int d, const Vec& xprime, double xd) {
  if (!(xd > 0.0)) throw Error(ErrorCode::NonpositiveHeight, "kernel height must be positive");
  double r2 = xd * xd;
  for (double c : xprime) r2 += c * c;
  return poisson_constant(d) * xd / std::pow(r2, 0.5 * d);
}

double poisson_kernel(const HalfSpaceGrid& grid, const Vec& xprime, double xd) {
  return poisson_kernel(grid.d(), xprime, xd);
}

double poisson_rectangle(double a, double b, double z) {
  return std::atan2(a * b, z * std::sqrt(a * a + b * b + z * z)) / (2.0 * M_PI);
}

namespace {

// d/dz of poisson_rectangle.
double poisson_rectangle_dz(double a, double b, double z) {
  const double R = std::sqrt(a * a + b * b + z * z);
  const double ab = a * b;
  return -ab * (R * R + z * z) / (2.0 * M_PI * R * (z * z * R * R + ab * ab));
}

double dist_pow(const Vec& x, const Vec& y, bool reflect, double power) {
  double s = 0.0;
  const std::size_t d = x.size();
  for (std::size_t a = 0; a < d; ++a) {
    const double ya = (reflect && a + 1 == d) ? -y[a] : y[a];
    s += (x[a] - ya) * (x[a] - ya);
  }
  return std::pow(s, 0.5 * power);
}

}  // namespace

double green_function(int d, const Vec& x, const Vec& y) {
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw Error(ErrorCode::InvalidArgument, "point dimension mismatch");
  if (x[d - 1] < 0.0 || y[d - 1] < 0.0)
    throw Error(ErrorCode::NonpositiveHeight, "points must lie in the closed half-space");
  if (x == y) throw Error(ErrorCode::CoincidentPoints, "Green function is singular at x = y");
  return green_constant(d) * (dist_pow(x, y, false, 2.0 - d) - dist_pow(x, y, true, 2.0 - d));
}

double green_function(const HalfSpaceGrid& grid, const Vec& x, const Vec& y) {
  return green_function(grid.d(), x, y);
}

Vec green_gradient_x(int d, const Vec& x, const Vec& y) {
  if (x == y) throw Error(ErrorCode::CoincidentPoints, "Green function is singular at x = y");
  const double a = dist_pow(x, y, false, -d), b = dist_pow(x, y, true, -d);
  const double k = green_constant(d) * (2.0 - d);
  Vec g(d);
  for (int i = 0; i < d; ++i) {
    const double ys = (i == d - 1) ? -y[i] : y[i];
    g[i] = k * (a * (x[i] - y[i]) - b * (x[i] - ys));
  }
  return g;
}

KernelMass kernel_mass(const HalfSpaceGrid& grid, double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::NonpositiveHeight, "kernel height must be positive");
  const int n = grid.n();
  const double h = grid.h();
  KernelMass m;
  if (z < grid.h()) {
    std::vector<double> corner(n + 1);
    for (int t = 0; t <= n; ++t) corner[t] = (t - (n - 1) / 2 - 0.5) * h;
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        m.window += poisson_rectangle(corner[a + 1], corner[b + 1], z) -
                    poisson_rectangle(corner[a], corner[b + 1], z) -
                    poisson_rectangle(corner[a + 1], corner[b], z) +
                    poisson_rectangle(corner[a], corner[b], z);
    const double A = corner[n];
    m.tail = 1.0 - 4.0 * poisson_rectangle(A, A, z);
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        m.window += grid.wx(i) * grid.wx(j) * poisson_kernel(3, {grid.x(i), grid.x(j)}, z);
    m.tail = 1.0 - 4.0 * poisson_rectangle(grid.L(), grid.L(), z);
  }
  return m;
}

Vec cancellation_vector(const HalfSpaceGrid& grid, double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::NonpositiveHeight, "kernel height must be positive");
  const int n = grid.n();
  const double h = grid.h();
  const double c3 = poisson_constant(3);
  Vec out(3, 0.0);
  // Horizontal components: odd integrands, summed in mirrored pairs.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < (n - 1) / 2; ++i) {
      const int im = n - 1 - i;
      auto d1 = [&](int ii) {
        const double x1 = grid.x(ii), x2 = grid.x(j);
        const double r2 = x1 * x1 + x2 * x2 + z * z;
        return -3.0 * c3 * z * x1 / (r2 * r2 * std::sqrt(r2));
      };
      out[0] += grid.wx(i) * grid.wx(j) * (d1(i) + d1(im));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < (n - 1) / 2; ++j) {
      const int jm = n - 1 - j;
      auto d2 = [&](int jj) {
        const double x1 = grid.x(i), x2 = grid.x(jj);
        const double r2 = x1 * x1 + x2 * x2 + z * z;
        return -3.0 * c3 * z * x2 / (r2 * r2 * std::sqrt(r2));
      };
      out[1] += grid.wx(i) * grid.wx(j) * (d2(j) + d2(jm));
    }
  }
  // The derivative kernel is twice as peaked, so the cell-exact rule is kept
  // up to a few cells of height.
  if (z < 4.0 * h) {
    std::vector<double> corner(n + 1);
    for (int t = 0; t <= n; ++t) corner[t] = (t - (n - 1) / 2 - 0.5) * h;
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        out[2] += poisson_rectangle_dz(corner[a + 1], corner[b + 1], z) -
                  poisson_rectangle_dz(corner[a], corner[b + 1], z) -
                  poisson_rectangle_dz(corner[a + 1], corner[b], z) +
                  poisson_rectangle_dz(corner[a], corner[b], z);
    out[2] -= 4.0 * poisson_rectangle_dz(corner[n], corner[n], z);
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double x1 = grid.x(i), x2 = grid.x(j);
        const double r2 = x1 * x1 + x2 * x2 + z * z;
        out[2] += grid.wx(i) * grid.wx(j) * c3 * (x1 * x1 + x2 * x2 - 2.0 * z * z) /
                  (r2 * r2 * std::sqrt(r2));
      }
    out[2] -= 4.0 * poisson_rectangle_dz(grid.L(), grid.L(), z);
  }
  return out;
}

double cancellation_check(const HalfSpaceGrid& grid, double z) {
  const Vec v = cancellation_vector(grid, z);
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

Field poisson_extend(const GridPtr& grid, const BoundaryData& f) {
  const int n = grid->n();
  if (f.n != n || f.L != grid->L())
    throw Error(ErrorCode::InvalidArgument, "boundary data does not match the grid");
  if (!f.compactly_supported())
    throw Error(ErrorCode::InvalidArgument, "boundary deviation must vanish outside (-L/2, L/2)^2");
  const int m = f.m();
  const double h = grid->h();
  const std::size_t plane = grid->plane();
  Field v(grid, m);

  struct Source {
    int i, j;
    std::size_t s;
  };
  std::vector<Source> sources;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(j) * n + i;
      bool nonzero = false;
      for (int c = 0; c < m; ++c) nonzero = nonzero || f.dev(c, s) != 0.0;
      if (nonzero) sources.push_back({i, j, s});
    }

  for (int c = 0; c < m; ++c)
    for (std::size_t s = 0; s < plane; ++s) v.at(c, s) = f.p[c] + f.dev(c, s);

  const int w = 2 * n - 1;
  const auto& K = simd::kernels();
  parallel_for(static_cast<std::size_t>(grid->K()), [&](std::size_t lk) {
    const int k = static_cast<int>(lk) + 1;
    const double z = grid->z()[k];
    std::vector<double> corner(static_cast<std::size_t>(2 * n) * 2 * n);
    std::vector<double> coord(2 * n);
    for (int t = 0; t < 2 * n; ++t) coord[t] = (t - (n - 1) - 0.5) * h;
    for (int b = 0; b < 2 * n; ++b)
      for (int a = 0; a < 2 * n; ++a)
        corner[static_cast<std::size_t>(b) * 2 * n + a] = poisson_rectangle(coord[a], coord[b], z);
    std::vector<double> W(static_cast<std::size_t>(w) * w);
    for (int b = 0; b < w; ++b)
      for (int a = 0; a < w; ++a) {
        const std::size_t r0 = static_cast<std::size_t>(b) * 2 * n, r1 = r0 + 2 * n;
        W[static_cast<std::size_t>(b) * w + a] =
            corner[r1 + a + 1] - corner[r0 + a + 1] - corner[r1 + a] + corner[r0 + a];
      }
    for (int c = 0; c < m; ++c) {
      double* out = v.comp(c) + static_cast<std::size_t>(k) * plane;
      std::fill(out, out + plane, 0.0);
      for (int jt = 0; jt < n; ++jt) {
        double* row = out + static_cast<std::size_t>(jt) * n;
        for (const Source& src : sources) {
          const double gv = f.dev(c, src.s);
          if (gv == 0.0) continue;
          const double* wrow =
              W.data() + static_cast<std::size_t>(jt - src.j + n - 1) * w + (n - 1 - src.i);
          K.axpy(gv, wrow, row, static_cast<std::size_t>(n));
        }
      }
      for (std::size_t s = 0; s < plane; ++s) out[s] += f.p[c];
    }
  });
  return v;
}

Gradient gradient(const Field& u) {
  const HalfSpaceGrid& g = *u.grid;
  const int n = g.n(), m = u.m, Kt = g.K();
  const std::size_t plane = g.plane(), N = g.nodes();
  const double h = g.h();
  const auto& z = g.z();
  const auto& K = simd::kernels();
  Gradient G{3, m, N, std::vector<double>(3 * static_cast<std::size_t>(m) * N, 0.0)};
  for (int c = 0; c < m; ++c) {
    const double* uc = u.comp(c);
    double* g1 = G.part(0, c);
    double* g2 = G.part(1, c);
    double* g3 = G.part(2, c);
    for (int k = 0; k <= Kt; ++k) {
      const std::size_t o = static_cast<std::size_t>(k) * plane;
      const double* p = uc + o;
      // x1: central differences on the flattened plane, rows fixed below.
      K.lincomb3(0.5 / h, p + 2, 0.0, p + 1, -0.5 / h, p, g1 + o + 1, plane - 2);
      // One-sided stencils in difference form so constants differentiate to 0 exactly.
      for (int j = 0; j < n; ++j) {
        const std::size_t r = static_cast<std::size_t>(j) * n, e = r + n - 1;
        g1[o + r] = (4.0 * (p[r + 1] - p[r]) - (p[r + 2] - p[r])) / (2.0 * h);
        g1[o + e] = (4.0 * (p[e] - p[e - 1]) - (p[e] - p[e - 2])) / (2.0 * h);
      }
      // x2
      K.lincomb3(0.5 / h, p + 2 * n, 0.0, p + n, -0.5 / h, p, g2 + o + n, plane - 2 * n);
      const std::size_t last = static_cast<std::size_t>(n - 1) * n;
      for (int i = 0; i < n; ++i) {
        const std::size_t e = last + i;
        g2[o + i] = (4.0 * (p[i + n] - p[i]) - (p[i + 2 * n] - p[i])) / (2.0 * h);
        g2[o + e] = (4.0 * (p[e] - p[e - n]) - (p[e] - p[e - 2 * n])) / (2.0 * h);
      }
    }
    // x_d: nonuniform three-point stencils applied to level differences.
    std::vector<double> dlo(plane), dhi(plane);
    for (int k = 0; k <= Kt; ++k) {
      const std::size_t o = static_cast<std::size_t>(k) * plane;
      if (k == 0) {
        const double h1 = z[1] - z[0], h2 = z[2] - z[1];
        K.lincomb3(1.0, uc + plane, -1.0, uc, 0.0, uc, dlo.data(), plane);
        K.lincomb3(1.0, uc + 2 * plane, -1.0, uc, 0.0, uc, dhi.data(), plane);
        K.lincomb3((h1 + h2) / (h1 * h2), dlo.data(), -h1 / (h2 * (h1 + h2)), dhi.data(), 0.0,
                   dhi.data(), g3, plane);
      } else if (k == Kt) {
        const double h1 = z[Kt] - z[Kt - 1], h2 = z[Kt - 1] - z[Kt - 2];
        K.lincomb3(1.0, uc + o, -1.0, uc + o - plane, 0.0, uc, dlo.data(), plane);
        K.lincomb3(1.0, uc + o, -1.0, uc + o - 2 * plane, 0.0, uc, dhi.data(), plane);
        K.lincomb3((h1 + h2) / (h1 * h2), dlo.data(), -h1 / (h2 * (h1 + h2)), dhi.data(), 0.0,
                   dhi.data(), g3 + o, plane);
      } else {
        const double h1 = z[k] - z[k - 1], h2 = z[k + 1] - z[k];
        const double D = h1 * h2 * (h1 + h2);
        K.lincomb3(1.0, uc + o + plane, -1.0, uc + o, 0.0, uc, dhi.data(), plane);
        K.lincomb3(1.0, uc + o, -1.0, uc + o - plane, 0.0, uc, dlo.data(), plane);
        K.lincomb3(h1 * h1 / D, dhi.data(), h2 * h2 / D, dlo.data(), 0.0, dlo.data(), g3 + o, plane);
      }
    }
  }
  return G;
}

Field laplacian(const Field& u) {
  const HalfSpaceGrid& g = *u.grid;
  const int n = g.n(), Kt = g.K();
  const std::size_t plane = g.plane();
  const double ih2 = 1.0 / (g.h() * g.h());
  const auto& z = g.z();
  Field out(u.grid, u.m);
  for (int c = 0; c < u.m; ++c) {
    const double* p = u.comp(c);
    double* q = out.comp(c);
    for (int k = 1; k < Kt; ++k) {
      const double h1 = z[k] - z[k - 1], h2 = z[k + 1] - z[k];
      const double a = 2.0 / (h1 * (h1 + h2)), cc = 2.0 / (h2 * (h1 + h2));
      for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
          const std::size_t s = g.index(i, j, k);
          q[s] = (p[s + 1] + p[s - 1] + p[s + n] + p[s - n] - 4.0 * p[s]) * ih2 +
                 a * p[s - plane] + cc * p[s + plane] - (a + cc) * p[s];
        }
    }
  }
  return out;
}

double integrate(const HalfSpaceGrid& grid, const std::vector<double>& nodal) {
  const int n = grid.n();
  double total = 0.0;
  for (int k = 0; k <= grid.K(); ++k) {
    double lvl = 0.0;
    for (int j = 0; j < n; ++j) {
      double row = 0.0;
      for (int i = 0; i < n; ++i) row += grid.wx(i) * nodal[grid.index(i, j, k)];
      lvl += grid.wx(j) * row;
    }
    total += grid.zweight()[k] * lvl;
  }
  return total;
}

double weighted_energy(const Field& u) {
  const HalfSpaceGrid& g = *u.grid;
  const Gradient G = gradient(u);
  std::vector<double> e(g.nodes());
  for (int k = 0; k <= g.K(); ++k)
    for (std::size_t s = 0; s < g.plane(); ++s) {
      const std::size_t node = static_cast<std::size_t>(k) * g.plane() + s;
      e[node] = g.z()[k] * G.norm2(node);
    }
  return integrate(g, e);
}

double weighted_l1(const Field& F) {
  const HalfSpaceGrid& g = *F.grid;
  std::vector<double> e(g.nodes());
  for (int k = 0; k <= g.K(); ++k)
    for (std::size_t s = 0; s < g.plane(); ++s) {
      const std::size_t node = static_cast<std::size_t>(k) * g.plane() + s;
      double a = 0.0;
      for (int c = 0; c < F.m; ++c) a += F.at(c, node) * F.at(c, node);
      e[node] = g.z()[k] * std::sqrt(a);
    }
  return integrate(g, e);
}

double sup_abs(const Field& u) {
  double best = 0.0;
  for (std::size_t s = 0; s < u.nodes(); ++s) {
    double a = 0.0;
    for (int c = 0; c < u.m; ++c) a += u.at(c, s) * u.at(c, s);
    best = std::max(best, a);
  }
  return std::sqrt(best);
}

}  // namespace wharm
