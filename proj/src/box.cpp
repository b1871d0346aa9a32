#include "wharm/box.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "wharm/error.hpp"
#include "wharm/fast_poisson.hpp"
#include "wharm/parallel.hpp"
#include "wharm/simd.hpp"

namespace wharm {

BoxGrid::BoxGrid(int d, int n) : d_(d), n_(n) {
  if (d != 2 && d != 3) throw Error(ErrorCode::InvalidArgument, "box dimension must be 2 or 3");
  if (n < 5) throw Error(ErrorCode::InvalidArgument, "box grid needs n >= 5");
  h_ = 1.0 / (n - 1);
  cell_ = std::pow(h_, d);
  nodes_ = 1;
  for (int a = 0; a < 3; ++a) {
    stride_[a] = a < d ? nodes_ : 0;
    if (a < d) nodes_ *= static_cast<std::size_t>(n);
  }
  dist_.resize(nodes_);
  slot_.assign(nodes_, -1);
  for (std::size_t s = 0; s < nodes_; ++s) {
    int best = n;
    for (int a = 0; a < d; ++a) {
      const int i = coord_index(s, a);
      best = std::min({best, i, n - 1 - i});
    }
    dist_[s] = best * h_;
    if (best == 0) {
      boundary_.push_back(s);
    } else {
      slot_[s] = static_cast<long>(interior_.size());
      interior_.push_back(s);
    }
  }
}

BoxField::BoxField(BoxGridPtr g, int comps, double fill)
    : grid(std::move(g)), m(comps), data(grid->nodes() * static_cast<std::size_t>(comps), fill) {}

Vec BoxField::value(std::size_t node) const {
  Vec v(m);
  for (int c = 0; c < m; ++c) v[c] = at(c, node);
  return v;
}

void BoxField::set_value(std::size_t node, const Vec& v) {
  for (int c = 0; c < m; ++c) at(c, node) = v[c];
}

namespace {

void check_same(const BoxField& a, const BoxField& b) {
  if (a.grid != b.grid || a.m != b.m)
    throw Error(ErrorCode::InvalidArgument, "box fields live on different grids");
}

}  // namespace

BoxField operator+(const BoxField& a, const BoxField& b) {
  check_same(a, b);
  BoxField r = a;
  simd::kernels().axpy(1.0, b.data.data(), r.data.data(), r.data.size());
  return r;
}

BoxField operator-(const BoxField& a, const BoxField& b) {
  check_same(a, b);
  BoxField r = a;
  simd::kernels().axpy(-1.0, b.data.data(), r.data.data(), r.data.size());
  return r;
}

BoxField operator*(double s, const BoxField& a) {
  BoxField r = a;
  for (double& x : r.data) x *= s;
  return r;
}

Gradient box_gradient(const BoxField& u) {
  const BoxGrid& g = *u.grid;
  const int d = g.d(), n = g.n();
  const std::size_t N = g.nodes();
  Gradient G;
  G.d = d;
  G.m = u.m;
  G.nodes = N;
  G.data.assign(static_cast<std::size_t>(d) * u.m * N, 0.0);
  const double ih = 1.0 / g.h();
  for (int j = 0; j < d; ++j) {
    const std::size_t st = g.stride(j);
    for (int c = 0; c < u.m; ++c) {
      const double* f = u.comp(c);
      double* out = G.part(j, c);
      for (std::size_t s = 0; s < N; ++s) {
        const int i = g.coord_index(s, j);
        // One-sided second-order differences on the faces normal to axis j.
        if (i == 0)
          out[s] = (-1.5 * f[s] + 2.0 * f[s + st] - 0.5 * f[s + 2 * st]) * ih;
        else if (i == n - 1)
          out[s] = (1.5 * f[s] - 2.0 * f[s - st] + 0.5 * f[s - 2 * st]) * ih;
        else
          out[s] = 0.5 * (f[s + st] - f[s - st]) * ih;
      }
    }
  }
  return G;
}

BoxField box_laplacian(const BoxField& u) {
  const BoxGrid& g = *u.grid;
  BoxField L(u.grid, u.m, 0.0);
  const double ih2 = 1.0 / (g.h() * g.h());
  for (int c = 0; c < u.m; ++c) {
    const double* f = u.comp(c);
    double* out = L.comp(c);
    for (std::size_t s : g.interior()) {
      double acc = -2.0 * g.d() * f[s];
      for (int a = 0; a < g.d(); ++a) acc += f[s + g.stride(a)] + f[s - g.stride(a)];
      out[s] = acc * ih2;
    }
  }
  return L;
}

void box_solve_dirichlet(BoxField& u, const BoxField& rhs, double shift) {
  check_same(u, rhs);
  const BoxGrid& g = *u.grid;
  const UniformPoissonSolver solver(g.d(), g.n(), g.h());
  for (int c = 0; c < u.m; ++c) solver.solve(rhs.comp(c), u.comp(c), shift);
}

BoxField box_harmonic_extension(const BoxField& g) {
  BoxField u = g;
  for (int c = 0; c < u.m; ++c)
    for (std::size_t s : g.grid->interior()) u.at(c, s) = 0.0;
  box_solve_dirichlet(u, BoxField(g.grid, g.m, 0.0));
  return u;
}

BoxField box_potential(const BoxField& F) {
  BoxField w(F.grid, F.m, 0.0);
  box_solve_dirichlet(w, F);
  return w;
}

bool CarlesonRegions::contains(const BoxGrid& grid, const std::array<int, 3>& off, double r) {
  double dd = 0.0;
  for (int a = 0; a < grid.d(); ++a) dd += static_cast<double>(off[a]) * off[a];
  dd *= grid.h() * grid.h();
  const double rr = r + 0.5 * grid.h();
  return dd < rr * rr;
}

CarlesonRegions CarlesonRegions::make(const BoxGrid& grid) {
  CarlesonRegions reg;
  for (double r = 0.5; r >= grid.h(); r *= 0.75) {
    reg.radii.push_back(r);
    const int R = static_cast<int>(std::ceil((r + 0.5 * grid.h()) / grid.h()));
    std::vector<std::array<int, 3>> offs;
    const int R2 = grid.d() == 3 ? R : 0;
    // Loop nesting gives node order: axis 2 slowest, axis 0 fastest.
    for (int k = -R2; k <= R2; ++k)
      for (int j = -R; j <= R; ++j)
        for (int i = -R; i <= R; ++i) {
          const std::array<int, 3> off{i, j, k};
          if (contains(grid, off, r)) offs.push_back(off);
        }
    reg.offsets.push_back(std::move(offs));
  }
  return reg;
}

double box_carleson_max(const BoxGrid& grid, const std::vector<double>& q, std::size_t* best_center,
                        double* best_radius) {
  const CarlesonRegions reg = CarlesonRegions::make(grid);
  const auto& centers = grid.boundary();
  const int d = grid.d(), n = grid.n();
  std::vector<double> dq(grid.nodes());
  for (std::size_t s = 0; s < grid.nodes(); ++s) dq[s] = grid.dist(s) * q[s];
  std::vector<double> best(centers.size(), 0.0);
  std::vector<int> best_r(centers.size(), -1);
  parallel_for(centers.size(), [&](std::size_t ci) {
    const std::size_t xi = centers[ci];
    int c[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) c[a] = grid.coord_index(xi, a);
    for (std::size_t ri = 0; ri < reg.radii.size(); ++ri) {
      double e = 0.0;
      for (const auto& off : reg.offsets[ri]) {
        std::size_t s = 0;
        bool inside = true;
        for (int a = 0; a < d; ++a) {
          const int i = c[a] + off[a];
          if (i < 0 || i >= n) {
            inside = false;
            break;
          }
          s += static_cast<std::size_t>(i) * grid.stride(a);
        }
        if (inside) e += dq[s];
      }
      const double val = e * grid.cell_volume() / std::pow(reg.radii[ri], d - 1);
      if (val > best[ci]) {
        best[ci] = val;
        best_r[ci] = static_cast<int>(ri);
      }
    }
  });
  std::size_t arg = 0;
  for (std::size_t ci = 1; ci < centers.size(); ++ci)
    if (best[ci] > best[arg]) arg = ci;
  if (best_center) *best_center = centers.empty() ? 0 : centers[arg];
  if (best_radius) *best_radius = best_r[arg] >= 0 ? reg.radii[best_r[arg]] : 0.0;
  return centers.empty() ? 0.0 : best[arg];
}

NormReport w_norm(const BoxField& u) {
  const BoxGrid& g = *u.grid;
  const std::size_t N = g.nodes();
  const Gradient G = box_gradient(u);
  NormReport rep;
  auto coords = [&](std::size_t s) {
    Vec x(g.d());
    for (int a = 0; a < g.d(); ++a) x[a] = g.coord(s, a);
    return x;
  };
  double best = -1.0;
  std::vector<double> q(N);
  for (std::size_t s = 0; s < N; ++s) {
    double a = 0.0;
    for (int c = 0; c < u.m; ++c) a += u.at(c, s) * u.at(c, s);
    if (a > best) {
      best = a;
      rep.sup_at = coords(s);
    }
    q[s] = G.norm2(s);
    const double w = g.dist(s) * std::sqrt(q[s]);
    if (w > rep.weighted_grad_sup) {
      rep.weighted_grad_sup = w;
      rep.grad_at = coords(s);
    }
  }
  rep.sup_norm = std::sqrt(best);
  if (rep.grad_at.empty()) rep.grad_at = Vec(g.d(), 0.0);
  std::size_t center = 0;
  rep.carleson_energy = std::sqrt(box_carleson_max(g, q, &center, &rep.carleson_radius));
  rep.carleson_center = coords(center);
  rep.total = rep.sup_norm + rep.weighted_grad_sup + rep.carleson_energy;
  return rep;
}

double z_norm(const BoxField& F) {
  const BoxGrid& g = *F.grid;
  const std::size_t N = g.nodes();
  std::vector<double> q(N);
  double sup = 0.0;
  for (std::size_t s = 0; s < N; ++s) {
    double a = 0.0;
    for (int c = 0; c < F.m; ++c) a += F.at(c, s) * F.at(c, s);
    q[s] = std::sqrt(a);
    sup = std::max(sup, g.dist(s) * g.dist(s) * q[s]);
  }
  return sup + box_carleson_max(g, q, nullptr, nullptr);
}

}  // namespace wharm
