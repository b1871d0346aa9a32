#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wharm/box.hpp"
#include "wharm/error.hpp"

using namespace wharm;
using wharm::testing::Rng;

namespace {

BoxGridPtr box(int d, int n) { return std::make_shared<const BoxGrid>(d, n); }

std::vector<double> radii(const BoxGrid& g) {
  std::vector<double> r;
  for (double x = 0.5; x >= g.h(); x *= 0.75) r.push_back(x);
  return r;
}

// Every boundary node, every radius, every node of the grid in node order.
double carleson_oracle(const BoxGrid& g, const std::vector<double>& q) {
  const int d = g.d();
  const double h = g.h();
  double best = 0.0;
  for (std::size_t xi : g.boundary())
    for (double r : radii(g)) {
      double e = 0.0;
      for (std::size_t s = 0; s < g.nodes(); ++s) {
        double dd = 0.0;
        for (int a = 0; a < d; ++a) {
          const double o = g.coord_index(s, a) - g.coord_index(xi, a);
          dd += o * o;
        }
        if (dd * h * h < (r + 0.5 * h) * (r + 0.5 * h)) e += g.dist(s) * q[s];
      }
      best = std::max(best, e * g.cell_volume() / std::pow(r, d - 1));
    }
  return best;
}

BoxField random_field(const BoxGridPtr& g, int m, Rng& rng) {
  BoxField u(g, m);
  for (double& x : u.data) x = rng.uniform(-1.0, 1.0);
  return u;
}

std::vector<double> grad_density(const BoxField& u) {
  const Gradient G = box_gradient(u);
  std::vector<double> q(u.nodes());
  for (std::size_t s = 0; s < q.size(); ++s) q[s] = G.norm2(s);
  return q;
}

}  // namespace

TEST_CASE("box grid geometry") {
  CHECK_THROWS_AS(BoxGrid(4, 9), Error);
  CHECK_THROWS_AS(BoxGrid(3, 3), Error);
  for (int d : {2, 3}) {
    const BoxGrid g(d, 9);
    CHECK(g.h() == 0.125);
    CHECK(g.boundary().size() == g.nodes() - static_cast<std::size_t>(std::pow(7, d)));
    for (std::size_t s = 0; s < g.nodes(); ++s) {
      double dist = 1.0;
      for (int a = 0; a < d; ++a) dist = std::min({dist, g.coord(s, a), 1.0 - g.coord(s, a)});
      CHECK(g.dist(s) == doctest::Approx(dist).epsilon(1e-15).scale(1.0));
      CHECK(g.is_boundary(s) == (g.interior_slot(s) < 0));
    }
  }
}

TEST_CASE("box calculus on polynomials") {
  for (int d : {2, 3}) {
    auto g = box(d, 17);
    BoxField u(g, 2), q(g, 1);
    for (std::size_t s = 0; s < g->nodes(); ++s) {
      double lin = 1.0, r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        lin += (a + 1.0) * g->coord(s, a);
        r2 += g->coord(s, a) * g->coord(s, a);
      }
      u.at(0, s) = lin;
      u.at(1, s) = -2.5;
      q.at(0, s) = r2;
    }
    const Gradient G = box_gradient(u);
    for (std::size_t s = 0; s < g->nodes(); ++s)
      for (int a = 0; a < d; ++a) {
        CHECK(std::abs(G.part(a, 0)[s] - (a + 1.0)) <= 1e-12);
        CHECK(G.part(a, 1)[s] == 0.0);
      }
    const BoxField L = box_laplacian(q);
    for (std::size_t s = 0; s < g->nodes(); ++s)
      CHECK(L.at(0, s) == doctest::Approx(g->is_boundary(s) ? 0.0 : 2.0 * d).epsilon(1e-9).scale(1.0));
    // Affine boundary data extends to the same affine function.
    BoxField b(g, 1);
    for (std::size_t s : g->boundary()) b.at(0, s) = u.at(0, s);
    const BoxField ext = box_harmonic_extension(b);
    for (std::size_t s = 0; s < g->nodes(); ++s) CHECK(std::abs(ext.at(0, s) - u.at(0, s)) <= 1e-11);
  }
}

TEST_CASE("box potential inverts the discrete Laplacian") {
  for (int d : {2, 3}) {
    auto g = box(d, 17);
    const double h = g->h();
    const double lam = d * (2.0 / (h * h)) * (1.0 - std::cos(M_PI * h));
    BoxField w(g, 1), F(g, 1);
    for (std::size_t s = 0; s < g->nodes(); ++s) {
      double e = 1.0;
      for (int a = 0; a < d; ++a) e *= std::sin(M_PI * g->coord(s, a));
      w.at(0, s) = g->is_boundary(s) ? 0.0 : e;
      F.at(0, s) = g->is_boundary(s) ? 0.0 : lam * e;
    }
    const BoxField sol = box_potential(F);
    CHECK(testing::max_abs_diff(sol.data, w.data) <= 1e-12);
    BoxField u = w;
    box_solve_dirichlet(u, F, 0.0);
    CHECK(testing::max_abs_diff(u.data, w.data) <= 1e-12);
  }
}

TEST_CASE("W-norm of constants and homogeneity") {
  auto g = box(3, 9);
  BoxField u(g, 3);
  for (std::size_t s = 0; s < g->nodes(); ++s) u.set_value(s, {0.0, 0.0, 1.0});
  const NormReport c = w_norm(u);
  CHECK(c.sup_norm == 1.0);
  CHECK(c.weighted_grad_sup == 0.0);
  CHECK(c.carleson_energy == 0.0);
  Rng rng(2);
  const BoxField r = random_field(g, 3, rng);
  const double t = w_norm(r).total;
  CHECK(w_norm(4.0 * r).total == 4.0 * t);
  CHECK(w_norm(-0.5 * r).total == 0.5 * t);
}

TEST_CASE("Carleson regions match the exhaustive oracle exactly") {
  Rng rng(4);
  for (int d : {2, 3}) {
    auto g = box(d, 9);
    const BoxField u = random_field(g, 2, rng);
    const std::vector<double> q = grad_density(u);
    double r = 0.0;
    std::size_t c = 0;
    const double sampled = box_carleson_max(*g, q, &c, &r);
    CHECK(sampled == carleson_oracle(*g, q));
    CHECK(g->is_boundary(c));
    CHECK(r > 0.0);
    CHECK(w_norm(u).carleson_energy == std::sqrt(sampled));
  }
}

TEST_CASE("Z-norm of zero and of a single node") {
  for (int d : {2, 3}) {
    auto g = box(d, 17);
    CHECK(z_norm(BoxField(g, 2)) == 0.0);
    std::size_t s = 0;
    for (std::size_t t : g->interior())
      if (g->coord_index(t, 0) == 3 && g->coord_index(t, 1) == 5 && (d == 2 || g->coord_index(t, 2) == 8)) s = t;
    REQUIRE(s != 0);
    BoxField F(g, 1);
    const double a = 2.5;
    F.at(0, s) = a;
    const double ds = g->dist(s);  // 3h, reached straight along axis 0
    CHECK(ds == doctest::Approx(3 * g->h()));
    double rmin = 0.0;
    for (double r : radii(*g))
      if (ds < r + 0.5 * g->h()) rmin = r;  // radii decrease, keep the smallest
    const double expect = ds * ds * a + ds * a * g->cell_volume() / std::pow(rmin, d - 1);
    CHECK(z_norm(F) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("quadratic composition bound for the box norms") {
  Rng rng(8);
  for (int d : {2, 3}) {
    auto g = box(d, 9);
    for (int t = 0; t < 3; ++t) {
      const BoxField u = random_field(g, 3, rng);
      BoxField F(g, 1);
      F.data = grad_density(u);
      const double W = w_norm(u).total;
      CHECK(z_norm(F) <= W * W * (1 + 1e-12));
    }
  }
}
