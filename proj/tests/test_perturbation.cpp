#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wharm/error.hpp"
#include "wharm/perturbation.hpp"

using namespace wharm;
using wharm::testing::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

BoxGridPtr box(int d, int n) { return std::make_shared<const BoxGrid>(d, n); }

const TargetManifold& sphere() {
  static const TargetManifold M = TargetManifold::sphere(3);
  return M;
}

double lambda1(const BoxGrid& g) {
  const double h = g.h();
  return g.d() * (2.0 / (h * h)) * (1.0 - std::cos(kPi * h));
}

BoxField constant_map(const BoxGridPtr& g) {
  BoxField v(g, 3);
  for (std::size_t s = 0; s < g->nodes(); ++s) v.at(2, s) = 1.0;
  return v;
}

// Great circle in the (e1, e2) plane: |grad v|^2 = k^2 everywhere.
BoxField geodesic_map(const BoxGridPtr& g, double k) {
  BoxField v(g, 3);
  for (std::size_t s = 0; s < g->nodes(); ++s) {
    const double x = g->coord(s, 0);
    v.at(0, s) = std::cos(k * x);
    v.at(1, s) = std::sin(k * x);
  }
  return v;
}

// exp_p(a (x1 + x2^2 / 2) e1) relaxed by the gradient flow: a nonconstant
// discrete harmonic map.
BoxField flow_map(const BoxGridPtr& g, double a) {
  BoxField f(g, 3);
  for (std::size_t s = 0; s < g->nodes(); ++s) {
    const double t = a * (g->coord(s, 0) + 0.5 * g->coord(s, 1) * g->coord(s, 1));
    f.set_value(s, {std::sin(t), 0.0, std::cos(t)});
  }
  return box_gradient_flow(f, sphere()).u;
}

double bump(double t) { return t >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t)); }

// Base trace rotated in the (e1, e3) plane by a cap centred on the face x_d = 0.
BoxField cap_data(const BaseMap& b, double amp, double r0) {
  const BoxGridPtr g = b.v.grid;
  const int d = g->d();
  BoxField f(g, 3);
  for (std::size_t s : g->boundary()) {
    double rr = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = g->coord(s, a) - (a == d - 1 ? 0.0 : 0.5);
      rr += x * x;
    }
    const double t = amp * bump(std::sqrt(rr) / r0);
    const double c = std::cos(t), sn = std::sin(t);
    const double x = b.v.at(0, s), y = b.v.at(1, s), z = b.v.at(2, s);
    f.set_value(s, {c * x + sn * z, y, -sn * x + c * z});
  }
  return f;
}

BoxField random_interior(const BoxGridPtr& g, int m, Rng& rng) {
  BoxField u(g, m);
  for (std::size_t s : g->interior())
    for (int c = 0; c < m; ++c) u.at(c, s) = rng.uniform(-1.0, 1.0);
  return u;
}

// Smooth zero-trace field: bubble times a random low-frequency trigonometric factor.
BoxField smooth_interior(const BoxGridPtr& g, int m, double amp, Rng& rng) {
  const int d = g->d();
  std::vector<double> k(3 * m), ph(m);
  for (double& x : k) x = rng.uniform(-3.0, 3.0);
  for (double& x : ph) x = rng.uniform(0.0, 2.0 * kPi);
  BoxField u(g, m);
  for (std::size_t s : g->interior()) {
    double b = 1.0;
    for (int a = 0; a < d; ++a) b *= std::sin(kPi * g->coord(s, a));
    for (int c = 0; c < m; ++c) {
      double arg = ph[c];
      for (int a = 0; a < d; ++a) arg += k[3 * c + a] * g->coord(s, a);
      u.at(c, s) = amp * b * std::cos(arg);
    }
  }
  return u;
}

double sup_diff(const BoxField& a, const BoxField& b) { return wharm::testing::max_abs_diff(a.data, b.data); }

double l2_sq(const BoxField& u) {
  double s = 0.0;
  for (double x : u.data) s += x * x;
  return s * u.grid->cell_volume();
}

double ratio_spread(const std::vector<double>& c) {
  return *std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end());
}

}  // namespace

TEST_CASE("stability form on a constant base") {
  const auto g = box(3, 9);
  const BaseMap b = BaseMap::make(constant_map(g), sphere());
  CHECK(b.sup_dist == 0.0);
  CHECK(b.weak_residual == 0.0);
  Rng rng(5);
  BoxField phi = random_interior(g, 3, rng);
  for (std::size_t s = 0; s < g->nodes(); ++s) phi.at(2, s) = 0.0;  // already tangent at e3

  // Curvature term vanishes: Q is the edge sum of |phi_a - phi_b|^2 h^{d-2}.
  double edges = 0.0;
  for (std::size_t s = 0; s < g->nodes(); ++s)
    for (int a = 0; a < 3; ++a) {
      if (g->coord_index(s, a) == g->n() - 1) continue;
      const std::size_t t = s + g->stride(a);
      for (int c = 0; c < 3; ++c) edges += std::pow(phi.at(c, s) - phi.at(c, t), 2);
    }
  edges *= g->h();
  const double Q = stability_form(b, phi);
  CHECK(Q == doctest::Approx(edges).epsilon(1e-13));
  CHECK(stability_form(b, 2.0 * phi) == 4.0 * Q);

  // Dirichlet eigenfunction: Rayleigh quotient is the discrete lambda_1.
  BoxField e(g, 3);
  for (std::size_t s = 0; s < g->nodes(); ++s) {
    double p = 1.0;
    for (int a = 0; a < 3; ++a) p *= std::sin(kPi * g->coord(s, a));
    e.at(0, s) = g->is_boundary(s) ? 0.0 : p;
  }
  CHECK(stability_form(b, e) / l2_sq(e) == doctest::Approx(lambda1(*g)).epsilon(1e-12));

  BoxField bad = phi;
  bad.at(0, g->boundary().front()) = 1.0;
  CHECK_THROWS_AS(stability_form(b, bad), Error);
}

TEST_CASE("stability constant of a constant base") {
  for (auto [d, n] : {std::pair{2, 33}, std::pair{3, 17}}) {
    const auto g = box(d, n);
    const StabilityEstimate e = estimate_stability_constant(BaseMap::make(constant_map(g), sphere()));
    CHECK(e.converged);
    CHECK(e.stable);
    CHECK(e.M == doctest::Approx(lambda1(*g)).epsilon(1e-9));
    CHECK(std::abs(e.M / (d * kPi * kPi) - 1.0) < 0.02);
  }
}

TEST_CASE("curvature sign flag shifts M by the Rayleigh shift of a geodesic base") {
  const auto g = box(3, 17);
  const double k = 2.0, h = g->h(), lam = lambda1(*g);
  const BoxField v = geodesic_map(g, k);
  // Discrete |grad v|^2 seen by the curvature coupling.
  const double kappa = std::pow(std::sin(k * h) / h, 2);
  const StabilityEstimate def = estimate_stability_constant(BaseMap::make(v, sphere()));
  CHECK(def.M == doctest::Approx(lam - kappa).epsilon(1e-9));
  const StabilityEstimate lit =
      estimate_stability_constant(BaseMap::make(v, sphere().with_curvature_sign(CurvatureSign::Literal)));
  // Flipped sign: the normal-to-circle mode moves up by kappa, the in-plane
  // mode picks up the discrete Dirichlet cost of rotating along x1.
  const double in_plane = lam + (2.0 / (h * h)) * std::cos(kPi * h) * (1.0 - std::cos(k * h));
  CHECK(lit.M == doctest::Approx(std::min(lam + kappa, in_plane)).epsilon(1e-9));
  CHECK(lit.M - def.M == doctest::Approx(std::min(2.0 * kappa, in_plane - lam + kappa)).epsilon(1e-8));

  // Coupling stronger than lambda_1: indefinite.
  const double kr = std::asin(std::sqrt(lam) * h) / h;
  CHECK_THROWS_AS(estimate_stability_constant(BaseMap::make(geodesic_map(g, 1.5 * kr), sphere())), Error);
  StabilityOptions so;
  so.throw_if_indefinite = false;
  const StabilityEstimate neg = estimate_stability_constant(BaseMap::make(geodesic_map(g, 1.5 * kr), sphere()), so);
  CHECK_FALSE(neg.stable);
  CHECK(neg.M < 0.0);
}

TEST_CASE("linearized operator: Laplacian for constant base, linearity, summation by parts") {
  Rng rng(17);
  {
    const auto g = box(3, 9);
    const BaseMap b = BaseMap::make(constant_map(g), sphere());
    const BoxField w = random_interior(g, 3, rng);
    CHECK(sup_diff(apply_linearized(b, w), box_laplacian(w)) == 0.0);
  }
  for (int d : {2, 3}) {
    const auto g = box(d, d == 2 ? 33 : 17);
    const BaseMap b = BaseMap::make(geodesic_map(g, 2.0), sphere());
    const BoxField w1 = random_interior(g, 3, rng), w2 = random_interior(g, 3, rng);
    const BoxField lhs = apply_linearized(b, 2.0 * w1 + w2);
    const BoxField rhs = 2.0 * apply_linearized(b, w1) + apply_linearized(b, w2);
    double scale = 0.0;
    for (double x : rhs.data) scale = std::max(scale, std::abs(x));
    CHECK(sup_diff(lhs, rhs) <= 1e-13 * scale);

    for (int rep = 0; rep < 5; ++rep) {
      const BoxField phi = project_tangent(b, random_interior(g, 3, rng));
      const BoxField L = apply_linearized(b, phi);
      double dual = 0.0;
      for (std::size_t i = 0; i < L.data.size(); ++i) dual += L.data[i] * phi.data[i];
      CHECK(std::abs(stability_form(b, phi) + dual * g->cell_volume()) <= 1e-8);
    }
  }
}

TEST_CASE("solve_linearized: manufactured solution, zero source, two-stage path") {
  Rng rng(23);
  const auto g = box(3, 17);
  {
    const BaseMap b = BaseMap::make(constant_map(g), sphere());
    const BoxField wstar = random_interior(g, 3, rng);
    const BoxField H = -1.0 * box_laplacian(wstar);
    CHECK(sup_diff(solve_linearized(b, H), wstar) <= 1e-8);
    const BoxField zero(g, 3);
    CHECK(sup_diff(solve_linearized(b, zero), zero) == 0.0);
  }
  const BaseMap b = BaseMap::make(geodesic_map(g, 2.0), sphere());
  const BoxField H = project_tangent(b, random_interior(g, 3, rng));
  const BoxField w = solve_linearized(b, H);
  const BoxField Lw = apply_linearized(b, w);
  double res = 0.0;
  for (std::size_t s : g->interior())
    for (int c = 0; c < 3; ++c) res = std::max(res, std::abs(Lw.at(c, s) + H.at(c, s)));
  CHECK(res <= 1e-9);
  for (std::size_t s : g->boundary())
    for (int c = 0; c < 3; ++c) CHECK(w.at(c, s) == 0.0);
  CHECK(sup_diff(solve_linearized_two_stage(b, H), w) <= 1e-8);
}

TEST_CASE("invertibility report") {
  const auto g = box(3, 9);
  const InvertibilityReport c = check_invertibility(BaseMap::make(constant_map(g), sphere()));
  CHECK(c.pass);
  CHECK(c.sigma_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c.to_kv().find("pass = 1") != std::string::npos);

  // Coupling tuned to the discrete lambda_1: near-singular.
  const auto g17 = box(3, 17);
  const double h = g17->h();
  const double kr = std::asin(std::sqrt(lambda1(*g17)) * h) / h;
  const InvertibilityReport r = check_invertibility(BaseMap::make(geodesic_map(g17, kr), sphere()));
  CHECK_FALSE(r.pass);
  CHECK(r.sigma_min < 1e-8);

  // pass => the solve succeeds and inverts the operator.
  Rng rng(29);
  for (double k : {1.0, 2.0, 4.0}) {
    const BaseMap b = BaseMap::make(geodesic_map(g, k), sphere());
    const InvertibilityReport rep = check_invertibility(b);
    REQUIRE(rep.pass);
    const BoxField H = random_interior(g, 3, rng);
    const BoxField w = solve_linearized(b, H);
    const BoxField Lw = apply_linearized(b, w);
    for (std::size_t s : g->interior())
      for (int c = 0; c < 3; ++c) CHECK(std::abs(Lw.at(c, s) + H.at(c, s)) <= 1e-9);
  }
}

TEST_CASE("nonlinearity: exact cancellation, refinement-stable bound, Lipschitz audit") {
  {
    const auto g = box(3, 9);
    const BaseMap b = BaseMap::make(flow_map(g, 1.0), sphere());
    const BoxField zero(g, 3);
    const NonlinearityParts p = nonlinearity_F(b, zero, zero);
    for (const BoxField* f : {&p.F1, &p.F2, &p.F3, &p.total})
      for (double x : f->data) CHECK(x == 0.0);
  }
  std::vector<double> bound, lip;
  for (int n : {9, 17}) {
    Rng rng(31);
    const auto g = box(3, n);
    const BaseMap b = BaseMap::make(flow_map(g, 1.0), sphere());
    PerturbationProblem P;
    P.base = &b;
    P.f = cap_data(b, 0.05, 0.3);
    const BoxField ph = P.phi_h();
    const double phn = w_norm(ph).total;
    double c = 0.0, eta = 0.0;
    for (int k = 0; k < 20; ++k) {
      const BoxField w1 = project_tangent(b, smooth_interior(g, 3, 0.01, rng));
      const BoxField w2 = project_tangent(b, smooth_interior(g, 3, 0.01, rng));
      const NonlinearityParts p1 = nonlinearity_F(b, ph, w1), p2 = nonlinearity_F(b, ph, w2);
      CHECK(sup_diff(p1.total, p1.F1 + p1.F2 + p1.F3) <= 1e-14);
      c = std::max(c, z_norm(p1.total) / (w_norm(w1).total + phn));
      eta = std::max(eta, z_norm(p1.total - p2.total) / w_norm(w1 - w2).total);
    }
    bound.push_back(c);
    lip.push_back(eta);
    CHECK(eta < 1.0);
  }
  CHECK(ratio_spread(bound) <= 2.0);
}

TEST_CASE("key estimate constant is stable under refinement") {
  std::vector<double> cs;
  for (int n : {17, 33, 65}) {
    Rng rng(37);
    const auto g = box(2, n);
    const BaseMap b = BaseMap::make(flow_map(g, 1.0), sphere());
    double c = 0.0;
    for (int k = 0; k < 5; ++k) {
      const BoxField H = smooth_interior(g, 3, 1.0, rng);
      c = std::max(c, w_norm(solve_linearized(b, H)).total / z_norm(H));
    }
    cs.push_back(c);
  }
  CHECK(ratio_spread(cs) <= 2.0);
}

TEST_CASE("harmonic extension plus potential: W seminorm bound is refinement-stable") {
  std::vector<double> cs;
  for (int n : {17, 33, 65}) {
    Rng rng(41);
    const auto g = box(2, n);
    double c = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double a1 = rng.uniform(-2.0, 2.0), a2 = rng.uniform(-2.0, 2.0), ph = rng.uniform(0.0, 2.0 * kPi);
      BoxField f(g, 1);
      for (std::size_t s : g->boundary()) f.at(0, s) = std::cos(a1 * g->coord(s, 0) + a2 * g->coord(s, 1) + ph);
      const BoxField F = smooth_interior(g, 1, rng.uniform(1.0, 10.0), rng);
      double fsup = 0.0;
      for (double x : f.data) fsup = std::max(fsup, std::abs(x));
      const BoxField u = box_harmonic_extension(f) + box_potential(F);
      c = std::max(c, w_norm(u).seminorm() / (fsup + z_norm(F)));
    }
    cs.push_back(c);
  }
  CHECK(ratio_spread(cs) <= 2.0);
}

TEST_CASE("solve_perturbation on a constant base") {
  const auto g = box(3, 9);
  const BaseMap b = BaseMap::make(constant_map(g), sphere());
  PerturbationProblem P;
  P.base = &b;
  P.f = b.trace();
  const BoxSolveResult same = solve_perturbation(P);
  CHECK(same.trace.converged);
  CHECK(same.trace.iterations == 1);
  CHECK(sup_diff(same.u, b.v) == 0.0);
  for (double x : same.w.data) CHECK(x == 0.0);

  P.f = cap_data(b, 0.05, 0.3);
  const BoxSolveResult r = solve_perturbation(P);
  REQUIRE(r.trace.converged);
  const BoxSolveResult d = box_picard(P.f, sphere());
  REQUIRE(d.trace.converged);
  CHECK(sup_diff(r.u, d.u) <= 1e-6);
  for (std::size_t s : g->boundary())
    for (int c = 0; c < 3; ++c) CHECK(r.u.at(c, s) == P.f.at(c, s));
}

TEST_CASE("large nonconstant base: certified, contracting, constraint holds") {
  std::vector<double> dist;
  std::vector<double> theta;
  for (int n : {9, 17}) {
    const auto g = box(3, n);
    const BaseMap b = BaseMap::make(flow_map(g, 1.0), sphere());
    CHECK(b.sup_dist <= 1e-8);
    CHECK(b.weak_residual <= 0.05);
    const StabilityEstimate e = estimate_stability_constant(b);
    CHECK(e.stable);
    CHECK(e.M > 0.0);
    for (double amp : {0.05, 0.1}) {
      PerturbationProblem P;
      P.base = &b;
      P.f = cap_data(b, amp, 0.3);
      const BoxSolveResult r = solve_perturbation(P);
      REQUIRE(r.trace.converged);
      for (std::size_t i = P.options.burn_in; i < r.trace.ratios.size(); ++i)
        if (!std::isnan(r.trace.ratios[i])) CHECK(r.trace.ratios[i] < 1.0);
      const BoxConstraintReport c = verify_box_constraint(r.u, sphere());
      CHECK(c.tube_ok);
      CHECK(c.subharmonic_defect >= -1e-6);
      CHECK(c.boundary_dist <= 1e-15);
      if (n == 17) theta.push_back(r.trace.limiting_ratio());
      if (amp == 0.05) dist.push_back(c.sup_dist);
    }
  }
  // Contraction ratio grows with the size of the perturbation.
  CHECK(theta[1] > theta[0]);
  CHECK(dist[1] < dist[0]);
}
