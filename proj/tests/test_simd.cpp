#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "support.hpp"
#include "wharm/simd.hpp"

using namespace wharm;
using wharm::testing::Rng;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 101, 1000};

}  // namespace

TEST_CASE("scalar table is always available and forced by the environment variable") {
  CHECK(std::string(simd::kernels_for(simd::Isa::Scalar).name) == "scalar");
  const char* env = std::getenv("WHARM_SIMD");
  if (env && std::string(env) == "scalar") CHECK(simd::active_isa() == simd::Isa::Scalar);
  if (!simd::cpu_has_avx2()) CHECK_THROWS(simd::kernels_for(simd::Isa::Avx2));
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  if (!simd::cpu_has_avx2()) {
    MESSAGE("AVX2/FMA not available; equivalence test skipped");
    return;
  }
  const auto& S = simd::kernels_for(simd::Isa::Scalar);
  const auto& A = simd::kernels_for(simd::Isa::Avx2);
  Rng rng(7);
  for (std::size_t n : kLengths) {
    CAPTURE(n);
    const auto x = random_vec(rng, n), y0 = random_vec(rng, n), z = random_vec(rng, n);
    auto ys = y0, ya = y0;
    S.axpy(0.37, x.data(), ys.data(), n);
    A.axpy(0.37, x.data(), ya.data(), n);
    CHECK(testing::max_abs_diff(ys, ya) <= 1e-15);

    CHECK(rel_diff(A.dot(x.data(), y0.data(), n), S.dot(x.data(), y0.data(), n)) <= 1e-13);
    CHECK(A.max_abs(x.data(), n) == S.max_abs(x.data(), n));

    std::vector<double> os(n), oa(n);
    S.lincomb3(0.5, x.data(), -1.25, y0.data(), 2.0, z.data(), os.data(), n);
    A.lincomb3(0.5, x.data(), -1.25, y0.data(), 2.0, z.data(), oa.data(), n);
    CHECK(testing::max_abs_diff(os, oa) <= 1e-15);

    // Tridiagonal sweep: diagonally dominant so the recurrences stay bounded.
    const auto mu = random_vec(rng, n, 0.0, 4.0), cp0 = random_vec(rng, n, -0.4, 0.4);
    const auto dp0 = random_vec(rng, n), r = random_vec(rng, n);
    std::vector<double> cps(n), dps(n), cpa(n), dpa(n);
    S.thomas_forward(mu.data(), -1.0, 3.0, -1.0, cp0.data(), dp0.data(), r.data(), cps.data(), dps.data(), n);
    A.thomas_forward(mu.data(), -1.0, 3.0, -1.0, cp0.data(), dp0.data(), r.data(), cpa.data(), dpa.data(), n);
    CHECK(testing::max_abs_diff(cps, cpa) <= 1e-14);
    CHECK(testing::max_abs_diff(dps, dpa) <= 1e-14);
    std::vector<double> xs(n), xa(n);
    S.thomas_backward(cps.data(), dps.data(), x.data(), xs.data(), n);
    A.thomas_backward(cps.data(), dps.data(), x.data(), xa.data(), n);
    CHECK(testing::max_abs_diff(xs, xa) <= 1e-14);
  }
}

TEST_CASE("AVX2 sphere source matches the scalar reference") {
  if (!simd::cpu_has_avx2()) return;
  const auto& S = simd::kernels_for(simd::Isa::Scalar);
  const auto& A = simd::kernels_for(simd::Isa::Avx2);
  Rng rng(11);
  const int m = 3, d = 3;
  for (std::size_t n : kLengths) {
    CAPTURE(n);
    std::vector<std::vector<double>> u(m), g(d * m), os(m, std::vector<double>(n, 0.5)), oa(m, std::vector<double>(n, 0.5));
    for (auto& c : u) c = random_vec(rng, n, 0.6, 1.2);
    for (auto& c : g) c = random_vec(rng, n);
    std::vector<const double*> up, gp;
    std::vector<double*> sp, ap;
    for (auto& c : u) up.push_back(c.data());
    for (auto& c : g) gp.push_back(c.data());
    for (auto& c : os) sp.push_back(c.data());
    for (auto& c : oa) ap.push_back(c.data());
    S.sphere_source(m, d, up.data(), gp.data(), sp.data(), n);
    A.sphere_source(m, d, up.data(), gp.data(), ap.data(), n);
    for (int c = 0; c < m; ++c) CHECK(testing::max_abs_diff(os[c], oa[c]) <= 1e-13);
  }
}

TEST_CASE("axpy rounding does not depend on the element position") {
  // Translation equivariance of the extension relies on this.
  Rng rng(3);
  const std::size_t n = 40;
  const auto x = random_vec(rng, n + 8), y = random_vec(rng, n + 8);
  for (const auto* K : {&simd::kernels_for(simd::Isa::Scalar), &simd::kernels()}) {
    for (std::size_t off = 1; off < 8; ++off) {
      auto y1 = y, y2 = y;
      K->axpy(0.3, x.data(), y1.data(), n + 8);
      K->axpy(0.3, x.data() + off, y2.data() + off, n + 8 - off);
      for (std::size_t i = off; i < n + 8; ++i) CHECK(y1[i] == y2[i]);
    }
  }
}

TEST_CASE("sphere source on the sphere reduces to |V|^2 z for tangent V") {
  const auto& K = simd::kernels();
  const int m = 3, d = 1;
  std::vector<double> u0{1.0}, u1{0.0}, u2{0.0}, g0{0.0}, g1{2.0}, g2{0.0}, o0{0.0}, o1{0.0}, o2{0.0};
  const double* up[] = {u0.data(), u1.data(), u2.data()};
  const double* gp[] = {g0.data(), g1.data(), g2.data()};
  double* op[] = {o0.data(), o1.data(), o2.data()};
  K.sphere_source(m, d, up, gp, op, 1);
  CHECK(o0[0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(std::abs(o1[0]) <= 1e-15);
  CHECK(std::abs(o2[0]) <= 1e-15);
}
