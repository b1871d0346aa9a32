// Compiled with -mavx2 -mfma; reached only through the dispatch table.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "wharm/simd.hpp"

namespace wharm::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Tail elements use std::fma so that every element sees the same rounding,
// independent of its position relative to the vector boundary.
void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

double max_abs(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::max(r, std::abs(x[i]));
  return r;
}

void lincomb3(double a, const double* x, double b, const double* y, double c, const double* z,
              double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b), vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    t = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), t);
    t = _mm256_fmadd_pd(vc, _mm256_loadu_pd(z + i), t);
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < n; ++i) out[i] = std::fma(c, z[i], std::fma(b, y[i], a * x[i]));
}

void thomas_forward(const double* mu, double lower, double diag, double upper,
                    const double* cp_prev, const double* dp_prev, const double* r, double* cp,
                    double* dp, std::size_t n) {
  const __m256d vl = _mm256_set1_pd(lower), vd = _mm256_set1_pd(diag), vu = _mm256_set1_pd(upper);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d den =
        _mm256_fnmadd_pd(vl, _mm256_loadu_pd(cp_prev + i), _mm256_add_pd(vd, _mm256_loadu_pd(mu + i)));
    const __m256d inv = _mm256_div_pd(one, den);
    _mm256_storeu_pd(cp + i, _mm256_mul_pd(vu, inv));
    const __m256d num = _mm256_fnmadd_pd(vl, _mm256_loadu_pd(dp_prev + i), _mm256_loadu_pd(r + i));
    _mm256_storeu_pd(dp + i, _mm256_mul_pd(num, inv));
  }
  for (; i < n; ++i) {
    const double inv = 1.0 / std::fma(-lower, cp_prev[i], diag + mu[i]);
    cp[i] = upper * inv;
    dp[i] = std::fma(-lower, dp_prev[i], r[i]) * inv;
  }
}

void thomas_backward(const double* cp, const double* dp, const double* x_next, double* x,
                     std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_fnmadd_pd(_mm256_loadu_pd(cp + i), _mm256_loadu_pd(x_next + i),
                                             _mm256_loadu_pd(dp + i)));
  for (; i < n; ++i) x[i] = std::fma(-cp[i], x_next[i], dp[i]);
}

void sphere_source_tail(int m, int d, const double* const* u, const double* const* grad,
                        double* const* out, std::size_t i) {
  double r2 = 0.0;
  for (int c = 0; c < m; ++c) r2 = std::fma(u[c][i], u[c][i], r2);
  const double inv_r = 1.0 / std::sqrt(r2);
  const double inv_r3 = inv_r * inv_r * inv_r;
  const double inv_r5 = inv_r3 * inv_r * inv_r;
  for (int j = 0; j < d; ++j) {
    const double* const* V = grad + static_cast<std::size_t>(j) * m;
    double zv = 0.0, vv = 0.0;
    for (int c = 0; c < m; ++c) {
      zv = std::fma(u[c][i], V[c][i], zv);
      vv = std::fma(V[c][i], V[c][i], vv);
    }
    for (int c = 0; c < m; ++c)
      out[c][i] += (2.0 * V[c][i] * zv + vv * u[c][i]) * inv_r3 - 3.0 * zv * zv * u[c][i] * inv_r5;
  }
}

void sphere_source(int m, int d, const double* const* u, const double* const* grad,
                   double* const* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0), two = _mm256_set1_pd(2.0), three = _mm256_set1_pd(3.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r2 = _mm256_setzero_pd();
    for (int c = 0; c < m; ++c) {
      const __m256d uc = _mm256_loadu_pd(u[c] + i);
      r2 = _mm256_fmadd_pd(uc, uc, r2);
    }
    const __m256d inv_r = _mm256_div_pd(one, _mm256_sqrt_pd(r2));
    const __m256d inv_r2 = _mm256_mul_pd(inv_r, inv_r);
    const __m256d inv_r3 = _mm256_mul_pd(inv_r2, inv_r);
    const __m256d inv_r5 = _mm256_mul_pd(inv_r3, inv_r2);
    for (int j = 0; j < d; ++j) {
      const double* const* V = grad + static_cast<std::size_t>(j) * m;
      __m256d zv = _mm256_setzero_pd(), vv = _mm256_setzero_pd();
      for (int c = 0; c < m; ++c) {
        const __m256d vc = _mm256_loadu_pd(V[c] + i);
        zv = _mm256_fmadd_pd(_mm256_loadu_pd(u[c] + i), vc, zv);
        vv = _mm256_fmadd_pd(vc, vc, vv);
      }
      const __m256d a = _mm256_mul_pd(two, zv);
      const __m256d b = _mm256_mul_pd(_mm256_mul_pd(three, _mm256_mul_pd(zv, zv)), inv_r5);
      for (int c = 0; c < m; ++c) {
        const __m256d uc = _mm256_loadu_pd(u[c] + i);
        const __m256d vc = _mm256_loadu_pd(V[c] + i);
        const __m256d t1 = _mm256_mul_pd(_mm256_fmadd_pd(a, vc, _mm256_mul_pd(vv, uc)), inv_r3);
        const __m256d t = _mm256_fnmadd_pd(b, uc, t1);
        _mm256_storeu_pd(out[c] + i, _mm256_add_pd(_mm256_loadu_pd(out[c] + i), t));
      }
    }
  }
  for (; i < n; ++i) sphere_source_tail(m, d, u, grad, out, i);
}

}  // namespace

namespace detail {
const KernelTable avx2_table = {"avx2",         axpy,           dot,
                                max_abs,        lincomb3,       thomas_forward,
                                thomas_backward, sphere_source};
}  // namespace detail

}  // namespace wharm::simd
