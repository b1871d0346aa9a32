#include <algorithm>
#include <cmath>

#include "wharm/simd.hpp"

namespace wharm::simd {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

void lincomb3(double a, const double* x, double b, const double* y, double c, const double* z,
              double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i] + c * z[i];
}

void thomas_forward(const double* mu, double lower, double diag, double upper,
                    const double* cp_prev, const double* dp_prev, const double* r, double* cp,
                    double* dp, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / (diag + mu[i] - lower * cp_prev[i]);
    cp[i] = upper * inv;
    dp[i] = (r[i] - lower * dp_prev[i]) * inv;
  }
}

void thomas_backward(const double* cp, const double* dp, const double* x_next, double* x,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = dp[i] - cp[i] * x_next[i];
}

void sphere_source(int m, int d, const double* const* u, const double* const* grad,
                   double* const* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int c = 0; c < m; ++c) r2 += u[c][i] * u[c][i];
    const double inv_r = 1.0 / std::sqrt(r2);
    const double inv_r3 = inv_r * inv_r * inv_r;
    const double inv_r5 = inv_r3 * inv_r * inv_r;
    for (int j = 0; j < d; ++j) {
      const double* const* V = grad + static_cast<std::size_t>(j) * m;
      double zv = 0.0, vv = 0.0;
      for (int c = 0; c < m; ++c) {
        zv += u[c][i] * V[c][i];
        vv += V[c][i] * V[c][i];
      }
      for (int c = 0; c < m; ++c)
        out[c][i] += (2.0 * V[c][i] * zv + vv * u[c][i]) * inv_r3 - 3.0 * zv * zv * u[c][i] * inv_r5;
    }
  }
}

}  // namespace

namespace detail {
const KernelTable scalar_table = {"scalar",       axpy,           dot,
                                  max_abs,        lincomb3,       thomas_forward,
                                  thomas_backward, sphere_source};
}  // namespace detail

}  // namespace wharm::simd
