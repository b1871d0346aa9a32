#pragma once

/// Runtime-selected numeric kernels.
///
/// Every kernel has a scalar reference implementation and an AVX2/FMA variant.
/// The variant is chosen once per process from CPU support; setting the
/// environment variable WHARM_SIMD=scalar forces the reference path.

#include <cstddef>

namespace wharm::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  const char* name;
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  // out = a * x + b * y + c * z; out may alias any input.
  void (*lincomb3)(double a, const double* x, double b, const double* y, double c, const double* z,
                   double* out, std::size_t n);
  // One forward-elimination level of a batch of tridiagonal systems sharing
  // the off-diagonals; system i has diagonal diag + mu[i].
  void (*thomas_forward)(const double* mu, double lower, double diag, double upper,
                         const double* cp_prev, const double* dp_prev, const double* r, double* cp,
                         double* dp, std::size_t n);
  // x = dp - cp * x_next
  void (*thomas_backward)(const double* cp, const double* dp, const double* x_next, double* x,
                          std::size_t n);
  // out[c] += sum_j -Hess(z/|z|)(V_j, V_j)_c with z = u, V_j = grad[j*m + .].
  // Component-planar inputs; valid wherever the extension equals z/|z|.
  void (*sphere_source)(int m, int d, const double* const* u, const double* const* grad,
                        double* const* out, std::size_t n);
};

bool cpu_has_avx2();
Isa active_isa();
const char* isa_name(Isa isa);
const KernelTable& kernels();
// Throws if the requested variant is not supported on this CPU.
const KernelTable& kernels_for(Isa isa);

namespace detail {
extern const KernelTable scalar_table;
extern const KernelTable avx2_table;
}  // namespace detail

}  // namespace wharm::simd
