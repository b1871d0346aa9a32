#include "wharm/fast_poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "wharm/error.hpp"
#include "wharm/simd.hpp"

namespace wharm {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place batched DST-I (unnormalised; applying it twice scales by prod 2(N+1)).
void dst_many(double* data, int rank, const int* dims, int howmany) {
  int size = 1;
  for (int r = 0; r < rank; ++r) size *= dims[r];
  std::vector<fftw_r2r_kind> kinds(rank, FFTW_RODFT00);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_many_r2r(rank, dims, howmany, data, nullptr, 1, size, data, nullptr, 1, size,
                              kinds.data(), FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error(ErrorCode::SolverFailure, "FFTW planning failed");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::vector<double> dirichlet_eigenvalues(int N, double h) {
  std::vector<double> mu(N);
  for (int p = 0; p < N; ++p) mu[p] = (2.0 - 2.0 * std::cos(M_PI * (p + 1) / (N + 1))) / (h * h);
  return mu;
}

}  // namespace

GradedPoissonSolver::GradedPoissonSolver(const HalfSpaceGrid& grid) : g_(grid) {
  const int N = grid.n() - 2;
  const std::vector<double> m1 = dirichlet_eigenvalues(N, grid.h());
  mu_.resize(static_cast<std::size_t>(N) * N);
  for (int q = 0; q < N; ++q)
    for (int p = 0; p < N; ++p) mu_[static_cast<std::size_t>(q) * N + p] = m1[p] + m1[q];
  const auto& z = grid.z();
  lower_.assign(grid.K() + 1, 0.0);
  upper_.assign(grid.K() + 1, 0.0);
  for (int k = 1; k < grid.K(); ++k) {
    const double h1 = z[k] - z[k - 1], h2 = z[k + 1] - z[k];
    lower_[k] = 2.0 / (h1 * (h1 + h2));
    upper_[k] = 2.0 / (h2 * (h1 + h2));
  }
}

void GradedPoissonSolver::solve(const double* rhs, double* u, double shift) const {
  const int n = g_.n(), N = n - 2, Kint = g_.K() - 1;
  const std::size_t plane = g_.plane(), M = static_cast<std::size_t>(N) * N;
  const double ih2 = 1.0 / (g_.h() * g_.h());
  std::vector<double> buf(M * Kint);
  for (int kk = 0; kk < Kint; ++kk) {
    const int k = kk + 1;
    for (int jj = 0; jj < N; ++jj)
      for (int ii = 0; ii < N; ++ii) {
        const std::size_t s = g_.index(ii + 1, jj + 1, k);
        double b = rhs[s];
        if (ii == 0) b += u[s - 1] * ih2;
        if (ii == N - 1) b += u[s + 1] * ih2;
        if (jj == 0) b += u[s - n] * ih2;
        if (jj == N - 1) b += u[s + n] * ih2;
        if (kk == 0) b += lower_[k] * u[s - plane];
        if (kk == Kint - 1) b += upper_[k] * u[s + plane];
        buf[kk * M + static_cast<std::size_t>(jj) * N + ii] = b;
      }
  }
  const int dims[2] = {N, N};
  dst_many(buf.data(), 2, dims, Kint);

  const auto& K = simd::kernels();
  std::vector<double> cp(M * Kint), dp(M * Kint), zero(M, 0.0);
  for (int kk = 0; kk < Kint; ++kk) {
    const int k = kk + 1;
    const double lower = kk == 0 ? 0.0 : -lower_[k];
    const double diag = lower_[k] + upper_[k] + shift;
    const double* cprev = kk == 0 ? zero.data() : cp.data() + (kk - 1) * M;
    const double* dprev = kk == 0 ? zero.data() : dp.data() + (kk - 1) * M;
    K.thomas_forward(mu_.data(), lower, diag, -upper_[k], cprev, dprev, buf.data() + kk * M,
                     cp.data() + kk * M, dp.data() + kk * M, M);
  }
  std::copy(dp.begin() + (Kint - 1) * M, dp.end(), buf.begin() + (Kint - 1) * M);
  for (int kk = Kint - 2; kk >= 0; --kk)
    K.thomas_backward(cp.data() + kk * M, dp.data() + kk * M, buf.data() + (kk + 1) * M,
                      buf.data() + kk * M, M);
  dst_many(buf.data(), 2, dims, Kint);
  const double scale = 1.0 / (4.0 * (N + 1.0) * (N + 1.0));
  for (int kk = 0; kk < Kint; ++kk)
    for (int jj = 0; jj < N; ++jj)
      for (int ii = 0; ii < N; ++ii)
        u[g_.index(ii + 1, jj + 1, kk + 1)] =
            buf[kk * M + static_cast<std::size_t>(jj) * N + ii] * scale;
}

UniformPoissonSolver::UniformPoissonSolver(int d, int n, double h) : d_(d), n_(n), h_(h) {
  if (d < 1 || d > 3 || n < 3) throw Error(ErrorCode::InvalidArgument, "unsupported box solver shape");
  mu1_ = dirichlet_eigenvalues(n - 2, h);
}

void UniformPoissonSolver::solve_interior(const double* b, double* x, double shift) const {
  const int N = n_ - 2;
  std::size_t total = 1;
  for (int a = 0; a < d_; ++a) total *= static_cast<std::size_t>(N);
  std::vector<double> buf(b, b + total);
  std::vector<int> dims(d_, N);
  dst_many(buf.data(), d_, dims.data(), 1);
  double scale = 1.0;
  for (int a = 0; a < d_; ++a) scale /= 2.0 * (N + 1.0);
  std::vector<int> idx(d_, 0);
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t r = s;
    double mu = shift;
    for (int a = 0; a < d_; ++a) {
      mu += mu1_[r % N];
      r /= N;
    }
    buf[s] /= mu;
  }
  dst_many(buf.data(), d_, dims.data(), 1);
  for (std::size_t s = 0; s < total; ++s) x[s] = buf[s] * scale;
}

void UniformPoissonSolver::solve(const double* rhs, double* u, double shift) const {
  const int n = n_, N = n - 2;
  const double ih2 = 1.0 / (h_ * h_);
  std::size_t total = 1, stride[3] = {1, 0, 0};
  for (int a = 0; a < d_; ++a) total *= static_cast<std::size_t>(N);
  for (int a = 1; a < d_; ++a) stride[a] = stride[a - 1] * n;
  std::vector<double> b(total), x(total);
  std::vector<std::size_t> node(total);
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t r = s, full = 0;
    int coord[3] = {0, 0, 0};
    for (int a = 0; a < d_; ++a) {
      coord[a] = static_cast<int>(r % N) + 1;
      r /= N;
      full += coord[a] * stride[a];
    }
    node[s] = full;
    double v = rhs[full];
    for (int a = 0; a < d_; ++a) {
      if (coord[a] == 1) v += u[full - stride[a]] * ih2;
      if (coord[a] == n - 2) v += u[full + stride[a]] * ih2;
    }
    b[s] = v;
  }
  solve_interior(b.data(), x.data(), shift);
  for (std::size_t s = 0; s < total; ++s) u[node[s]] = x[s];
}

}  // namespace wharm
