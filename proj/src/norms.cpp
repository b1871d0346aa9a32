#include "wharm/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wharm/error.hpp"

namespace wharm {
namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_vec(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

std::vector<int> halfwidth_table(double h, double r) {
  std::vector<int> hw;
  for (long dj = 0;; ++dj) {
    if (!in_ball(0, dj, h, r)) break;
    long di = 0;
    while (in_ball(di + 1, dj, h, r)) ++di;
    hw.push_back(static_cast<int>(di));
  }
  return hw;
}

struct CarlesonMax {
  double value = 0.0;
  Vec center;
  double radius = 0.0;
};

// Max over sampled balls of r^{-2} * h^2 * sum_{disc} C_r, where C_k is the
// cumulative vertical integral of the per-level density g_k = z_k * q_k.
CarlesonMax carleson_max(const HalfSpaceGrid& grid, const std::vector<double>& q) {
  const int n = grid.n(), Kt = grid.K();
  const std::size_t plane = grid.plane();
  const BallSampler bs = BallSampler::halfspace(grid);
  const auto& z = grid.z();
  std::vector<double> C(plane, 0.0), prefix(static_cast<std::size_t>(n) * (n + 1));
  CarlesonMax best;
  std::size_t next_radius = 0;
  for (int k = 1; k <= Kt; ++k) {
    const double* g0 = q.data() + static_cast<std::size_t>(k - 1) * plane;
    const double* g1 = q.data() + static_cast<std::size_t>(k) * plane;
    const double lo = grid.seg_lo()[k] * z[k - 1], hi = grid.seg_hi()[k] * z[k];
    for (std::size_t s = 0; s < plane; ++s) C[s] += lo * g0[s] + hi * g1[s];
    while (next_radius < bs.radii.size() && bs.level[next_radius] < k) ++next_radius;
    if (next_radius >= bs.radii.size() || bs.level[next_radius] != k) continue;
    const std::size_t ri = next_radius;
    const double r = bs.radii[ri];
    for (int j = 0; j < n; ++j) {
      double* P = prefix.data() + static_cast<std::size_t>(j) * (n + 1);
      P[0] = 0.0;
      for (int i = 0; i < n; ++i) P[i + 1] = P[i] + C[static_cast<std::size_t>(j) * n + i];
    }
    const auto& hw = bs.halfwidth[ri];
    const int R = static_cast<int>(hw.size()) - 1;
    const double scale = grid.h() * grid.h() / (r * r);
    for (int jc = 0; jc < n; ++jc)
      for (int ic = 0; ic < n; ++ic) {
        if (!bs.center_inside(ic, jc, ri)) continue;
        double e = 0.0;
        for (int dj = -R; dj <= R; ++dj) {
          const int w = hw[std::abs(dj)];
          const double* P = prefix.data() + static_cast<std::size_t>(jc + dj) * (n + 1);
          e += P[ic + w + 1] - P[ic - w];
        }
        e *= scale;
        if (e > best.value) {
          best.value = e;
          best.center = {grid.x(ic), grid.x(jc)};
          best.radius = r;
        }
      }
  }
  return best;
}

}  // namespace

std::string NormReport::to_kv() const {
  std::ostringstream os;
  os << "sup_norm = " << fmt(sup_norm) << "\n";
  os << "weighted_grad_sup = " << fmt(weighted_grad_sup) << "\n";
  os << "carleson_energy = " << fmt(carleson_energy) << "\n";
  os << "total = " << fmt(total) << "\n";
  os << "sup_at = " << fmt_vec(sup_at) << "\n";
  os << "grad_at = " << fmt_vec(grad_at) << "\n";
  os << "carleson_center = " << fmt_vec(carleson_center) << "\n";
  os << "carleson_radius = " << fmt(carleson_radius) << "\n";
  os << "clipped_balls = " << clipped_balls << "\n";
  return os.str();
}

std::string NormReport::csv_header() { return "sup_norm,weighted_grad_sup,carleson_energy,total"; }

std::string NormReport::csv_row() const {
  return fmt(sup_norm) + "," + fmt(weighted_grad_sup) + "," + fmt(carleson_energy) + "," + fmt(total);
}

BallSampler BallSampler::halfspace(const HalfSpaceGrid& grid) {
  BallSampler bs;
  bs.n = grid.n();
  bs.L = grid.L();
  bs.h = grid.h();
  for (int k = 1; k <= grid.K(); ++k) {
    const double r = grid.z()[k];
    if (r > grid.L()) break;
    bs.radii.push_back(r);
    bs.level.push_back(k);
    bs.halfwidth.push_back(halfwidth_table(bs.h, r));
  }
  return bs;
}

BallSampler BallSampler::boundary(int n, double L, const std::vector<double>& radii) {
  BallSampler bs;
  bs.n = n;
  bs.L = L;
  bs.h = 2.0 * L / (n - 1);
  for (double r : radii) {
    if (!(r > 0.0) || r > L) throw Error(ErrorCode::InvalidArgument, "ball radius outside window");
    bs.radii.push_back(r);
    bs.level.push_back(-1);
    bs.halfwidth.push_back(halfwidth_table(bs.h, r));
  }
  return bs;
}

std::vector<double> BallSampler::geometric_radii(double L, double h) {
  std::vector<double> r;
  for (double x = 0.75 * L; x >= h; x *= 0.75) r.push_back(x);
  return r;
}

bool BallSampler::center_inside(int i, int j, std::size_t r) const {
  const double rad = radii[r];
  constexpr double slack = 1e-12;
  return std::abs(x(i)) + rad <= L + slack && std::abs(x(j)) + rad <= L + slack;
}

NormReport x_norm(const Field& u) {
  const HalfSpaceGrid& g = *u.grid;
  const std::size_t plane = g.plane(), N = g.nodes();
  const Gradient G = gradient(u);
  NormReport rep;
  double best_sup = -1.0;
  for (std::size_t s = 0; s < N; ++s) {
    double a = 0.0;
    for (int c = 0; c < u.m; ++c) a += u.at(c, s) * u.at(c, s);
    if (a > best_sup) {
      best_sup = a;
      const int k = static_cast<int>(s / plane), j = static_cast<int>((s % plane) / g.n()),
                i = static_cast<int>(s % g.n());
      rep.sup_at = {g.x(i), g.x(j), g.z()[k]};
    }
  }
  rep.sup_norm = std::sqrt(best_sup);
  std::vector<double> q(N);
  for (std::size_t s = 0; s < N; ++s) q[s] = G.norm2(s);
  rep.grad_at = {0.0, 0.0, 0.0};
  for (int k = 1; k <= g.K(); ++k)
    for (std::size_t s = 0; s < plane; ++s) {
      const std::size_t node = static_cast<std::size_t>(k) * plane + s;
      const double w = g.z()[k] * std::sqrt(q[node]);
      if (w > rep.weighted_grad_sup) {
        rep.weighted_grad_sup = w;
        rep.grad_at = {g.x(static_cast<int>(s % g.n())), g.x(static_cast<int>(s / g.n())), g.z()[k]};
      }
    }
  const CarlesonMax cm = carleson_max(g, q);
  rep.carleson_energy = std::sqrt(cm.value);
  rep.carleson_center = cm.center;
  rep.carleson_radius = cm.radius;
  rep.clipped_balls = 0;
  rep.total = rep.sup_norm + rep.weighted_grad_sup + rep.carleson_energy;
  return rep;
}

double y_norm(const Field& F) {
  const HalfSpaceGrid& g = *F.grid;
  const std::size_t plane = g.plane(), N = g.nodes();
  std::vector<double> q(N);
  for (std::size_t s = 0; s < N; ++s) {
    double a = 0.0;
    for (int c = 0; c < F.m; ++c) a += F.at(c, s) * F.at(c, s);
    q[s] = std::sqrt(a);
  }
  double sup = 0.0;
  for (int k = 1; k <= g.K(); ++k)
    for (std::size_t s = 0; s < plane; ++s)
      sup = std::max(sup, g.z()[k] * g.z()[k] * q[static_cast<std::size_t>(k) * plane + s]);
  return sup + carleson_max(g, q).value;
}

BmoReport bmo_report(const BoundaryData& f, const std::vector<double>& radii) {
  const int n = f.n, m = f.m();
  const BallSampler bs = BallSampler::boundary(n, f.L, radii);
  const std::size_t S = f.samples();
  std::vector<double> val(S * m);
  for (std::size_t s = 0; s < S; ++s)
    for (int c = 0; c < m; ++c) val[s * m + c] = f.p[c] + f.dev(c, s);
  // Balls that miss every sample differing from sample 0 have zero oscillation.
  int i0 = n, i1 = -1, j0 = n, j1 = -1;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(j) * n + i;
      bool differs = false;
      for (int c = 0; c < m; ++c) differs = differs || val[s * m + c] != val[c];
      if (differs) {
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
      }
    }
  BmoReport rep;
  if (i1 < 0) return rep;
  std::vector<double> mean(m);
  for (std::size_t ri = 0; ri < bs.radii.size(); ++ri) {
    const auto& hw = bs.halfwidth[ri];
    const int R = static_cast<int>(hw.size()) - 1;
    for (int jc = 0; jc < n; ++jc)
      for (int ic = 0; ic < n; ++ic) {
        if (!bs.center_inside(ic, jc, ri)) continue;
        if (jc + R < j0 || jc - R > j1 || ic + R < i0 || ic - R > i1) continue;
        ++rep.balls;
        std::fill(mean.begin(), mean.end(), 0.0);
        std::size_t count = 0;
        for (int dj = -R; dj <= R; ++dj) {
          const int w = hw[std::abs(dj)];
          for (int di = -w; di <= w; ++di) {
            const std::size_t s = static_cast<std::size_t>(jc + dj) * n + (ic + di);
            for (int c = 0; c < m; ++c) mean[c] += val[s * m + c];
            ++count;
          }
        }
        for (int c = 0; c < m; ++c) mean[c] /= static_cast<double>(count);
        double osc = 0.0;
        for (int dj = -R; dj <= R; ++dj) {
          const int w = hw[std::abs(dj)];
          for (int di = -w; di <= w; ++di) {
            const std::size_t s = static_cast<std::size_t>(jc + dj) * n + (ic + di);
            double a = 0.0;
            for (int c = 0; c < m; ++c) {
              const double e = val[s * m + c] - mean[c];
              a += e * e;
            }
            osc += std::sqrt(a);
          }
        }
        osc /= static_cast<double>(count);
        if (osc > rep.value) {
          rep.value = osc;
          rep.center = {f.x(ic), f.x(jc)};
          rep.radius = bs.radii[ri];
        }
      }
  }
  return rep;
}

BmoReport bmo_report(const BoundaryData& f) {
  return bmo_report(f, BallSampler::geometric_radii(f.L, f.h()));
}

double bmo_norm(const BoundaryData& f) { return bmo_report(f).value; }

}  // namespace wharm
