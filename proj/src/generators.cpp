#include "wharm/generators.hpp"

#include <cmath>
#include <numbers>

#include "wharm/error.hpp"

namespace wharm {
namespace {

constexpr int kM = 3;

void set_geodesic(BoundaryData& f, std::size_t s, double angle) {
  // p = e3, q = e1: exp_p(angle q) = (sin, 0, cos).
  f.dev(0, s) = std::sin(angle);
  f.dev(1, s) = 0.0;
  f.dev(2, s) = std::cos(angle) - 1.0;
}

}  // namespace

double bump(double t) {
  const double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - a * a));
}

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names = {"constant", "geodesic_cap", "step_geodesic",
                                                 "log_spiral"};
  return names;
}

GeneratorParams generator_defaults(const std::string& name) {
  if (name == "constant") return {};
  if (name == "geodesic_cap") return {{"amplitude", 0.05}, {"radius", 1.0}};
  if (name == "step_geodesic") return {{"amplitude", 0.5}, {"full", 0.0}};
  if (name == "log_spiral") return {{"lambda", 0.2}};
  throw Error(ErrorCode::UnknownGenerator, "unknown generator '" + name + "'");
}

BoundaryData generate_boundary_data(const std::string& name, const GeneratorParams& params, int n,
                                    double L) {
  GeneratorParams prm = generator_defaults(name);
  for (const auto& [k, v] : params) {
    if (!prm.count(k))
      throw Error(ErrorCode::InvalidArgument, "generator '" + name + "' has no parameter '" + k + "'");
    prm[k] = v;
  }
  if (n < 3 || n % 2 == 0) throw Error(ErrorCode::InvalidArgument, "boundary grid needs odd n >= 3");
  BoundaryData f(n, L, Vec{0.0, 0.0, 1.0});
  f.generator = name;
  f.params.assign(prm.begin(), prm.end());
  if (name == "constant") return f;

  if (name == "geodesic_cap") {
    const double amp = prm["amplitude"], r0 = prm["radius"];
    if (!(std::abs(amp) < std::numbers::pi))
      throw Error(ErrorCode::AmplitudeOutOfRange, "cap amplitude must be below pi");
    if (!(r0 > 0.0) || r0 >= 0.5 * L)
      throw Error(ErrorCode::InvalidArgument, "cap radius must lie in (0, L/2)");
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double r = std::hypot(f.x(i), f.x(j));
        set_geodesic(f, static_cast<std::size_t>(j) * n + i, amp * bump(r / r0));
      }
    return f;
  }

  if (name == "step_geodesic") {
    const double amp = prm["amplitude"];
    const bool full = prm["full"] != 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double x1 = f.x(i), x2 = f.x(j);
        const std::size_t s = static_cast<std::size_t>(j) * n + i;
        if (full)
          set_geodesic(f, s, x1 >= 0.0 ? 0.5 * amp : -0.5 * amp);
        else if (x1 >= 0.0 && x1 < 0.5 * L && std::abs(x2) < 0.5 * L)
          set_geodesic(f, s, amp);
      }
    return f;
  }

  // log_spiral
  const double lambda = prm["lambda"], R = 0.5 * L;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double r = std::hypot(f.x(i), f.x(j));
      if (r == 0.0 || r >= R) continue;
      const double chi = blend_cutoff(r - 0.5 * R, 0.0, 0.5 * R);
      set_geodesic(f, static_cast<std::size_t>(j) * n + i, lambda * std::log(r / R) * chi);
    }
  return f;
}

}  // namespace wharm
