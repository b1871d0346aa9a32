#pragma once

// Shared helpers for the test binaries: a seeded RNG and small field utilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace wharm::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::vector<double> unit_vector(int m) {
    std::vector<double> v(m);
    double n = 0.0;
    do {
      n = 0.0;
      for (double& x : v) {
        x = uniform(-1.0, 1.0);
        n += x * x;
      }
    } while (n < 1e-4 || n > 1.0);
    for (double& x : v) x /= std::sqrt(n);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace wharm::testing
