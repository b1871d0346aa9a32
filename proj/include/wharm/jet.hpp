#pragma once

#include <cmath>

namespace wharm {

// Value with first and second derivative in one scalar variable.
struct Jet {
  double v = 0.0, d1 = 0.0, d2 = 0.0;

  static Jet constant(double c) { return {c, 0.0, 0.0}; }
  static Jet variable(double x) { return {x, 1.0, 0.0}; }
};

inline Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet operator+(double c, Jet a) { return {c + a.v, a.d1, a.d2}; }
inline Jet operator-(double c, Jet a) { return {c - a.v, -a.d1, -a.d2}; }
inline Jet operator-(Jet a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet operator*(Jet a, Jet b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet operator*(double c, Jet a) { return {c * a.v, c * a.d1, c * a.d2}; }
inline Jet reciprocal(Jet a) {
  const double r = 1.0 / a.v;
  return {r, -a.d1 * r * r, -a.d2 * r * r + 2.0 * a.d1 * a.d1 * r * r * r};
}
inline Jet operator/(Jet a, Jet b) { return a * reciprocal(b); }
inline Jet exp(Jet a) {
  const double e = std::exp(a.v);
  return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
}

}  // namespace wharm
