#pragma once

#include <cmath>

namespace hopfinf {

/// Forward-mode dual number carrying the partials with respect to x and y.
struct Dual {
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: constants promote implicitly
  constexpr Dual(double value, double ddx, double ddy) : v(value), dx(ddx), dy(ddy) {}
};

constexpr Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.dx + b.dx, a.dy + b.dy}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.dx - b.dx, a.dy - b.dy}; }
constexpr Dual operator-(Dual a) { return {-a.v, -a.dx, -a.dy}; }
constexpr Dual operator*(Dual a, Dual b) {
  return {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy};
}
constexpr Dual operator/(Dual a, Dual b) {
  const double q = a.v / b.v;
  return {q, (a.dx - q * b.dx) / b.v, (a.dy - q * b.dy) / b.v};
}

inline Dual sin(Dual a) {
  const double c = std::cos(a.v);
  return {std::sin(a.v), c * a.dx, c * a.dy};
}
inline Dual cos(Dual a) {
  const double s = -std::sin(a.v);
  return {std::cos(a.v), s * a.dx, s * a.dy};
}
inline Dual exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, e * a.dx, e * a.dy};
}
inline Dual sqrt(Dual a) {
  const double s = std::sqrt(a.v);
  const double k = 0.5 / s;
  return {s, k * a.dx, k * a.dy};
}
inline Dual atan2(Dual y, Dual x) {
  const double d = x.v * x.v + y.v * y.v;
  return {std::atan2(y.v, x.v), (x.v * y.dx - y.v * x.dx) / d, (x.v * y.dy - y.v * x.dy) / d};
}
inline Dual powi(Dual a, int n) {
  if (n == 0) return {1.0};
  const double p1 = std::pow(a.v, n - 1);
  const double k = n * p1;
  return {p1 * a.v, k * a.dx, k * a.dy};
}
inline double powi(double a, int n) { return std::pow(a, n); }

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Dual& d) {
  return std::isfinite(d.v) && std::isfinite(d.dx) && std::isfinite(d.dy);
}

}  // namespace hopfinf
