#include <cmath>
#include <limits>

#include "hopfinf/error.hpp"
#include "hopfinf/flux_index.hpp"
#include "hopfinf/parallel.hpp"

namespace hopfinf {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Sample {
  double value;
  double scale;  // magnitude of the terms that cancel into value
};

// Periodic trapezoid rule on [0, 2pi), refined by doubling. Converges
// geometrically for smooth periodic integrands.
template <class F>
Estimate periodic_trapezoid(F&& integrand, const QuadratureControls& q) {
  int n = 32;
  double sum = 0.0;
  double abs_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const Sample v = integrand(kTwoPi * k / n);
    sum += v.value;
    abs_sum += v.scale;
  }
  double prev = kTwoPi * sum / n;
  for (int level = 6; level <= q.max_level; ++level) {
    // New nodes are the midpoints of the previous ones.
    for (int k = 0; k < n; ++k) {
      const Sample v = integrand(kTwoPi * (k + 0.5) / n);
      sum += v.value;
      abs_sum += v.scale;
    }
    n *= 2;
    const double cur = kTwoPi * sum / n;
    const double roundoff = 8.0 * kEps * kTwoPi * abs_sum / n;
    const double err = std::fabs(cur - prev) + roundoff;
    if (err <= q.abs_tol + q.rel_tol * std::fabs(cur) || std::fabs(cur - prev) <= roundoff) {
      return {cur, err};
    }
    prev = cur;
  }
  throw QuadratureFailure("periodic quadrature did not converge after 2^" + std::to_string(q.max_level) +
                          " nodes");
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGLx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGLw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

Estimate flux(const PlanarField& field, double mu, double r, const QuadratureControls& q) {
  if (!(r > field.sigma())) throw DomainViolation({r, 0.0}, field.sigma());
  // Phi(r) = r * integral of <X(r e^{it}), e^{it}> dt.
  Estimate e = periodic_trapezoid(
      [&](double t) {
        const Vec2 n{std::cos(t), std::sin(t)};
        const Vec2 v = field.eval(n * r, mu);
        return Sample{dot(v, n), v.norm()};
      },
      q);
  return {r * e.value, r * e.error};
}

Estimate divergence_integral(const PlanarField& field, double mu, const Annulus& annulus,
                             const QuadratureControls& q) {
  if (!(annulus.r_in >= field.sigma()) || !(annulus.r_out > annulus.r_in)) {
    throw InvalidArgument("annulus must satisfy sigma <= r_in < r_out");
  }
  // Polar coordinates with u = log r: dA = r^2 du dtheta. Composite 8-point
  // Gauss-Legendre in u, periodic trapezoid in theta; both refined by doubling.
  const double u0 = std::log(annulus.r_in);
  const double u1 = std::log(annulus.r_out);

  auto integrate = [&](int panels, int n_theta, double& abs_total) {
    const double hu = (u1 - u0) / panels;
    struct Part {
      double sum = 0.0;
      double abs = 0.0;
    };
    auto parts = parallel_map(static_cast<std::size_t>(panels), [&](std::size_t p) {
      Part part;
      const double mid = u0 + (static_cast<double>(p) + 0.5) * hu;
      for (int g = 0; g < 8; ++g) {
        const double r = std::exp(mid + 0.5 * hu * kGLx[g]);
        const double wr = 0.5 * hu * kGLw[g] * r * r;
        double ring = 0.0;
        double ring_abs = 0.0;
        for (int k = 0; k < n_theta; ++k) {
          const Mat2 j = field.jet(polar(r, kTwoPi * k / n_theta), mu).jacobian;
          ring += j.trace();
          ring_abs += std::fabs(j.a) + std::fabs(j.d);
        }
        part.sum += wr * ring * kTwoPi / n_theta;
        part.abs += wr * ring_abs * kTwoPi / n_theta;
      }
      return part;
    });
    double total = 0.0;
    abs_total = 0.0;
    for (const auto& p : parts) {
      total += p.sum;
      abs_total += p.abs;
    }
    return total;
  };

  int panels = 4;
  int n_theta = 32;
  double abs_prev = 0.0;
  double prev = integrate(panels, n_theta, abs_prev);
  constexpr int kMaxRefinements = 6;
  for (int level = 0; level < kMaxRefinements; ++level) {
    panels *= 2;
    n_theta *= 2;
    double abs_cur = 0.0;
    const double cur = integrate(panels, n_theta, abs_cur);
    const double roundoff = 64.0 * kEps * abs_cur;
    const double err = std::fabs(cur - prev) + roundoff;
    if (err <= q.abs_tol + q.rel_tol * std::fabs(cur) || std::fabs(cur - prev) <= roundoff) {
      return {cur, err};
    }
    prev = cur;
  }
  throw QuadratureFailure("divergence integral did not converge");
}

}  // namespace hopfinf
