#include "hopfinf/flux_index.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hopfinf/error.hpp"
#include "hopfinf/parallel.hpp"

namespace hopfinf {

std::vector<double> RadiusSchedule::radii(double sigma) const {
  const double r0 = first > 0.0 ? first : 2.0 * sigma;
  if (!(r0 > sigma)) throw InvalidArgument("first scheduled radius must exceed sigma");
  if (!(ratio > 1.0)) throw InvalidArgument("schedule ratio must exceed 1");
  if (count < 1) throw InvalidArgument("schedule needs at least one radius");
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) r[static_cast<std::size_t>(k)] = r0 * std::pow(ratio, k);
  return r;
}

std::string to_string(IndexClass c) {
  switch (c) {
    case IndexClass::DivergesToPlusInfinity: return "diverges_to_plus_infinity";
    case IndexClass::DivergesToMinusInfinity: return "diverges_to_minus_infinity";
    case IndexClass::Finite: return "finite";
    case IndexClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

int IndexEstimate::sign() const {
  switch (classification) {
    case IndexClass::DivergesToPlusInfinity: return 1;
    case IndexClass::DivergesToMinusInfinity: return -1;
    case IndexClass::Finite:
      if (std::fabs(value) > uncertainty) return value > 0 ? 1 : -1;
      return 0;
    case IndexClass::Indeterminate: return 0;
  }
  return 0;
}

FluxProfile flux_profile(const PlanarField& field, double mu, const std::vector<double>& radii,
                         const QuadratureControls& q) {
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw InvalidArgument("flux radii must be strictly increasing");
  }
  auto est = parallel_map(radii.size(), [&](std::size_t i) { return flux(field, mu, radii[i], q); });
  FluxProfile p;
  p.radii = radii;
  for (const auto& e : est) {
    p.flux.push_back(e.value);
    p.quadrature_error.push_back(e.error);
  }
  return p;
}

IndexEstimate classify_flux_limit(FluxProfile profile, const IndexControls& c) {
  IndexEstimate out;
  const auto& phi = profile.flux;
  const std::size_t n = phi.size();
  const std::size_t k = static_cast<std::size_t>(c.tail_window);
  if (n < k + 1 || k < 2) throw InvalidArgument("flux profile too short for the tail window");

  // Last k successive differences d_j = Phi_{j+1} - Phi_j.
  std::vector<double> d;
  std::vector<double> noise;
  for (std::size_t j = n - k - 1; j + 1 < n; ++j) {
    d.push_back(phi[j + 1] - phi[j]);
    noise.push_back(profile.quadrature_error[j + 1] + profile.quadrature_error[j] +
                    1e-12 * (std::fabs(phi[j + 1]) + std::fabs(phi[j])));
  }
  const double last = phi.back();
  const double T = c.divergence_threshold;

  auto growing = [&](int s) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (!(s * d[j] > noise[j])) return false;
      if (j > 0 && !(s * d[j] >= s * d[j - 1])) return false;
    }
    return true;
  };
  std::ostringstream fit;
  fit << "tail window " << k << " of " << n << " radii, threshold " << T << ": ";
  if (last > T && growing(+1)) {
    out.classification = IndexClass::DivergesToPlusInfinity;
    fit << "monotone growth with increasing increments";
  } else if (last < -T && growing(-1)) {
    out.classification = IndexClass::DivergesToMinusInfinity;
    fit << "monotone decrease with increasing increments";
  } else {
    bool shrinking = true;
    for (std::size_t j = 1; j < d.size(); ++j) {
      const bool at_noise = std::fabs(d[j]) <= noise[j];
      if (!at_noise && !(std::fabs(d[j]) < std::fabs(d[j - 1]))) shrinking = false;
    }
    if (shrinking) {
      out.classification = IndexClass::Finite;
      out.value = last;
      const double dl = std::fabs(d.back());
      const double dp = std::fabs(d[d.size() - 2]);
      double tail = dl;
      if (dl > noise.back() && dp > 0.0 && dl < dp) {
        const double q = dl / dp;
        tail = dl * q / (1.0 - q);
      }
      out.uncertainty = std::max(tail, noise.back()) + profile.quadrature_error.back();
      fit << "Cauchy-like tail, geometric remainder bound";
    } else {
      out.classification = IndexClass::Indeterminate;
      fit << "no divergence past threshold and no contracting tail";
    }
  }
  out.fit = fit.str();
  out.evidence = std::move(profile);
  return out;
}

IndexEstimate index_at_infinity(const PlanarField& field, double mu, const IndexControls& controls) {
  const auto radii = controls.schedule.radii(field.sigma());
  if (radii.size() < 6) throw InvalidArgument("index schedule needs at least 6 radii");
  if (controls.schedule.ratio < 1.5) throw InvalidArgument("index schedule ratio must be >= 1.5");
  return classify_flux_limit(flux_profile(field, mu, radii, controls.quadrature), controls);
}

double radial_min_speed(const PlanarField& field, double mu, double r, int angular_samples) {
  if (!(r > field.sigma())) throw DomainViolation({r, 0.0}, field.sigma());
  angular_samples = std::max(angular_samples, 16);
  auto speed = [&](double t) { return field.eval(polar(r, t), mu).norm(); };
  const double h = kTwoPi / angular_samples;
  int best = 0;
  double best_v = speed(0.0);
  for (int k = 1; k < angular_samples; ++k) {
    const double v = speed(k * h);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  // Golden-section refinement on the bracketing cell pair.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = (best - 1) * h;
  double b = (best + 1) * h;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = speed(x1);
  double f2 = speed(x2);
  for (int it = 0; it < 80 && b - a > 1e-14; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = speed(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = speed(x2);
    }
  }
  return std::min({best_v, f1, f2});
}

std::string to_string(SpeedIntegralVerdict v) {
  return v == SpeedIntegralVerdict::DivergenceSupported ? "divergence_supported" : "inconclusive";
}

SpeedIntegralCheck speed_integral_check(const PlanarField& field, double mu, const RadiusSchedule& schedule,
                                        int tail_window) {
  SpeedIntegralCheck out;
  out.radii = schedule.radii(field.sigma());
  if (out.radii.size() < 6) throw InvalidArgument("speed schedule needs at least 6 radii");
  out.min_speed = parallel_map(out.radii.size(),
                               [&](std::size_t i) { return radial_min_speed(field, mu, out.radii[i]); });
  // Integral from the first scheduled radius; the sigma..r0 piece is finite and irrelevant.
  double sum = 0.0;
  std::vector<double> increments;
  out.partial_sums.push_back(0.0);
  for (std::size_t i = 1; i < out.radii.size(); ++i) {
    const double inc = 0.5 * (out.min_speed[i] + out.min_speed[i - 1]) * (out.radii[i] - out.radii[i - 1]);
    increments.push_back(inc);
    sum += inc;
    out.partial_sums.push_back(sum);
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(tail_window), increments.size());
  bool non_decaying = true;
  for (std::size_t j = increments.size() - k + 1; j < increments.size(); ++j) {
    if (!(increments[j] >= 0.999 * increments[j - 1])) non_decaying = false;
  }
  const double tail_speed = out.min_speed.back();
  if (!non_decaying) {
    out.reason = "increments of the partial sums decay";
  } else if (!(tail_speed >= kSpeedFloor)) {
    out.reason = "minimum speed at the largest radius below floor";
  } else {
    out.verdict = SpeedIntegralVerdict::DivergenceSupported;
    out.reason = "non-decaying increments and speed above floor (heuristic)";
  }
  return out;
}

namespace {

double wrap_angle(double a) {
  while (a > kPi) a -= kTwoPi;
  while (a <= -kPi) a += kTwoPi;
  return a;
}

double direction(const PlanarField& field, double mu, double r, double t) {
  const Vec2 v = field.eval(polar(r, t), mu);
  return std::atan2(v.y, v.x);
}

// Adds the angle swept between t0 and t1, subdividing until each step turns
// by less than pi/2.
double swept(const PlanarField& field, double mu, double r, double t0, double a0, double t1, double a1,
             int depth) {
  const double d = wrap_angle(a1 - a0);
  if (std::fabs(d) < kPi / 2) return d;
  if (depth > 40) throw WindingUndefined("field direction varies too fast on the circle");
  const double tm = 0.5 * (t0 + t1);
  const double am = direction(field, mu, r, tm);
  return swept(field, mu, r, t0, a0, tm, am, depth + 1) + swept(field, mu, r, tm, am, t1, a1, depth + 1);
}

}  // namespace

int winding_number(const PlanarField& field, double mu, double r) {
  const double vmin = radial_min_speed(field, mu, r);
  if (!(vmin > 1e-12 * (1.0 + r))) {
    throw WindingUndefined("field vanishes (numerically) on the circle of radius " + std::to_string(r));
  }
  constexpr int kInitial = 64;
  double total = 0.0;
  double t_prev = 0.0;
  double a_prev = direction(field, mu, r, 0.0);
  for (int k = 1; k <= kInitial; ++k) {
    const double t = kTwoPi * k / kInitial;
    const double a = direction(field, mu, r, t);
    total += swept(field, mu, r, t_prev, a_prev, t, a, 0);
    t_prev = t;
    a_prev = a;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

}  // namespace hopfinf
