#pragma once

#include <string>
#include <vector>

#include "hopfinf/field.hpp"
#include "hopfinf/spectral.hpp"

namespace hopfinf {

struct QuadratureControls {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  int max_level = 16;  // up to 2^max_level angular nodes
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Outward flux Phi(r) of X_mu through the circle of radius r.
Estimate flux(const PlanarField& field, double mu, double r, const QuadratureControls& q = {});

/// Integral of Trace(DX_mu) over the annulus r_in < |z| < r_out.
Estimate divergence_integral(const PlanarField& field, double mu, const Annulus& annulus,
                             const QuadratureControls& q = {});

/// Geometric radius schedule first * ratio^k, k = 0..count-1. first <= 0 means 2*sigma.
struct RadiusSchedule {
  double first = 0.0;
  double ratio = 2.0;
  int count = 12;

  std::vector<double> radii(double sigma) const;
};

struct FluxProfile {
  std::vector<double> radii;
  std::vector<double> flux;
  std::vector<double> quadrature_error;
};

enum class IndexClass { DivergesToPlusInfinity, DivergesToMinusInfinity, Finite, Indeterminate };
std::string to_string(IndexClass c);

struct IndexEstimate {
  IndexClass classification = IndexClass::Indeterminate;
  double value = 0.0;        // Finite only
  double uncertainty = 0.0;  // Finite only
  FluxProfile evidence;
  std::string fit;

  /// +1 / -1 when the index has a definite sign, 0 otherwise.
  int sign() const;
};

struct IndexControls {
  RadiusSchedule schedule;
  double divergence_threshold = 1e3;
  int tail_window = 4;
  QuadratureControls quadrature;
};

FluxProfile flux_profile(const PlanarField& field, double mu, const std::vector<double>& radii,
                         const QuadratureControls& q = {});
IndexEstimate classify_flux_limit(FluxProfile profile, const IndexControls& controls);
IndexEstimate index_at_infinity(const PlanarField& field, double mu, const IndexControls& controls = {});

/// Upsilon_mu(r): minimum of ||X_mu|| over the circle of radius r.
double radial_min_speed(const PlanarField& field, double mu, double r, int angular_samples = 720);

enum class SpeedIntegralVerdict { DivergenceSupported, Inconclusive };
std::string to_string(SpeedIntegralVerdict v);

struct SpeedIntegralCheck {
  SpeedIntegralVerdict verdict = SpeedIntegralVerdict::Inconclusive;
  std::vector<double> radii;
  std::vector<double> min_speed;
  std::vector<double> partial_sums;
  std::string reason;
};

inline constexpr double kSpeedFloor = 1e-3;

/// Heuristic: trapezoid partial sums of Upsilon over the schedule.
SpeedIntegralCheck speed_integral_check(const PlanarField& field, double mu, const RadiusSchedule& schedule,
                                        int tail_window = 4);

/// Degree of theta -> X_mu(r e^{i theta}) / ||X_mu|| around the circle.
int winding_number(const PlanarField& field, double mu, double r);
inline int poincare_index_at_infinity(int winding) { return 2 - winding; }

}  // namespace hopfinf
