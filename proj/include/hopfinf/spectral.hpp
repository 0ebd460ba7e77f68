#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hopfinf/field.hpp"
#include "hopfinf/geometry.hpp"

namespace hopfinf {

/// Eigenvalues of a real 2x2 matrix. Complex pairs are stored with
/// lambda1.imag() > 0; real pairs with lambda1 >= lambda2.
struct Spectrum2 {
  Complex lambda1;
  Complex lambda2;

  bool is_real() const { return lambda1.imag() == 0.0; }
};

Spectrum2 eigs2(const Mat2& m);

enum class SpectralClassKind {
  /// H(2, sigma): Re(lambda) <= 0, lambda != 0, det > 0, trace < 0 off a null set.
  Dissipative,
  PositiveDeterminant,
  /// Re(lambda) = 0 and lambda != 0 (no real eigenvalues).
  FreeRealEigenvalues,
  /// det(DX_mu) > 0 for all mu in the open interval (mu_lo, mu_hi).
  DetPositiveOnInterval,
};

struct SpectralClass {
  SpectralClassKind kind = SpectralClassKind::Dissipative;
  double mu_lo = 0.0;
  double mu_hi = 0.0;

  static SpectralClass dissipative() { return {SpectralClassKind::Dissipative}; }
  static SpectralClass positive_determinant() { return {SpectralClassKind::PositiveDeterminant}; }
  static SpectralClass free_real_eigenvalues() { return {SpectralClassKind::FreeRealEigenvalues}; }
  static SpectralClass det_positive_on(double lo, double hi) {
    return {SpectralClassKind::DetPositiveOnInterval, lo, hi};
  }
};

std::string to_string(SpectralClassKind k);
SpectralClassKind parse_spectral_class(const std::string& text);

enum class SpectralVerdict { CertifiedOnSample, Violated };
std::string to_string(SpectralVerdict v);

struct SpectralWitness {
  Vec2 z;
  double mu = 0.0;
  Spectrum2 spectrum;
  std::string reason;
};

struct Annulus {
  double r_in = 0.0;
  double r_out = 0.0;
};

struct PolarGrid {
  int n_r = 40;
  int n_theta = 64;
};

struct SpectralReport {
  SpectralClass class_queried;
  SpectralVerdict verdict = SpectralVerdict::CertifiedOnSample;
  std::vector<SpectralWitness> witnesses;
  std::size_t total_violations = 0;  // before capping
  Annulus annulus;
  PolarGrid grid;
  std::vector<double> mu_values;
  std::size_t points_checked = 0;
  std::size_t zero_trace_points = 0;
};

inline constexpr std::size_t kWitnessCap = 100;
/// Tolerance for "Re(lambda) = 0" and "lambda = 0", scaled by max(1, |J|).
inline constexpr double kSpectralZeroTol = 1e-10;
inline constexpr int kIntervalMuSamples = 8;

/// Cell-centred log-spaced radii and uniform angles; never touches r_in.
std::vector<double> log_radii(const Annulus& a, int n);

/// Pointwise predicate of the class at one Jacobian; empty string when satisfied.
/// For Dissipative a zero trace is reported as a violation of the strict
/// pointwise condition trace < 0.
std::string class_violation(const SpectralClass& cls, const Mat2& jacobian);

SpectralReport certify_class(const PlanarField& field, double mu, const Annulus& annulus,
                             const PolarGrid& grid, const SpectralClass& cls);

struct ShiftCheckResult {
  bool pass = false;
  double max_deviation = 0.0;
  Vec2 worst_z;
  double worst_mu = 0.0;
};

/// Compares eigs2(DX_mu(z)) against mu + eigs2(DX_0(z)) at random (z, mu).
ShiftCheckResult spectrum_shift_check(const PlanarField& field, int samples, std::uint64_t seed = 1,
                                      double r_out = 20.0, double mu_max = 2.0);

}  // namespace hopfinf
