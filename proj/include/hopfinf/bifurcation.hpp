#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hopfinf/field.hpp"
#include "hopfinf/flow.hpp"
#include "hopfinf/flux_index.hpp"
#include "hopfinf/spectral.hpp"

namespace hopfinf {

/// Dense-grid minimum speed on an annulus, with Newton refinement from the
/// minimum of each grid ring. A sampling certificate only.
struct SingularityFreeEvidence {
  Annulus annulus;
  PolarGrid grid;
  double min_speed = 0.0;
  Vec2 argmin;
  bool pass = false;
};

SingularityFreeEvidence singularity_free_annulus(const PlanarField& field, double mu, const Annulus& annulus,
                                                 const PolarGrid& grid);

struct SpectrumSummary {
  std::size_t points = 0;
  double max_real_part = 0.0;
  double min_real_part = 0.0;
  double min_det = 0.0;
  double max_trace = 0.0;
  std::size_t real_eigenvalue_points = 0;
};

SpectrumSummary spectrum_summary(const PlanarField& field, double mu, const Annulus& annulus, const PolarGrid& grid);

struct MuSample {
  double mu = 0.0;
  IndexEstimate index;
  InfinityStability stability;
  SpectrumSummary spectral;
  SingularityFreeEvidence singularity_free;
  std::string error;  // non-empty when the sample could not be evaluated
};

enum class BifurcationVerdictKind { HopfAtInfinityDetected, NoReversalFound, Inconsistent };
std::string to_string(BifurcationVerdictKind k);

struct LocateStep {
  double lo = 0.0;
  double hi = 0.0;
  double mid = 0.0;
  StabilityVerdict verdict = StabilityVerdict::Undetermined;  // as used for the split
  bool flux_fallback = false;
  double fallback_flux = 0.0;
  std::string note;
};

struct LocateResult {
  double mu_star = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  StabilityVerdict lo_verdict = StabilityVerdict::Undetermined;
  StabilityVerdict hi_verdict = StabilityVerdict::Undetermined;
  std::vector<LocateStep> steps;
};

struct BifurcationVerdict {
  BifurcationVerdictKind kind = BifurcationVerdictKind::NoReversalFound;
  std::optional<double> mu_star;
  double bracket_lo = 0.0;  // sampled mu on either side of the reversal
  double bracket_hi = 0.0;
  double bracket_width = 0.0;  // final located bracket
  bool reversed_orientation = false;  // attractor for mu < mu*, repellor above
  std::string details;
};

enum class Theorem { Thm2_4, Thm3_5, Prop4_2 };
std::string to_string(Theorem t);
Theorem parse_theorem(const std::string& text);

enum class HypothesisStatus { CertifiedOnSample, Violated, Assumed, Inconclusive };
std::string to_string(HypothesisStatus s);

struct HypothesisAudit {
  std::string theorem;
  std::string hypothesis;
  HypothesisStatus status = HypothesisStatus::Assumed;
  std::string witness;
};

struct BifurcationControls {
  IndexControls index;
  StabilityControls stability;
  /// Annulus for spectral summaries, singularity and class checks; r <= 0 means 1.1*sigma / 50*sigma.
  Annulus annulus{0.0, 0.0};
  PolarGrid spectral_grid{40, 64};
  PolarGrid singularity_grid{80, 128};
  bool locate = true;
  double locate_tol = 1e-6;
  int locate_budget = 200;
  /// Winding radii in units of sigma.
  std::vector<double> winding_radii{5.0, 20.0};
  /// Upper end of the (0, eps0) interval for the determinant hypothesis; <= 0 uses the largest positive mu.
  double eps0 = 0.0;
  std::vector<Theorem> audit;
};

Annulus effective_annulus(const PlanarField& field, const BifurcationControls& c);

struct BifurcationReport {
  std::string field;
  std::vector<MuSample> samples;  // ascending mu
  BifurcationVerdict verdict;
  std::optional<LocateResult> locate;
  std::vector<HypothesisAudit> audit;
};

MuSample evaluate_sample(const PlanarField& field, double mu, const BifurcationControls& c);

BifurcationReport sweep(const PlanarField& field, std::vector<double> mu_values, const BifurcationControls& c = {});

/// Bisection on the stability of infinity; endpoints must be decided and opposite.
LocateResult locate_bifurcation(const PlanarField& field, double mu_lo, double mu_hi, double tol,
                                const BifurcationControls& c = {});

std::vector<HypothesisAudit> audit_hypotheses(const PlanarField& field, const std::vector<double>& mu_values,
                                              Theorem theorem, const BifurcationControls& c = {});

struct ScalingRow {
  double mu = 0.0;
  int h_sign = 0;
  StabilityVerdict base = StabilityVerdict::Undetermined;
  StabilityVerdict scaled = StabilityVerdict::Undetermined;
  bool agrees = false;
};

struct ScalingComparison {
  std::string scalar;
  std::vector<ScalingRow> rows;
  BifurcationReport base;
  BifurcationReport scaled;
  bool bracket_unchanged = false;
  bool pass = false;
};

/// Compares sweeps of X_mu and h*X_mu. Positive h must leave verdicts unchanged,
/// negative h must swap attractor and repellor. An empty scalar selects the
/// mu-dependent scaling h_mu = 1/mu (1 at mu = 0).
ScalingComparison scaling_family_check(const PlanarField& field, const std::string& scalar,
                                       const std::vector<double>& mu_values, const BifurcationControls& c = {});

}  // namespace hopfinf
