#include "hopfinf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hopfinf/rng.hpp"

#include "hopfinf/error.hpp"
#include "hopfinf/parallel.hpp"

namespace hopfinf {

Spectrum2 eigs2(const Mat2& m) {
  if (!m.finite()) throw InvalidArgument("eigs2: non-finite matrix entry");
  const double half_tr = 0.5 * (m.a + m.d);
  const double half_diff = 0.5 * (m.a - m.d);
  // Discriminant of the characteristic polynomial without the tr^2 - 4det cancellation.
  const double disc = half_diff * half_diff + m.b * m.c;
  if (disc < 0.0) {
    const double w = std::sqrt(-disc);
    return {{half_tr, w}, {half_tr, -w}};
  }
  const double s = std::sqrt(disc);
  const double q = half_tr + std::copysign(s, half_tr);
  if (q == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
  double l1 = q;
  double l2 = m.det() / q;
  if (l1 < l2) std::swap(l1, l2);
  return {{l1, 0.0}, {l2, 0.0}};
}

std::string to_string(SpectralClassKind k) {
  switch (k) {
    case SpectralClassKind::Dissipative: return "dissipative";
    case SpectralClassKind::PositiveDeterminant: return "positive_determinant";
    case SpectralClassKind::FreeRealEigenvalues: return "free_real_eigenvalues";
    case SpectralClassKind::DetPositiveOnInterval: return "det_positive_on_interval";
  }
  return "?";
}

SpectralClassKind parse_spectral_class(const std::string& text) {
  for (auto k : {SpectralClassKind::Dissipative, SpectralClassKind::PositiveDeterminant,
                 SpectralClassKind::FreeRealEigenvalues, SpectralClassKind::DetPositiveOnInterval}) {
    if (to_string(k) == text) return k;
  }
  if (text == "free") return SpectralClassKind::FreeRealEigenvalues;
  if (text == "det") return SpectralClassKind::PositiveDeterminant;
  throw InvalidArgument("unknown spectral class '" + text +
                        "' (dissipative, positive_determinant, free_real_eigenvalues, det_positive_on_interval)");
}

std::string to_string(SpectralVerdict v) {
  return v == SpectralVerdict::CertifiedOnSample ? "certified_on_sample" : "violated";
}

std::vector<double> log_radii(const Annulus& a, int n) {
  std::vector<double> r(static_cast<std::size_t>(n));
  const double ratio = a.r_out / a.r_in;
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = a.r_in * std::pow(ratio, (i + 0.5) / n);
  return r;
}

std::string class_violation(const SpectralClass& cls, const Mat2& j) {
  const double scale = std::max(1.0, j.max_abs());
  const double zero_tol = kSpectralZeroTol * scale;
  const Spectrum2 s = eigs2(j);
  const double tr = j.trace();
  const double det = j.det();
  const bool has_zero = std::abs(s.lambda1) <= zero_tol || std::abs(s.lambda2) <= zero_tol;

  switch (cls.kind) {
    case SpectralClassKind::Dissipative:
      if (has_zero) return "zero eigenvalue";
      if (s.lambda1.real() > zero_tol || s.lambda2.real() > zero_tol) return "eigenvalue with positive real part";
      if (!(det > 0.0)) return "non-positive determinant";
      if (tr > zero_tol) return "positive trace";
      if (tr >= -zero_tol) return "zero trace";
      return {};
    case SpectralClassKind::PositiveDeterminant:
    case SpectralClassKind::DetPositiveOnInterval:
      if (!(det > 0.0)) return "non-positive determinant";
      return {};
    case SpectralClassKind::FreeRealEigenvalues:
      if (has_zero) return "zero eigenvalue";
      if (s.is_real()) return "real eigenvalue";
      if (std::abs(s.lambda1.real()) > zero_tol) return "non-zero real part";
      return {};
  }
  return {};
}

SpectralReport certify_class(const PlanarField& field, double mu, const Annulus& annulus,
                             const PolarGrid& grid, const SpectralClass& cls) {
  if (!(annulus.r_in >= field.sigma()) || !(annulus.r_out > annulus.r_in)) {
    throw InvalidArgument("annulus must satisfy sigma <= r_in < r_out");
  }
  if (grid.n_r < 8 || grid.n_theta < 8) throw InvalidArgument("grid counts must be >= 8");

  SpectralReport rep;
  rep.class_queried = cls;
  rep.annulus = annulus;
  rep.grid = grid;
  if (cls.kind == SpectralClassKind::DetPositiveOnInterval) {
    if (!(cls.mu_hi > cls.mu_lo)) throw InvalidArgument("mu interval must be non-empty");
    for (int k = 0; k < kIntervalMuSamples; ++k) {
      rep.mu_values.push_back(cls.mu_lo + (cls.mu_hi - cls.mu_lo) * (k + 0.5) / kIntervalMuSamples);
    }
  } else {
    rep.mu_values.push_back(mu);
  }

  const auto radii = log_radii(annulus, grid.n_r);
  struct Row {
    std::vector<SpectralWitness> bad;
    std::size_t zero_trace = 0;
    std::size_t checked = 0;
  };
  auto rows = parallel_map(radii.size(), [&](std::size_t i) {
    Row row;
    for (int k = 0; k < grid.n_theta; ++k) {
      const Vec2 z = polar(radii[i], kTwoPi * k / grid.n_theta);
      for (double m : rep.mu_values) {
        const Jet jt = field.jet(z, m);
        ++row.checked;
        std::string why = class_violation(cls, jt.jacobian);
        if (why == "zero trace") ++row.zero_trace;
        if (!why.empty()) row.bad.push_back({z, m, eigs2(jt.jacobian), std::move(why)});
      }
    }
    return row;
  });

  std::vector<SpectralWitness> all;
  for (auto& row : rows) {
    rep.points_checked += row.checked;
    rep.zero_trace_points += row.zero_trace;
    for (auto& w : row.bad) all.push_back(std::move(w));
  }

  // Zero trace is tolerated only on a sampled set of estimated area fraction
  // below one grid cell, i.e. on no sampled point at all.
  const double zero_fraction = rep.points_checked ? double(rep.zero_trace_points) / double(rep.points_checked) : 0.0;
  const double cell_fraction = 1.0 / (double(grid.n_r) * double(grid.n_theta));
  if (cls.kind == SpectralClassKind::Dissipative && zero_fraction < cell_fraction) {
    std::erase_if(all, [](const SpectralWitness& w) { return w.reason == "zero trace"; });
  }
  rep.total_violations = all.size();
  if (all.size() > kWitnessCap) all.resize(kWitnessCap);
  rep.witnesses = std::move(all);
  rep.verdict = rep.witnesses.empty() ? SpectralVerdict::CertifiedOnSample : SpectralVerdict::Violated;
  return rep;
}

namespace {

double pair_deviation(const Spectrum2& a, const Spectrum2& b) {
  auto scaled = [](Complex x, Complex y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
  const double direct = std::max(scaled(a.lambda1, b.lambda1), scaled(a.lambda2, b.lambda2));
  const double swapped = std::max(scaled(a.lambda1, b.lambda2), scaled(a.lambda2, b.lambda1));
  return std::min(direct, swapped);
}

}  // namespace

ShiftCheckResult spectrum_shift_check(const PlanarField& field, int samples, std::uint64_t seed,
                                      double r_out, double mu_max) {
  if (samples < 1) throw InvalidArgument("samples must be >= 1");
  std::mt19937_64 rng(seed);
  const double r_in = field.sigma() * 1.01;
  r_out = std::max(r_out, 2.0 * r_in);

  ShiftCheckResult res;
  for (int s = 0; s < samples; ++s) {
    const double r = std::exp(uniform(rng, std::log(r_in), std::log(r_out)));
    const Vec2 z = polar(r, uniform(rng, 0.0, kTwoPi));
    const double mu = uniform(rng, -mu_max, mu_max);
    const Spectrum2 shifted = eigs2(field.jet(z, mu).jacobian);
    Spectrum2 base = eigs2(field.jet(z, 0.0).jacobian);
    base.lambda1 += mu;
    base.lambda2 += mu;
    const double dev = pair_deviation(shifted, base);
    if (dev > res.max_deviation || s == 0) {
      res.max_deviation = std::max(res.max_deviation, dev);
      res.worst_z = z;
      res.worst_mu = mu;
    }
  }
  res.pass = res.max_deviation < 1e-9;
  return res;
}

}  // namespace hopfinf
