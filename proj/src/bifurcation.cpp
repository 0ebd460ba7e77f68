#include "hopfinf/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hopfinf/error.hpp"
#include "hopfinf/format.hpp"
#include "hopfinf/parallel.hpp"

namespace hopfinf {

std::string to_string(BifurcationVerdictKind k) {
  switch (k) {
    case BifurcationVerdictKind::HopfAtInfinityDetected: return "hopf_at_infinity_detected";
    case BifurcationVerdictKind::NoReversalFound: return "no_reversal_found";
    case BifurcationVerdictKind::Inconsistent: return "inconsistent";
  }
  return "?";
}

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::Thm2_4: return "Thm2.4";
    case Theorem::Thm3_5: return "Thm3.5";
    case Theorem::Prop4_2: return "Prop4.2";
  }
  return "?";
}

Theorem parse_theorem(const std::string& text) {
  std::string t;
  for (char ch : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (t == "thm2.4" || t == "2.4") return Theorem::Thm2_4;
  if (t == "thm3.5" || t == "3.5") return Theorem::Thm3_5;
  if (t == "prop4.2" || t == "4.2") return Theorem::Prop4_2;
  throw UnknownName("unknown theorem '" + text + "' (expected Thm2.4, Thm3.5 or Prop4.2)");
}

std::string to_string(HypothesisStatus s) {
  switch (s) {
    case HypothesisStatus::CertifiedOnSample: return "certified_on_sample";
    case HypothesisStatus::Violated: return "violated";
    case HypothesisStatus::Assumed: return "assumed";
    case HypothesisStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

Annulus effective_annulus(const PlanarField& field, const BifurcationControls& c) {
  Annulus a = c.annulus;
  if (a.r_in <= 0.0) a.r_in = 1.1 * field.sigma();
  if (a.r_out <= 0.0) a.r_out = 50.0 * field.sigma();
  return a;
}

namespace {

std::optional<Vec2> newton_zero(const PlanarField& field, double mu, Vec2 z, const Annulus& a) {
  for (int it = 0; it < 30; ++it) {
    const double r = z.norm();
    if (!(r > a.r_in && r < a.r_out)) return std::nullopt;
    Jet j;
    try {
      j = field.jet(z, mu);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (j.value.norm() <= 1e-10 * (1.0 + r)) return z;
    const double det = j.jacobian.det();
    if (!(std::fabs(det) > 0.0)) return std::nullopt;
    const Vec2 step{(j.jacobian.d * j.value.x - j.jacobian.b * j.value.y) / det,
                    (-j.jacobian.c * j.value.x + j.jacobian.a * j.value.y) / det};
    z = z - step;
  }
  return std::nullopt;
}

}  // namespace

SingularityFreeEvidence singularity_free_annulus(const PlanarField& field, double mu, const Annulus& annulus,
                                                 const PolarGrid& grid) {
  const auto radii = log_radii(annulus, grid.n_r);
  struct Best {
    double scaled = std::numeric_limits<double>::infinity();
    double speed = 0.0;
    Vec2 z;
  };
  auto rows = parallel_map(radii.size(), [&](std::size_t i) {
    Best b;
    for (int k = 0; k < grid.n_theta; ++k) {
      const Vec2 z = polar(radii[i], kTwoPi * k / grid.n_theta);
      const double v = field.eval(z, mu).norm();
      const double s = v / (1.0 + radii[i]);
      if (s < b.scaled) b = {s, v, z};
    }
    return b;
  });
  Best best;
  for (const auto& b : rows) {
    if (b.scaled < best.scaled) best = b;
  }
  SingularityFreeEvidence ev;
  ev.annulus = annulus;
  ev.grid = grid;
  ev.min_speed = best.speed;
  ev.argmin = best.z;
  ev.pass = best.scaled > 1e-10;
  // Newton from every row minimum, so isolated zeros between grid nodes are found.
  for (const auto& b : rows) {
    if (!ev.pass) break;
    if (const auto root = newton_zero(field, mu, b.z, annulus)) {
      ev.pass = false;
      ev.argmin = *root;
      ev.min_speed = field.eval(*root, mu).norm();
    }
  }
  return ev;
}

SpectrumSummary spectrum_summary(const PlanarField& field, double mu, const Annulus& annulus, const PolarGrid& grid) {
  const auto radii = log_radii(annulus, grid.n_r);
  auto rows = parallel_map(radii.size(), [&](std::size_t i) {
    SpectrumSummary s;
    s.max_real_part = -std::numeric_limits<double>::infinity();
    s.min_real_part = std::numeric_limits<double>::infinity();
    s.min_det = std::numeric_limits<double>::infinity();
    s.max_trace = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid.n_theta; ++k) {
      const Mat2 j = field.jet(polar(radii[i], kTwoPi * k / grid.n_theta), mu).jacobian;
      const Spectrum2 sp = eigs2(j);
      ++s.points;
      s.max_real_part = std::max({s.max_real_part, sp.lambda1.real(), sp.lambda2.real()});
      s.min_real_part = std::min({s.min_real_part, sp.lambda1.real(), sp.lambda2.real()});
      s.min_det = std::min(s.min_det, j.det());
      s.max_trace = std::max(s.max_trace, j.trace());
      if (sp.is_real()) ++s.real_eigenvalue_points;
    }
    return s;
  });
  SpectrumSummary out = rows.front();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& s = rows[i];
    out.points += s.points;
    out.max_real_part = std::max(out.max_real_part, s.max_real_part);
    out.min_real_part = std::min(out.min_real_part, s.min_real_part);
    out.min_det = std::min(out.min_det, s.min_det);
    out.max_trace = std::max(out.max_trace, s.max_trace);
    out.real_eigenvalue_points += s.real_eigenvalue_points;
  }
  return out;
}

MuSample evaluate_sample(const PlanarField& field, double mu, const BifurcationControls& c) {
  MuSample s;
  s.mu = mu;
  try {
    const Annulus a = effective_annulus(field, c);
    s.index = index_at_infinity(field, mu, c.index);
    s.stability = certify_infinity_stability(field, mu, c.stability);
    s.spectral = spectrum_summary(field, mu, a, c.spectral_grid);
    s.singularity_free = singularity_free_annulus(field, mu, a, c.singularity_grid);
  } catch (const Error& e) {
    s.error = e.what();
  }
  return s;
}

namespace {

bool decided(StabilityVerdict v) { return v != StabilityVerdict::Undetermined; }

StabilityVerdict swap(StabilityVerdict v) {
  if (v == StabilityVerdict::Attractor) return StabilityVerdict::Repellor;
  if (v == StabilityVerdict::Repellor) return StabilityVerdict::Attractor;
  return v;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

BifurcationReport sweep(const PlanarField& field, std::vector<double> mu_values, const BifurcationControls& c) {
  for (double m : mu_values) {
    if (!std::isfinite(m)) throw InvalidArgument("mu values must be finite");
  }
  std::sort(mu_values.begin(), mu_values.end());
  mu_values.erase(std::unique(mu_values.begin(), mu_values.end()), mu_values.end());
  if (mu_values.size() < 2) throw InvalidArgument("sweep needs at least two distinct mu values");

  BifurcationReport rep;
  rep.field = field.name();
  rep.samples = parallel_map(mu_values.size(), [&](std::size_t i) { return evaluate_sample(field, mu_values[i], c); });

  std::vector<std::string> problems;
  for (const auto& s : rep.samples) {
    const StabilityVerdict v = s.stability.verdict;
    const int sg = s.index.sign();
    if (!s.error.empty() || sg == 0 || !decided(v)) continue;
    const StabilityVerdict expected = sg > 0 ? StabilityVerdict::Attractor : StabilityVerdict::Repellor;
    if (v != expected) {
      problems.push_back("mu=" + fmt(s.mu) + ": index " + to_string(s.index.classification) + " but " + to_string(v));
    }
  }

  BifurcationVerdict& verdict = rep.verdict;
  if (!problems.empty()) {
    verdict.kind = BifurcationVerdictKind::Inconsistent;
    verdict.details = "sign rule violated: " + join(problems, "; ");
  } else {
    std::vector<std::size_t> dec;
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
      if (rep.samples[i].error.empty() && decided(rep.samples[i].stability.verdict)) dec.push_back(i);
    }
    std::vector<std::pair<std::size_t, std::size_t>> flips;
    for (std::size_t k = 1; k < dec.size(); ++k) {
      if (rep.samples[dec[k]].stability.verdict != rep.samples[dec[k - 1]].stability.verdict) {
        flips.emplace_back(dec[k - 1], dec[k]);
      }
    }
    if (flips.empty()) {
      verdict.kind = BifurcationVerdictKind::NoReversalFound;
      verdict.details = dec.empty() ? "no sample has a decided stability"
                                    : "every decided sample is " + to_string(rep.samples[dec.front()].stability.verdict);
    } else if (flips.size() > 1) {
      verdict.kind = BifurcationVerdictKind::Inconsistent;
      verdict.details = "stability reverses " + std::to_string(flips.size()) + " times across the sweep";
    } else {
      const auto [i, j] = flips.front();
      const MuSample& lo = rep.samples[i];
      const MuSample& hi = rep.samples[j];
      std::string gap;
      for (std::size_t k = i; k <= j; ++k) {
        const auto& s = rep.samples[k];
        if (!s.error.empty() || !s.singularity_free.pass) gap = fmt(s.mu);
      }
      verdict.bracket_lo = lo.mu;
      verdict.bracket_hi = hi.mu;
      if (!gap.empty()) {
        verdict.kind = BifurcationVerdictKind::NoReversalFound;
        verdict.details = "stability reverses but mu=" + gap + " has no singularity-free annulus";
      } else {
        verdict.kind = BifurcationVerdictKind::HopfAtInfinityDetected;
        verdict.reversed_orientation = lo.stability.verdict == StabilityVerdict::Attractor;
        verdict.details = to_string(lo.stability.verdict) + " at mu=" + fmt(lo.mu) + ", " +
                          to_string(hi.stability.verdict) + " at mu=" + fmt(hi.mu);
        if (verdict.reversed_orientation) verdict.details += " (reversed orientation)";
        verdict.mu_star = 0.5 * (lo.mu + hi.mu);
        verdict.bracket_width = hi.mu - lo.mu;
        if (c.locate) {
          try {
            rep.locate = locate_bifurcation(field, lo.mu, hi.mu, c.locate_tol, c);
            verdict.mu_star = rep.locate->mu_star;
            verdict.bracket_width = rep.locate->hi - rep.locate->lo;
          } catch (const LocateError& e) {
            verdict.details += "; locate failed: " + std::string(e.what());
          }
        }
      }
    }
  }

  for (Theorem t : c.audit) {
    auto rows = audit_hypotheses(field, mu_values, t, c);
    rep.audit.insert(rep.audit.end(), rows.begin(), rows.end());
  }
  return rep;
}

LocateResult locate_bifurcation(const PlanarField& field, double mu_lo, double mu_hi, double tol,
                                const BifurcationControls& c) {
  if (!(mu_lo < mu_hi)) throw InvalidArgument("locate needs mu_lo < mu_hi");
  if (!(tol > 0.0)) throw InvalidArgument("locate tolerance must be positive");

  std::map<double, StabilityVerdict> cache;
  auto stability = [&](double m) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    const StabilityVerdict v = certify_infinity_stability(field, m, c.stability).verdict;
    cache.emplace(m, v);
    return v;
  };
  const auto radii = c.index.schedule.radii(field.sigma());
  const double r_far = radii.back();

  LocateResult res;
  res.lo = mu_lo;
  res.hi = mu_hi;
  res.lo_verdict = stability(mu_lo);
  res.hi_verdict = stability(mu_hi);
  if (!decided(res.lo_verdict)) throw LocateError("stability at mu=" + fmt(mu_lo) + " is undetermined");
  if (!decided(res.hi_verdict)) throw LocateError("stability at mu=" + fmt(mu_hi) + " is undetermined");
  if (res.lo_verdict == res.hi_verdict) {
    throw LocateError("both bracket ends are " + to_string(res.lo_verdict));
  }

  double lo = mu_lo, hi = mu_hi;
  int iterations = 0;
  while (hi - lo > tol) {
    if (++iterations > c.locate_budget) {
      throw LocateError("bisection budget of " + std::to_string(c.locate_budget) + " iterations exhausted");
    }
    LocateStep step;
    step.lo = lo;
    step.hi = hi;
    step.mid = lo + 0.5 * (hi - lo);
    StabilityVerdict v = stability(step.mid);
    if (!decided(v)) {
      // Sign rule: positive index means attractor, negative means repellor.
      const Estimate e = flux(field, step.mid, r_far, c.index.quadrature);
      step.flux_fallback = true;
      step.fallback_flux = e.value;
      if (std::fabs(e.value) > e.error) {
        v = e.value > 0.0 ? StabilityVerdict::Attractor : StabilityVerdict::Repellor;
        step.note = "stability undetermined; split by the sign of the flux at r=" + fmt(r_far);
      } else {
        const double w = hi - lo;
        lo = step.mid - 0.25 * w;
        hi = step.mid + 0.25 * w;
        step.note = "stability undetermined and flux zero within its error at r=" + fmt(r_far) +
                    "; bracket centred on the midpoint";
        res.steps.push_back(std::move(step));
        continue;
      }
    }
    step.verdict = v;
    if (v == res.lo_verdict) lo = step.mid;
    else hi = step.mid;
    res.steps.push_back(std::move(step));
  }
  res.lo = lo;
  res.hi = hi;
  res.mu_star = lo + 0.5 * (hi - lo);
  return res;
}

namespace {

struct Tally {
  HypothesisStatus status = HypothesisStatus::CertifiedOnSample;
  std::vector<std::string> notes;

  void violated(std::string why) {
    status = HypothesisStatus::Violated;
    notes.push_back(std::move(why));
  }
  void inconclusive(std::string why) {
    if (status != HypothesisStatus::Violated) status = HypothesisStatus::Inconclusive;
    notes.push_back(std::move(why));
  }
};

HypothesisAudit row(const std::string& thm, std::string hyp, HypothesisStatus st, std::string witness) {
  return {thm, std::move(hyp), st, std::move(witness)};
}

HypothesisAudit row(const std::string& thm, std::string hyp, const Tally& t, std::string ok_witness) {
  return {thm, std::move(hyp), t.status,
          t.status == HypothesisStatus::CertifiedOnSample ? std::move(ok_witness) : join(t.notes, "; ")};
}

std::string spectral_witness(const SpectralReport& r) {
  if (r.verdict == SpectralVerdict::CertifiedOnSample) {
    return std::to_string(r.points_checked) + " grid points on (" + fmt(r.annulus.r_in) + ", " + fmt(r.annulus.r_out) +
           "), no violations";
  }
  const auto& w = r.witnesses.front();
  return std::to_string(r.total_violations) + " violating grid points; first at z=" + fmt(w.z) + ", mu=" + fmt(w.mu) +
         ": " + w.reason + ", eigenvalues " + fmt(w.spectrum.lambda1.real()) + "+" + fmt(w.spectrum.lambda1.imag()) +
         "i, " + fmt(w.spectrum.lambda2.real()) + "+" + fmt(w.spectrum.lambda2.imag()) + "i";
}

HypothesisAudit index_sign_row(const PlanarField& field, const std::vector<double>& mus, const std::string& thm,
                               std::string hyp, bool positive_only, const BifurcationControls& c) {
  std::vector<double> used;
  for (double m : mus) {
    if (m > 0.0 || (!positive_only && m < 0.0)) used.push_back(m);
  }
  if (used.empty()) return row(thm, std::move(hyp), HypothesisStatus::Inconclusive, "no applicable mu sampled");
  auto est = parallel_map(used.size(), [&](std::size_t i) { return index_at_infinity(field, used[i], c.index); });
  Tally t;
  std::vector<std::string> ok;
  for (std::size_t i = 0; i < used.size(); ++i) {
    const int sg = est[i].sign();
    const std::string what = "mu=" + fmt(used[i]) + ": index " + to_string(est[i].classification) +
                             (est[i].classification == IndexClass::Finite ? " " + fmt(est[i].value) : "");
    if (sg == 0) t.inconclusive(what + " (no definite sign)");
    else if ((used[i] > 0.0) != (sg > 0)) t.violated(what);
    else ok.push_back(what);
  }
  return row(thm, std::move(hyp), t, join(ok, "; "));
}

HypothesisAudit singularity_row(const PlanarField& field, const std::vector<double>& mus, const std::string& thm,
                                const BifurcationControls& c) {
  const Annulus a = effective_annulus(field, c);
  Tally t;
  double worst = std::numeric_limits<double>::infinity();
  for (double m : mus) {
    const auto ev = singularity_free_annulus(field, m, a, c.singularity_grid);
    worst = std::min(worst, ev.min_speed);
    if (!ev.pass) t.violated("mu=" + fmt(m) + ": speed " + fmt(ev.min_speed) + " at z=" + fmt(ev.argmin));
  }
  return row(thm, "(4) no singularities", t,
             "minimum speed " + fmt(worst) + " on (" + fmt(a.r_in) + ", " + fmt(a.r_out) + ") grid " +
                 std::to_string(c.singularity_grid.n_r) + "x" + std::to_string(c.singularity_grid.n_theta));
}

HypothesisAudit poincare_row(const PlanarField& field, const std::vector<double>& mus, const std::string& thm,
                             const BifurcationControls& c) {
  Tally t;
  std::vector<std::string> ok;
  for (double m : mus) {
    std::vector<int> w;
    std::string radii;
    try {
      for (double rho : c.winding_radii) {
        w.push_back(winding_number(field, m, rho * field.sigma()));
        radii += (radii.empty() ? "" : ", ") + fmt(rho * field.sigma());
      }
    } catch (const WindingUndefined& e) {
      t.inconclusive("mu=" + fmt(m) + ": " + e.what());
      continue;
    }
    if (w.empty()) {
      t.inconclusive("no winding radii configured");
      continue;
    }
    if (std::adjacent_find(w.begin(), w.end(), std::not_equal_to<>()) != w.end()) {
      t.inconclusive("mu=" + fmt(m) + ": winding numbers differ between radii " + radii);
      continue;
    }
    const int idx = poincare_index_at_infinity(w.front());
    const std::string what = "mu=" + fmt(m) + ": winding " + std::to_string(w.front()) + " at r=" + radii +
                             ", index at infinity " + std::to_string(idx);
    if (idx > 1) t.violated(what);
    else ok.push_back(what);
  }
  return row(thm, "(4) Poincare index at infinity <= 1", t, join(ok, "; "));
}

std::vector<HypothesisAudit> audit_thm24(const PlanarField& field, const std::vector<double>& mus,
                                         const BifurcationControls& c) {
  const std::string thm = to_string(Theorem::Thm2_4);
  std::vector<HypothesisAudit> out;
  out.push_back(row(thm, "(1) Trace(DZ_mu) Lebesgue almost-integrable", HypothesisStatus::Assumed,
                    "measure-theoretic statement, not checked numerically"));

  Tally defined;
  std::vector<std::string> def_ok;
  for (double m : mus) {
    const auto e = index_at_infinity(field, m, c.index);
    const std::string what = "mu=" + fmt(m) + ": " + to_string(e.classification);
    if (e.classification == IndexClass::Indeterminate) defined.inconclusive(what);
    else def_ok.push_back(what);
  }
  out.push_back(row(thm, "(2) index at infinity well defined", defined, join(def_ok, "; ")));

  Tally speed;
  std::vector<std::string> sp_ok;
  for (double m : mus) {
    const auto chk = speed_integral_check(field, m, c.index.schedule, c.index.tail_window);
    const std::string what = "mu=" + fmt(m) + ": " + to_string(chk.verdict) + ", Upsilon(" + fmt(chk.radii.back()) +
                             ")=" + fmt(chk.min_speed.back()) + ", partial integral " + fmt(chk.partial_sums.back());
    if (chk.verdict == SpeedIntegralVerdict::DivergenceSupported) sp_ok.push_back(what);
    else speed.inconclusive(what + " (" + chk.reason + ")");
  }
  out.push_back(row(thm, "(2) integral of Upsilon_mu diverges", speed, join(sp_ok, "; ")));

  out.push_back(index_sign_row(field, mus, thm, "(3) mu*I(Z_mu) > 0 for mu != 0", false, c));
  out.push_back(singularity_row(field, mus, thm, c));
  out.push_back(poincare_row(field, mus, thm, c));
  return out;
}

std::vector<HypothesisAudit> audit_thm35(const PlanarField& field, const std::vector<double>& mus,
                                         const BifurcationControls& c) {
  const std::string thm = to_string(Theorem::Thm3_5);
  const Annulus a = effective_annulus(field, c);
  std::vector<HypothesisAudit> out;

  const auto dis = certify_class(field, 0.0, a, c.spectral_grid, SpectralClass::dissipative());
  out.push_back(row(thm, "X in H(2,sigma): dissipative spectrum",
                    dis.verdict == SpectralVerdict::CertifiedOnSample ? HypothesisStatus::CertifiedOnSample
                                                                       : HypothesisStatus::Violated,
                    spectral_witness(dis)));
  out.push_back(row(thm, "X has some singularity", HypothesisStatus::Assumed,
                    "singularities inside the excluded disk are not sampled"));

  double eps0 = c.eps0;
  if (!(eps0 > 0.0)) {
    eps0 = 0.0;
    for (double m : mus) eps0 = std::max(eps0, m);
    if (!(eps0 > 0.0)) eps0 = 0.1;
  }
  const auto det = certify_class(field, 0.0, a, c.spectral_grid, SpectralClass::det_positive_on(0.0, eps0));
  out.push_back(row(thm, "det(DX_mu) > 0 for mu in (0, " + fmt(eps0) + ")",
                    det.verdict == SpectralVerdict::CertifiedOnSample ? HypothesisStatus::CertifiedOnSample
                                                                       : HypothesisStatus::Violated,
                    spectral_witness(det)));
  out.push_back(row(thm, "(1) extension radii s_mu bounded near mu = 0", HypothesisStatus::Assumed,
                    "existence statement about strong extensions, not checked numerically"));
  out.push_back(row(thm, "(2) negative semi-flow well defined for mu > 0", HypothesisStatus::Assumed,
                    "existence and uniqueness of solutions, not checked numerically"));
  out.push_back(index_sign_row(field, mus, thm, "(2) mu*I(X_mu) > 0 for mu > 0", true, c));
  return out;
}

std::vector<HypothesisAudit> audit_prop42(const PlanarField& field, const BifurcationControls& c) {
  const std::string thm = to_string(Theorem::Prop4_2);
  const Annulus a = effective_annulus(field, c);
  std::vector<HypothesisAudit> out;
  const auto fre = certify_class(field, 0.0, a, c.spectral_grid, SpectralClass::free_real_eigenvalues());
  out.push_back(row(thm, "Spc(X) in {Re(z) = 0} minus {0}",
                    fre.verdict == SpectralVerdict::CertifiedOnSample ? HypothesisStatus::CertifiedOnSample
                                                                       : HypothesisStatus::Violated,
                    spectral_witness(fre)));
  out.push_back(row(thm, "X has some singularity", HypothesisStatus::Assumed,
                    "singularities inside the excluded disk are not sampled"));
  out.push_back(row(thm, "extension radii s_mu bounded near mu = 0", HypothesisStatus::Assumed,
                    "existence statement about strong extensions, not checked numerically"));
  return out;
}

}  // namespace

std::vector<HypothesisAudit> audit_hypotheses(const PlanarField& field, const std::vector<double>& mu_values,
                                              Theorem theorem, const BifurcationControls& c) {
  if (mu_values.empty()) throw InvalidArgument("audit needs at least one mu value");
  switch (theorem) {
    case Theorem::Thm2_4: return audit_thm24(field, mu_values, c);
    case Theorem::Thm3_5: return audit_thm35(field, mu_values, c);
    case Theorem::Prop4_2: return audit_prop42(field, c);
  }
  return {};
}

namespace {

int scalar_sign(const Expr& h, double mu, const Annulus& a, const PolarGrid& grid) {
  int sign = 0;
  for (double r : log_radii(a, grid.n_r)) {
    for (int k = 0; k < grid.n_theta; ++k) {
      const Vec2 z = polar(r, kTwoPi * k / grid.n_theta);
      const double v = h.eval(z.x, z.y, mu);
      if (!std::isfinite(v) || v == 0.0) {
        throw InvalidArgument("scalar vanishes on the annulus at z=" + fmt(z) + ", mu=" + fmt(mu));
      }
      const int s = v > 0.0 ? 1 : -1;
      if (sign != 0 && s != sign) {
        throw InvalidArgument("scalar changes sign on the annulus at z=" + fmt(z) + ", mu=" + fmt(mu));
      }
      sign = s;
    }
  }
  return sign;
}

}  // namespace

ScalingComparison scaling_family_check(const PlanarField& field, const std::string& scalar,
                                       const std::vector<double>& mu_values, const BifurcationControls& c) {
  ScalingComparison out;
  std::vector<double> mus = mu_values;
  std::sort(mus.begin(), mus.end());
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());

  std::vector<int> signs;
  std::optional<PlanarField> scaled;
  if (scalar.empty()) {
    out.scalar = "h_mu = 1/mu (1 at mu = 0)";
    scaled = field.scaled_by_mu([](double m) { return m == 0.0 ? 1.0 : 1.0 / m; }, field.name() + "*h_mu");
    for (double m : mus) signs.push_back(m < 0.0 ? -1 : 1);
  } else {
    const Expr h = parse_expr(scalar);
    out.scalar = h.to_string();
    const Annulus a = effective_annulus(field, c);
    for (double m : mus) signs.push_back(scalar_sign(h, m, a, c.spectral_grid));
    scaled = field.scaled(h, field.name() + "*(" + out.scalar + ")");
  }

  out.base = sweep(field, mus, c);
  out.scaled = sweep(*scaled, mus, c);
  out.pass = true;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    ScalingRow r;
    r.mu = mus[i];
    r.h_sign = signs[i];
    r.base = out.base.samples[i].stability.verdict;
    r.scaled = out.scaled.samples[i].stability.verdict;
    r.agrees = r.scaled == (r.h_sign > 0 ? r.base : swap(r.base));
    out.pass = out.pass && r.agrees;
    out.rows.push_back(r);
  }
  const auto& vb = out.base.verdict;
  const auto& vs = out.scaled.verdict;
  const bool det_b = vb.kind == BifurcationVerdictKind::HopfAtInfinityDetected;
  const bool det_s = vs.kind == BifurcationVerdictKind::HopfAtInfinityDetected;
  out.bracket_unchanged =
      det_b == det_s && (!det_b || (vb.bracket_lo == vs.bracket_lo && vb.bracket_hi == vs.bracket_hi));
  return out;
}

}  // namespace hopfinf
