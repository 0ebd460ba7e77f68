// Acceptance checks. Prints one PASS/FAIL line per criterion. Exit status is 0
// when every failing criterion was listed with --known-unattainable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"
#include "hopfinf/bifurcation.hpp"
#include "hopfinf/flow.hpp"
#include "hopfinf/flux_index.hpp"
#include "hopfinf/format.hpp"
#include "hopfinf/rng.hpp"
#include "hopfinf/spectral.hpp"

using namespace hopfinf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "[x] ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", lo + (hi - lo) * i / (n - 1));
    v.push_back(std::stod(buf));
  }
  return v;
}

// Decided (index sign, stability) pairs collected across criteria 1 and 2.
struct SignRecord {
  std::string field;
  double mu;
  int sign;
  StabilityVerdict stability;
};
std::vector<SignRecord> g_signs;

void record(const std::string& field, const MuSample& s) {
  if (s.error.empty()) g_signs.push_back({field, s.mu, s.index.sign(), s.stability.verdict});
}

Outcome linear_family() {
  Outcome o;
  const auto rot = catalog("rot");
  double worst_flux = 0.0;
  bool classes = true, stab = true;
  for (double mu : {-1.0, -0.1, -0.01, 0.01, 0.1, 1.0}) {
    for (double r : {2.0, 8.0, 32.0}) {
      const double ex = kTwoPi * mu * r * r;
      worst_flux = std::max(worst_flux, std::fabs(flux(rot, mu, r).value - ex) / std::fabs(ex));
    }
    const auto s = evaluate_sample(rot, mu, {});
    record("rot", s);
    const auto want_class = mu > 0 ? IndexClass::DivergesToPlusInfinity : IndexClass::DivergesToMinusInfinity;
    if (s.index.classification != want_class) classes = false;
    const auto want_stab = mu > 0 ? StabilityVerdict::Attractor : StabilityVerdict::Repellor;
    if (s.stability.verdict != want_stab) stab = false;
  }
  o.require(worst_flux <= 1e-9, "max relative flux error " + fmt(worst_flux) + " (<= 1e-9)");
  o.require(classes, "index diverges with the sign of mu");
  o.require(stab, "repellor for mu < 0, attractor for mu > 0");
  const auto loc = locate_bifurcation(rot, -0.1, 0.1, 1e-6);
  o.require(std::fabs(loc.mu_star) <= 1e-6, "located mu* = " + fmt(loc.mu_star) + " (|mu*| <= 1e-6)");
  return o;
}

Outcome imaginary_spectrum() {
  Outcome o;
  const auto inv = catalog("inv");
  const auto cls = certify_class(inv, 0.0, {1.1, 50.0}, {40, 64}, SpectralClass::free_real_eigenvalues());
  o.require(cls.verdict == SpectralVerdict::CertifiedOnSample && cls.witnesses.empty(),
            "free real eigenvalues certified on " + std::to_string(cls.points_checked) + " points, " +
                std::to_string(cls.witnesses.size()) + " witnesses");
  const auto idx = index_at_infinity(inv, 0.0);
  double worst = 0.0;
  for (double phi : idx.evidence.flux) worst = std::max(worst, std::fabs(phi + kTwoPi));
  o.require(worst <= 1e-6, "max |Phi + 2pi| = " + fmt(worst) + " over " + std::to_string(idx.evidence.flux.size()) +
                               " radii (<= 1e-6)");
  BifurcationControls c;
  const auto rep = sweep(inv, grid(-0.1, 0.1, 9), c);
  for (const auto& s : rep.samples) record("inv", s);
  const bool hopf = rep.verdict.kind == BifurcationVerdictKind::HopfAtInfinityDetected && rep.verdict.mu_star;
  o.require(hopf && std::fabs(*rep.verdict.mu_star) <= 1e-4,
            "sweep " + to_string(rep.verdict.kind) + (rep.verdict.mu_star ? ", mu* = " + fmt(*rep.verdict.mu_star) : "") +
                " (|mu*| <= 1e-4)");
  const auto orbit = classify_trajectory(inv, 0.04, {4.5, 0.0}, Direction::Backward, {});
  if (orbit.verdict == TrajectoryVerdict::Periodic && orbit.loop) {
    const double dr = std::fabs(orbit.loop->mean_radius - 5.0) / 5.0;
    const double dp = std::fabs(orbit.loop->period - kTwoPi) / kTwoPi;
    o.require(dr <= 0.01 && dp <= 0.01, "cycle at mu=0.04: mean radius " + fmt(orbit.loop->mean_radius) +
                                            ", period " + fmt(orbit.loop->period) + " (within 1%)");
  } else {
    o.require(false, "no periodic orbit at mu=0.04: " + to_string(orbit.verdict));
  }
  return o;
}

Outcome sign_rule() {
  Outcome o;
  int inconsistent = 0;
  for (const auto& name : catalog_names()) {
    if (name == "rot" || name == "inv") continue;
    const auto rep = sweep(catalog(name), grid(-0.1, 0.1, 9), {});
    for (const auto& s : rep.samples) record(name, s);
    if (rep.verdict.kind == BifurcationVerdictKind::Inconsistent) ++inconsistent;
    o.note(name + ": " + to_string(rep.verdict.kind));
  }
  int decided = 0, mismatched = 0;
  for (const auto& s : g_signs) {
    if (s.stability == StabilityVerdict::Undetermined || s.sign == 0) continue;
    ++decided;
    const auto expected = s.sign > 0 ? StabilityVerdict::Attractor : StabilityVerdict::Repellor;
    if (s.stability != expected) {
      ++mismatched;
      o.note("mismatch " + s.field + " mu=" + fmt(s.mu));
    }
  }
  o.require(decided > 0 && mismatched == 0,
            std::to_string(decided) + " decided samples, " + std::to_string(mismatched) + " sign-rule mismatches");
  o.require(inconsistent == 0, std::to_string(inconsistent) + " inconsistent sweeps");
  return o;
}

Outcome green() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const auto names = catalog_names();
  int within_error = 0, within_abs = 0;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto f = catalog(names[static_cast<std::size_t>(k) % names.size()]);
    const double mu = uniform(rng, -1.0, 1.0);
    double a = uniform(rng, 1.5, 40.0), b = uniform(rng, 1.5, 40.0);
    if (a > b) std::swap(a, b);
    const Estimate div = divergence_integral(f, mu, {a, b});
    const Estimate fo = flux(f, mu, b), fi = flux(f, mu, a);
    const double gap = std::fabs(div.value - (fo.value - fi.value));
    worst = std::max(worst, gap);
    if (gap <= div.error + fo.error + fi.error) ++within_error;
    if (gap <= 1e-6) ++within_abs;
  }
  o.require(within_error == 20, std::to_string(within_error) + "/20 within the combined error estimate");
  o.require(within_abs == 20, std::to_string(within_abs) + "/20 within 1e-6 absolute, worst " + fmt(worst));
  return o;
}

const HypothesisAudit* find_row(const std::vector<HypothesisAudit>& rows, const std::string& needle) {
  for (const auto& r : rows) {
    if (r.hypothesis.find(needle) != std::string::npos) return &r;
  }
  return nullptr;
}

Outcome audit() {
  Outcome o;
  const auto rows = audit_hypotheses(catalog("rot"), {0.1}, Theorem::Thm2_4);
  auto certified = [&](const std::string& needle, const std::string& label) {
    const auto* r = find_row(rows, needle);
    o.require(r && r->status == HypothesisStatus::CertifiedOnSample,
              label + ": " + (r ? to_string(r->status) + " (" + r->witness + ")" : "missing"));
  };
  certified("Upsilon", "speed integral");
  certified("I(Z_mu)", "mu*I > 0");
  certified("Poincare index", "Poincare index");
  certified("no singularities", "singularity-free annulus");
  const auto speed = speed_integral_check(catalog("rot"), 0.1, {});
  o.require(speed.verdict == SpeedIntegralVerdict::DivergenceSupported, "speed check " + to_string(speed.verdict));
  bool winding = true;
  for (double r : {5.0, 20.0}) winding = winding && winding_number(catalog("rot"), 0.1, r) == 1;
  o.require(winding && poincare_index_at_infinity(1) == 1, "winding 1 at r = 5, 20");

  const auto neg = audit_hypotheses(catalog("focus"), {0.5}, Theorem::Thm3_5);
  const auto* r = find_row(neg, "I(X_mu)");
  o.require(r && r->status == HypothesisStatus::Violated,
            "focus Thm3.5 (2): " + (r ? to_string(r->status) : std::string("missing")));
  const auto rep = sweep(catalog("focus"), grid(-0.5, 0.5, 5), {});
  o.require(rep.verdict.kind == BifurcationVerdictKind::NoReversalFound, "focus sweep " + to_string(rep.verdict.kind));
  return o;
}

Outcome scaling() {
  Outcome o;
  const auto mus = grid(-0.2, 0.2, 9);
  const auto pos = scaling_family_check(catalog("rot"), "1/(1 + r2)", mus, {});
  o.require(pos.pass && pos.base.verdict.kind == pos.scaled.verdict.kind,
            "h = 1/(1+r2): verdicts " + std::string(pos.pass ? "identical" : "differ") + ", sweep " +
                to_string(pos.scaled.verdict.kind));
  const auto neg = scaling_family_check(catalog("rot"), "-1", mus, {});
  int decided = 0;
  for (const auto& row : neg.rows) decided += row.base != StabilityVerdict::Undetermined;
  o.require(neg.pass && decided > 0, "h = -1: stability swapped at " + std::to_string(decided) + " decided samples");
  o.require(neg.bracket_unchanged, "h = -1: bracket [" + fmt(neg.scaled.verdict.bracket_lo) + ", " +
                                       fmt(neg.scaled.verdict.bracket_hi) + "] unchanged");
  return o;
}

double endpoint_error(double mu, Vec2 z0, double rtol) {
  TrajectoryControls c;
  c.rtol = rtol;
  c.atol = rtol * 1e-3;
  c.t_max = 10.0;
  c.detect_loops = false;
  c.escape_radius = 1e9;
  c.max_steps = 50'000'000;
  const Trajectory t = integrate(catalog("rot"), mu, z0, Direction::Forward, c);
  const auto& last = t.samples.back();
  const double e = std::exp(mu * last.t), cs = std::cos(last.t), sn = std::sin(last.t);
  const Vec2 ex{e * (cs * z0.x - sn * z0.y), e * (sn * z0.x + cs * z0.y)};
  return (last.z - ex).norm();
}

Outcome convergence() {
  Outcome o;
  const Vec2 z0{3.0, 4.0};
  for (double mu : {-0.1, 0.1}) {
    const double e1 = endpoint_error(mu, z0, 1e-9);
    const double e2 = endpoint_error(mu, z0, 5e-10);
    o.require(e1 < 1e-6, "mu=" + fmt(mu) + ": endpoint error at t=10 " + fmt(e1) + " (< 1e-6)");
    o.require(e1 >= 8.0 * e2, "mu=" + fmt(mu) + ": halving rtol gives " + fmt(e1 / e2) + "x (>= 8x)");
  }
  std::string trend;
  for (double rtol : {1e-6, 1e-7, 1e-8, 1e-9, 1e-10}) {
    trend += (trend.empty() ? "" : ", ") + fmt(rtol) + " -> " + fmt(endpoint_error(0.1, z0, rtol));
  }
  o.note("error vs rtol at mu=0.1: " + trend);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "hopfinf_acceptance";
  fs::remove_all(root);
  std::vector<std::string> reports;
  for (const char* jobs : {"0", "1", "0"}) {
    const fs::path dir = root / ("run" + std::to_string(reports.size()));
    const std::vector<std::string> args{"hopfinf", "sweep", "--family", "inv", "--mu", "-0.1:0.1:9",
                                        "--seed", "7", "--jobs", jobs, "--out", dir.string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) o.note("run exited " + std::to_string(code) + ": " + err.str());
    reports.push_back(slurp(dir / "sweep.json"));
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1] && reports[1] == reports[2];
  o.require(same, "3 runs (jobs auto, 1, auto): " + std::string(same ? "byte-identical" : "differ") + ", " +
                      std::to_string(reports[0].size()) + " bytes");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> known;
  bool verbose = false;
  app.add_option("--known-unattainable", known, "Criteria expected to fail; they do not affect the exit status");
  app.add_flag("-v,--verbose", verbose, "Print the evidence behind each line");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"linear family flux, index, stability and locate", linear_family},
      {"imaginary-spectrum family", imaginary_spectrum},
      {"sign rule across catalog families", sign_rule},
      {"divergence theorem consistency", green},
      {"hypothesis audit and negative control", audit},
      {"scaling invariance", scaling},
      {"integrator convergence", convergence},
      {"determinism of sweep reports", determinism},
  };
  const std::set<int> allowed(known.begin(), known.end());
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1fs", secs);
    std::string failed;
    for (const auto& n : o.notes) {
      if (n.rfind("[x] ", 0) == 0) failed += (failed.empty() ? "" : "; ") + n.substr(4);
    }
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " (" << timing << ") "
              << criteria[i].first;
    if (!o.pass) std::cout << ": " << failed << (allowed.count(id) ? " [known unattainable]" : "");
    std::cout << "\n";
    if (verbose || !o.pass) {
      for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    }
    if (!o.pass && !allowed.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
