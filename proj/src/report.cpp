#include "hopfinf/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hopfinf/error.hpp"
#include "hopfinf/format.hpp"

namespace hopfinf {

namespace {

Json point(Vec2 z) { return Json{{"x", z.x}, {"y", z.y}}; }

Json annulus_json(const Annulus& a) { return Json{{"r_in", a.r_in}, {"r_out", a.r_out}}; }

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out + '\n';
}

}  // namespace

Json to_json(const SpectralReport& r) {
  Json j;
  j["class"] = to_string(r.class_queried.kind);
  if (r.class_queried.kind == SpectralClassKind::DetPositiveOnInterval) {
    j["mu_interval"] = {r.class_queried.mu_lo, r.class_queried.mu_hi};
  }
  j["verdict"] = to_string(r.verdict);
  j["annulus"] = annulus_json(r.annulus);
  j["grid"] = {{"n_r", r.grid.n_r}, {"n_theta", r.grid.n_theta}};
  j["mu_values"] = r.mu_values;
  j["points_checked"] = r.points_checked;
  j["zero_trace_points"] = r.zero_trace_points;
  j["total_violations"] = r.total_violations;
  Json w = Json::array();
  for (const auto& x : r.witnesses) {
    w.push_back({{"x", x.z.x},
                 {"y", x.z.y},
                 {"mu", x.mu},
                 {"re1", x.spectrum.lambda1.real()},
                 {"im1", x.spectrum.lambda1.imag()},
                 {"re2", x.spectrum.lambda2.real()},
                 {"im2", x.spectrum.lambda2.imag()},
                 {"reason", x.reason}});
  }
  j["witnesses"] = std::move(w);
  return j;
}

Json to_json(const FluxProfile& p) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    rows.push_back({{"r", p.radii[i]}, {"phi", p.flux[i]}, {"err", p.quadrature_error[i]}});
  }
  return rows;
}

Json to_json(const IndexEstimate& e) {
  Json j;
  j["class"] = to_string(e.classification);
  if (e.classification == IndexClass::Finite) {
    j["value"] = e.value;
    j["uncertainty"] = e.uncertainty;
  }
  j["sign"] = e.sign();
  j["fit"] = e.fit;
  j["flux"] = to_json(e.evidence);
  return j;
}

Json to_json(const TransversalityCertificate& c) {
  Json j{{"radius", c.radius}, {"contact", to_string(c.contact)}};
  if (c.contact == CircleContact::NotTransversal) {
    j["witness_angle"] = c.witness_angle;
    j["witness_value"] = c.witness_value;
  } else {
    j["margin"] = c.margin;
  }
  return j;
}

Json to_json(const TrajectoryOutcome& o) {
  Json j;
  j["verdict"] = to_string(o.verdict);
  j["direction"] = to_string(o.direction);
  j["reason"] = o.reason;
  if (o.verdict == TrajectoryVerdict::ConvergesToSingularRegion) {
    j["point"] = point(o.point);
    j["residual_speed"] = o.residual_speed;
  }
  if (o.loop) {
    j["loop"] = {{"period", o.loop->period},
                 {"mean_radius", o.loop->mean_radius},
                 {"min_radius", o.loop->min_radius},
                 {"max_radius", o.loop->max_radius},
                 {"closure_point", point(o.loop->closure_point)},
                 {"closure_distance", o.loop->closure_distance}};
  }
  Json pts = Json::array();
  for (const auto& z : o.path.points) pts.push_back({z.x, z.y});
  j["path"] = {{"start", point(o.path.start)},
               {"termination", to_string(o.path.cause)},
               {"final_time", o.path.final_time},
               {"final_radius", o.path.final_radius},
               {"points", std::move(pts)}};
  return j;
}

Json to_json(const InfinityStability& s) {
  Json j;
  j["verdict"] = to_string(s.verdict);
  j["reason"] = s.reason;
  j["certified_from"] = s.certified_from;
  j["certified_count"] = s.certified_count;
  Json circles = Json::array();
  for (const auto& c : s.circles) circles.push_back(to_json(c));
  j["circles"] = std::move(circles);
  Json ev = Json::array();
  for (const auto& o : s.trajectory_evidence) {
    ev.push_back({{"start", point(o.path.start)},
                  {"verdict", to_string(o.verdict)},
                  {"termination", to_string(o.path.cause)},
                  {"final_radius", o.path.final_radius},
                  {"final_time", o.path.final_time}});
  }
  j["trajectory_evidence"] = std::move(ev);
  j["probes_skipped"] = s.probes_skipped;
  return j;
}

Json to_json(const SpeedIntegralCheck& s) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    rows.push_back({{"r", s.radii[i]}, {"upsilon", s.min_speed[i]}, {"partial_integral", s.partial_sums[i]}});
  }
  return Json{{"verdict", to_string(s.verdict)}, {"reason", s.reason}, {"samples", std::move(rows)}};
}

Json to_json(const LocateResult& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    Json st{{"lo", s.lo}, {"hi", s.hi}, {"mid", s.mid}, {"verdict", to_string(s.verdict)}};
    if (s.flux_fallback) {
      st["flux_fallback"] = true;
      st["fallback_flux"] = s.fallback_flux;
    }
    if (!s.note.empty()) st["note"] = s.note;
    steps.push_back(std::move(st));
  }
  return Json{{"mu_star", r.mu_star},
              {"bracket", {r.lo, r.hi}},
              {"width", r.hi - r.lo},
              {"lo_verdict", to_string(r.lo_verdict)},
              {"hi_verdict", to_string(r.hi_verdict)},
              {"iterations", r.steps.size()},
              {"steps", std::move(steps)}};
}

Json to_json(const HypothesisAudit& a) {
  Json j{{"theorem", a.theorem}, {"hypothesis", a.hypothesis}, {"status", to_string(a.status)}};
  if (!a.witness.empty()) j["witness"] = a.witness;
  return j;
}

Json to_json(const MuSample& s) {
  Json j;
  j["mu"] = s.mu;
  if (!s.error.empty()) {
    j["error"] = s.error;
    return j;
  }
  Json idx{{"class", to_string(s.index.classification)}};
  if (s.index.classification == IndexClass::Finite) {
    idx["value"] = s.index.value;
    idx["uncertainty"] = s.index.uncertainty;
  }
  idx["sign"] = s.index.sign();
  idx["flux_at_largest_radius"] = s.index.evidence.flux.back();
  j["index"] = std::move(idx);
  j["stability"] = to_string(s.stability.verdict);
  j["stability_evidence"] = {{"reason", s.stability.reason},
                             {"certified_count", s.stability.certified_count},
                             {"innermost_certified_radius",
                              s.stability.certified_from < s.stability.circles.size()
                                  ? Json(s.stability.circles[s.stability.certified_from].radius)
                                  : Json(nullptr)},
                             {"probes_run", s.stability.trajectory_evidence.size()}};
  j["spectral"] = {{"points", s.spectral.points},
                   {"max_real_part", s.spectral.max_real_part},
                   {"min_real_part", s.spectral.min_real_part},
                   {"min_det", s.spectral.min_det},
                   {"max_trace", s.spectral.max_trace},
                   {"real_eigenvalue_points", s.spectral.real_eigenvalue_points}};
  j["singularity_free"] = {{"pass", s.singularity_free.pass},
                           {"annulus", annulus_json(s.singularity_free.annulus)},
                           {"min_speed", s.singularity_free.min_speed},
                           {"argmin", point(s.singularity_free.argmin)}};
  return j;
}

Json to_json(const BifurcationReport& r) {
  Json j;
  j["field"] = r.field;
  Json samples = Json::array();
  for (const auto& s : r.samples) samples.push_back(to_json(s));
  j["mu_samples"] = std::move(samples);
  j["verdict"] = to_string(r.verdict.kind);
  if (r.verdict.mu_star) j["mu_star"] = *r.verdict.mu_star;
  if (r.verdict.kind == BifurcationVerdictKind::HopfAtInfinityDetected) {
    j["bracket"] = {r.verdict.bracket_lo, r.verdict.bracket_hi};
    j["located_width"] = r.verdict.bracket_width;
    j["orientation"] = r.verdict.reversed_orientation ? "attractor_to_repellor" : "repellor_to_attractor";
  }
  j["details"] = r.verdict.details;
  if (r.locate) j["locate"] = to_json(*r.locate);
  Json audit = Json::array();
  for (const auto& a : r.audit) audit.push_back(to_json(a));
  j["audit"] = std::move(audit);
  return j;
}

Json to_json(const ScalingComparison& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"mu", r.mu},
                    {"h_sign", r.h_sign},
                    {"base", to_string(r.base)},
                    {"scaled", to_string(r.scaled)},
                    {"agrees", r.agrees}});
  }
  return Json{{"scalar", s.scalar},
              {"pass", s.pass},
              {"bracket_unchanged", s.bracket_unchanged},
              {"rows", std::move(rows)},
              {"base", to_json(s.base)},
              {"scaled", to_json(s.scaled)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string flux_csv(const FluxProfile& p) {
  std::string out = "r,phi,err\n";
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    out += csv_line({fmt(p.radii[i]), fmt(p.flux[i]), fmt(p.quadrature_error[i])});
  }
  return out;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out = "t,x,y\n";
  for (const auto& s : t.samples) out += csv_line({fmt(s.t), fmt(s.z.x), fmt(s.z.y)});
  return out;
}

std::string sweep_csv(const BifurcationReport& r) {
  std::string out = "mu,index_sign,stability\n";
  for (const auto& s : r.samples) {
    out += csv_line({fmt(s.mu), std::to_string(s.error.empty() ? s.index.sign() : 0),
                     s.error.empty() ? to_string(s.stability.verdict) : "error"});
  }
  return out;
}

std::string summary(const SpectralReport& r) {
  std::ostringstream os;
  os << "class " << to_string(r.class_queried.kind) << " on annulus (" << fmt(r.annulus.r_in) << ", "
     << fmt(r.annulus.r_out) << "), grid " << r.grid.n_r << "x" << r.grid.n_theta << ": " << to_string(r.verdict)
     << "\n";
  os << "points checked " << r.points_checked << ", violations " << r.total_violations << ", zero-trace points "
     << r.zero_trace_points << "\n";
  for (std::size_t i = 0; i < r.witnesses.size() && i < 5; ++i) {
    const auto& w = r.witnesses[i];
    os << "  witness z=" << fmt(w.z) << " mu=" << fmt(w.mu) << ": " << w.reason << "\n";
  }
  return os.str();
}

std::string summary(const IndexEstimate& e) {
  std::ostringstream os;
  os << "index at infinity: " << to_string(e.classification);
  if (e.classification == IndexClass::Finite) os << " " << fmt(e.value) << " +- " << fmt(e.uncertainty);
  os << "\n" << e.fit << "\n";
  for (std::size_t i = 0; i < e.evidence.radii.size(); ++i) {
    os << "  r=" << fmt(e.evidence.radii[i]) << "  phi=" << fmt(e.evidence.flux[i]) << "\n";
  }
  return os.str();
}

std::string summary(const InfinityStability& s) {
  std::ostringstream os;
  os << "infinity: " << to_string(s.verdict) << "\n" << s.reason << "\n";
  for (const auto& c : s.circles) {
    os << "  r=" << fmt(c.radius) << "  " << to_string(c.contact) << "\n";
  }
  return os.str();
}

std::string summary(const TrajectoryOutcome& o) {
  std::ostringstream os;
  os << "trajectory from " << fmt(o.path.start) << " (" << to_string(o.direction) << "): " << to_string(o.verdict)
     << "\n" << o.reason << "\n";
  if (o.loop) {
    os << "  period " << fmt(o.loop->period) << ", mean radius " << fmt(o.loop->mean_radius) << "\n";
  }
  os << "  terminated by " << to_string(o.path.cause) << " at t=" << fmt(o.path.final_time)
     << ", r=" << fmt(o.path.final_radius) << "\n";
  return os.str();
}

std::string summary(const LocateResult& r) {
  std::ostringstream os;
  os << "mu* = " << fmt(r.mu_star) << " in [" << fmt(r.lo) << ", " << fmt(r.hi) << "] after " << r.steps.size()
     << " bisection steps (" << to_string(r.lo_verdict) << " below, " << to_string(r.hi_verdict) << " above)\n";
  std::size_t fallbacks = 0;
  for (const auto& s : r.steps) fallbacks += s.flux_fallback ? 1 : 0;
  if (fallbacks) os << "  " << fallbacks << " steps split by the flux sign\n";
  return os.str();
}

std::string summary(const std::vector<HypothesisAudit>& rows) {
  std::ostringstream os;
  for (const auto& a : rows) {
    os << a.theorem << "  " << a.hypothesis << ": " << to_string(a.status) << "\n";
    if (!a.witness.empty()) os << "    " << a.witness << "\n";
  }
  return os.str();
}

std::string summary(const BifurcationReport& r) {
  std::ostringstream os;
  os << "field " << r.field << "\n";
  for (const auto& s : r.samples) {
    os << "  mu=" << fmt(s.mu) << "  ";
    if (!s.error.empty()) {
      os << "error: " << s.error << "\n";
      continue;
    }
    os << "index " << to_string(s.index.classification) << "  stability " << to_string(s.stability.verdict)
       << (s.singularity_free.pass ? "" : "  (singularity check failed)") << "\n";
  }
  os << "verdict: " << to_string(r.verdict.kind);
  if (r.verdict.mu_star) os << "  mu*=" << fmt(*r.verdict.mu_star);
  os << "\n" << r.verdict.details << "\n";
  if (!r.audit.empty()) os << summary(r.audit);
  return os.str();
}

std::string summary(const ScalingComparison& s) {
  std::ostringstream os;
  os << "scaling by " << s.scalar << ": " << (s.pass ? "verdicts agree" : "verdicts disagree")
     << (s.bracket_unchanged ? ", bracket unchanged" : ", bracket changed") << "\n";
  for (const auto& r : s.rows) {
    os << "  mu=" << fmt(r.mu) << "  h " << (r.h_sign > 0 ? "+" : "-") << "  " << to_string(r.base) << " -> "
       << to_string(r.scaled) << (r.agrees ? "" : "  MISMATCH") << "\n";
  }
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + target.string() + ": " + ec.message());
  }
}

}  // namespace hopfinf
