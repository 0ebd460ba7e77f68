#include "hopfinf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hopfinf/error.hpp"
#include "hopfinf/parallel.hpp"
#include "hopfinf/rng.hpp"

namespace hopfinf {

std::string to_string(TrajectoryVerdict v) {
  switch (v) {
    case TrajectoryVerdict::GoesToInfinity: return "goes_to_infinity";
    case TrajectoryVerdict::ComesFromInfinity: return "comes_from_infinity";
    case TrajectoryVerdict::ConvergesToSingularRegion: return "converges_to_singular_region";
    case TrajectoryVerdict::Periodic: return "periodic";
    case TrajectoryVerdict::Undetermined: return "undetermined";
  }
  return "?";
}

std::string to_string(CircleContact c) {
  switch (c) {
    case CircleContact::Inflow: return "inflow";
    case CircleContact::Outflow: return "outflow";
    case CircleContact::NotTransversal: return "not_transversal";
  }
  return "?";
}

std::string to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::Attractor: return "attractor";
    case StabilityVerdict::Repellor: return "repellor";
    case StabilityVerdict::Undetermined: return "undetermined";
  }
  return "?";
}

namespace {

constexpr std::size_t kSummaryPoints = 64;

PathSummary summarize(const Trajectory& traj) {
  PathSummary p;
  p.cause = traj.cause;
  p.start = traj.samples.front().z;
  const auto& last = traj.samples.back();
  p.final_time = last.t;
  p.final_radius = last.z.norm();
  const std::size_t n = traj.samples.size();
  const std::size_t stride = std::max<std::size_t>(1, (n + kSummaryPoints - 1) / kSummaryPoints);
  for (std::size_t i = 0; i < n; i += stride) p.points.push_back(traj.samples[i].z);
  if (p.points.back() != last.z) p.points.push_back(last.z);
  return p;
}

// Radius non-decreasing over the last quarter of the integration variable.
bool radius_monotone_tail(const Trajectory& traj) {
  const double s_end = traj.samples.back().s;
  const double s_from = 0.75 * s_end;
  double prev = -1.0;
  for (const auto& smp : traj.samples) {
    if (smp.s < s_from) continue;
    const double r = smp.z.norm();
    if (prev >= 0.0 && r < prev * (1.0 - 1e-12)) return false;
    prev = r;
  }
  return true;
}

}  // namespace

TrajectoryOutcome classify(const Trajectory& traj, const PlanarField& field, double mu, Direction dir,
                           const TrajectoryControls&) {
  TrajectoryOutcome out;
  out.direction = dir;
  out.path = summarize(traj);
  const Vec2 last = traj.samples.back().z;
  switch (traj.cause) {
    case Termination::Escaped:
      if (radius_monotone_tail(traj)) {
        out.verdict = dir == Direction::Forward ? TrajectoryVerdict::GoesToInfinity : TrajectoryVerdict::ComesFromInfinity;
        out.reason = "passed the escape radius with increasing radius";
      } else {
        out.reason = "passed the escape radius but the radius was not monotone at the end";
      }
      break;
    case Termination::LoopClosed:
      out.verdict = TrajectoryVerdict::Periodic;
      out.loop = traj.loop;
      out.reason = "returned to the section within the loop tolerance";
      break;
    case Termination::ReachedInnerRadius:
    case Termination::SingularPoint:
      out.verdict = TrajectoryVerdict::ConvergesToSingularRegion;
      out.point = last;
      out.residual_speed = field.eval(last, mu).norm();
      out.reason = traj.cause == Termination::SingularPoint ? "field speed vanished" : "approached the excluded disk";
      break;
    case Termination::TimeBudget:
    case Termination::StepBudget:
    case Termination::StepCollapse:
      out.reason = traj.detail.empty() ? to_string(traj.cause) : traj.detail;
      break;
  }
  return out;
}

TrajectoryOutcome classify_trajectory(const PlanarField& field, double mu, Vec2 z0, Direction dir,
                                      const TrajectoryControls& c) {
  return classify(integrate(field, mu, z0, dir, c), field, mu, dir, c);
}

TransversalityCertificate transversal_circle(const PlanarField& field, double mu, double r, int angular_samples) {
  if (!(r > field.sigma())) throw DomainViolation({r, 0.0}, field.sigma());
  if (angular_samples < 64) throw InvalidArgument("transversal_circle needs at least 64 angular samples");

  struct Probe {
    double radial;
    double tol;
  };
  auto probe = [&](double t) {
    const Vec2 n{std::cos(t), std::sin(t)};
    const Vec2 v = field.eval(n * r, mu);
    return Probe{dot(v, n), kTangencyTol * (1.0 + v.norm())};
  };

  TransversalityCertificate cert;
  cert.radius = r;
  const double h = kTwoPi / angular_samples;
  std::vector<Probe> p(static_cast<std::size_t>(angular_samples));
  for (int k = 0; k < angular_samples; ++k) p[static_cast<std::size_t>(k)] = probe(k * h);

  auto not_transversal = [&](double t, double v) {
    cert.contact = CircleContact::NotTransversal;
    cert.witness_angle = t;
    cert.witness_value = v;
    cert.margin = 0.0;
    return cert;
  };

  for (int k = 0; k < angular_samples; ++k) {
    const Probe& a = p[static_cast<std::size_t>(k)];
    if (std::fabs(a.radial) <= a.tol) return not_transversal(k * h, a.radial);
  }
  for (int k = 0; k < angular_samples; ++k) {
    const Probe& a = p[static_cast<std::size_t>(k)];
    const Probe& b = p[static_cast<std::size_t>((k + 1) % angular_samples)];
    if ((a.radial > 0.0) != (b.radial > 0.0)) {
      // Bisect the sign change down to a tangency point.
      double lo = k * h;
      double hi = (k + 1) * h;
      const bool lo_pos = a.radial > 0.0;
      Probe m{};
      double tm = lo;
      for (int it = 0; it < 100; ++it) {
        tm = 0.5 * (lo + hi);
        m = probe(tm);
        if (std::fabs(m.radial) <= m.tol) break;
        if ((m.radial > 0.0) == lo_pos) lo = tm;
        else hi = tm;
      }
      return not_transversal(tm, m.radial);
    }
  }

  // Constant sign: refine the minimum of |radial| around the smallest sample.
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (std::fabs(p[k].radial) < std::fabs(p[best].radial)) best = k;
  }
  const double sign = p[0].radial > 0.0 ? 1.0 : -1.0;
  constexpr double kInvPhi = 0.6180339887498949;
  double a = (static_cast<double>(best) - 1.0) * h;
  double b = (static_cast<double>(best) + 1.0) * h;
  auto g = [&](double t) { return sign * probe(t).radial; };
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1; x1 = b - kInvPhi * (b - a); f1 = g(x1);
    } else {
      a = x1; x1 = x2; f1 = f2; x2 = a + kInvPhi * (b - a); f2 = g(x2);
    }
  }
  const double refined = std::min({std::fabs(p[best].radial), f1, f2});
  if (!(std::min(f1, f2) > 0.0)) {
    const double t = f1 < f2 ? x1 : x2;
    return not_transversal(t, probe(t).radial);
  }
  cert.contact = sign > 0.0 ? CircleContact::Outflow : CircleContact::Inflow;
  cert.margin = refined;
  return cert;
}

InfinityStability certify_infinity_stability(const PlanarField& field, double mu, const StabilityControls& c) {
  InfinityStability out;
  const auto radii = c.circles.radii(field.sigma());
  if (radii.size() < 3) throw InvalidArgument("stability schedule needs at least 3 radii beyond sigma");

  out.circles = parallel_map(radii.size(), [&](std::size_t i) {
    return transversal_circle(field, mu, radii[i], c.angular_samples);
  });

  // Outermost run of transversal circles sharing the sign of the outermost one.
  const CircleContact outer = out.circles.back().contact;
  if (outer == CircleContact::NotTransversal) {
    out.reason = "outermost circle is not transversal";
    out.certified_from = out.circles.size();
    return out;
  }
  std::size_t from = out.circles.size();
  while (from > 0 && out.circles[from - 1].contact == outer) --from;
  out.certified_from = from;
  out.certified_count = out.circles.size() - from;
  if (out.certified_count < static_cast<std::size_t>(c.min_circles)) {
    out.reason = "only " + std::to_string(out.certified_count) + " transversal circles of uniform sign at the largest radii";
    return out;
  }

  const Direction dir = outer == CircleContact::Outflow ? Direction::Forward : Direction::Backward;
  const TrajectoryVerdict wanted =
      dir == Direction::Forward ? TrajectoryVerdict::GoesToInfinity : TrajectoryVerdict::ComesFromInfinity;
  TrajectoryControls tc = c.trajectory;
  tc.escape_radius = c.escape_factor * radii.back();
  const double r_launch = radii[from];

  std::mt19937_64 rng(c.seed);
  const double offset = unit_uniform(rng);
  const auto n_probes = static_cast<std::size_t>(std::max(1, c.probes));

  // Fixed-size batches so evidence does not depend on the worker count.
  constexpr std::size_t kBatch = 4;
  bool failed = false;
  for (std::size_t b0 = 0; b0 < n_probes && !failed; b0 += kBatch) {
    const std::size_t nb = std::min(kBatch, n_probes - b0);
    auto batch = parallel_map(nb, [&](std::size_t j) {
      const double theta = kTwoPi * (static_cast<double>(b0 + j) + offset) / static_cast<double>(n_probes);
      return classify_trajectory(field, mu, polar(r_launch, theta), dir, tc);
    });
    for (auto& o : batch) {
      if (o.verdict != wanted) failed = true;
      out.trajectory_evidence.push_back(std::move(o));
    }
  }
  out.probes_skipped = n_probes - out.trajectory_evidence.size();

  if (failed) {
    out.reason = "a " + to_string(dir) + " probe did not escape: " + [&] {
      for (const auto& o : out.trajectory_evidence) {
        if (o.verdict != wanted) return to_string(o.verdict) + " (" + o.reason + ")";
      }
      return std::string();
    }();
    return out;
  }
  out.verdict = dir == Direction::Forward ? StabilityVerdict::Attractor : StabilityVerdict::Repellor;
  out.reason = std::to_string(out.certified_count) + " " + to_string(outer) + " circles from r=" +
               std::to_string(r_launch) + "; all " + std::to_string(n_probes) + " " + to_string(dir) +
               " probes escaped";
  return out;
}

}  // namespace hopfinf
