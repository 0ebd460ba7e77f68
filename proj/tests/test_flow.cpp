#include <cmath>

#include "doctest.h"

#include "hopfinf/error.hpp"
#include "hopfinf/flow.hpp"
#include "hopfinf/parallel.hpp"

using namespace hopfinf;

namespace {

// rot + mu z: z(t) = exp(mu t) R(t) z0
Vec2 rot_exact(Vec2 z0, double mu, double t) {
  const double e = std::exp(mu * t), c = std::cos(t), s = std::sin(t);
  return {e * (c * z0.x - s * z0.y), e * (s * z0.x + c * z0.y)};
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("integrator follows the closed form") {
  TrajectoryControls c;
  c.t_max = 10.0;
  c.detect_loops = false;
  c.escape_radius = 1e6;
  for (double mu : {-0.1, 0.1}) {
    const Vec2 z0{3, 4};
    const Trajectory t = integrate(catalog("rot"), mu, z0, Direction::Forward, c);
    CHECK(t.cause == Termination::TimeBudget);
    double worst = 0.0;
    for (const auto& s : t.samples) {
      const Vec2 ex = rot_exact(z0, mu, s.t);
      worst = std::max(worst, (s.z - ex).norm() / ex.norm());
    }
    CHECK(worst < 1e-6);
    CHECK(t.samples.back().t == doctest::Approx(10.0));
  }
}

TEST_CASE("backward integration reverses time") {
  TrajectoryControls c;
  c.t_max = 5.0;
  c.detect_loops = false;
  const Trajectory t = integrate(catalog("rot"), 0.1, {3, 4}, Direction::Backward, c);
  const auto& last = t.samples.back();
  const Vec2 ex = rot_exact({3, 4}, 0.1, -last.t);
  CHECK((last.z - ex).norm() < 1e-6 * ex.norm());
}

TEST_CASE("loop closure on periodic orbits") {
  TrajectoryControls c;
  const Trajectory t = integrate(catalog("rot"), 0.0, {5, 0}, Direction::Forward, c);
  REQUIRE(t.cause == Termination::LoopClosed);
  REQUIRE(t.loop);
  CHECK(t.loop->period == doctest::Approx(kTwoPi).epsilon(1e-6));
  CHECK(t.loop->mean_radius == doctest::Approx(5.0).epsilon(1e-6));

  // inv at mu = 0.04 has a repelling cycle at r = 5; found backward in time
  const auto o = classify_trajectory(catalog("inv"), 0.04, {4.5, 0}, Direction::Backward, c);
  REQUIRE(o.verdict == TrajectoryVerdict::Periodic);
  REQUIRE(o.loop);
  CHECK(o.loop->period == doctest::Approx(kTwoPi).epsilon(1e-4));
  CHECK(o.loop->mean_radius == doctest::Approx(5.0).epsilon(1e-4));
}

TEST_CASE("trajectory verdicts") {
  TrajectoryControls c;
  c.escape_radius = 1e4;
  const auto out = classify_trajectory(catalog("rot"), 0.1, {3, 0}, Direction::Forward, c);
  CHECK(out.verdict == TrajectoryVerdict::GoesToInfinity);
  const auto back = classify_trajectory(catalog("rot"), -0.1, {3, 0}, Direction::Backward, c);
  CHECK(back.verdict == TrajectoryVerdict::ComesFromInfinity);
  const auto in = classify_trajectory(catalog("focus"), 0.5, {3, 0}, Direction::Forward, c);
  CHECK(in.verdict == TrajectoryVerdict::ConvergesToSingularRegion);
  CHECK(in.point.norm() <= 1.02);
  CHECK(!out.path.points.empty());
  CHECK(out.path.points.size() <= 64);
  CHECK_THROWS_AS(classify_trajectory(catalog("rot"), 0.1, {0.5, 0}, Direction::Forward, c), DomainViolation);
}

TEST_CASE("transversal circles") {
  const auto inv = catalog("inv");
  // radial component mu r - 1/r
  const auto r2 = transversal_circle(inv, 0.04, 2.0);
  CHECK(r2.contact == CircleContact::Inflow);
  CHECK(r2.margin == doctest::Approx(0.42).epsilon(1e-9));
  const auto r5 = transversal_circle(inv, 0.04, 5.0);
  CHECK(r5.contact == CircleContact::NotTransversal);
  const auto r10 = transversal_circle(inv, 0.04, 10.0);
  CHECK(r10.contact == CircleContact::Outflow);
  CHECK(r10.margin == doctest::Approx(0.3).epsilon(1e-9));
  // (x + 3, y): radial component r + 3 cos(theta) changes sign on r = 2
  const auto mixed = transversal_circle(parse_field("f = x + 3; g = y", 1.0), 0.0, 2.0);
  CHECK(mixed.contact == CircleContact::NotTransversal);
  CHECK(std::fabs(mixed.witness_value) < 1e-6);
  CHECK_THROWS_AS(transversal_circle(inv, 0.04, 1.0), DomainViolation);
  CHECK_THROWS_AS(transversal_circle(inv, 0.04, 2.0, 16), InvalidArgument);
}

TEST_CASE("stability of infinity") {
  CHECK(certify_infinity_stability(catalog("rot"), 0.1).verdict == StabilityVerdict::Attractor);
  CHECK(certify_infinity_stability(catalog("rot"), -0.1).verdict == StabilityVerdict::Repellor);
  CHECK(certify_infinity_stability(catalog("rot"), 0.0).verdict == StabilityVerdict::Undetermined);
  CHECK(certify_infinity_stability(catalog("focus"), 0.5).verdict == StabilityVerdict::Repellor);
  const auto inv = certify_infinity_stability(catalog("inv"), 0.04);
  CHECK(inv.verdict == StabilityVerdict::Attractor);
  // the certified tail starts outside the cycle at r = 5
  CHECK(inv.circles[inv.certified_from].radius > 5.0);
  CHECK(inv.certified_count >= 3);
  CHECK(certify_infinity_stability(catalog("inv"), -0.04).verdict == StabilityVerdict::Repellor);
}

TEST_CASE("stability is independent of the worker count") {
  const unsigned saved = worker_limit();
  set_worker_limit(1);
  const auto a = certify_infinity_stability(catalog("inv"), 0.02);
  set_worker_limit(8);
  const auto b = certify_infinity_stability(catalog("inv"), 0.02);
  set_worker_limit(saved);
  CHECK(a.verdict == b.verdict);
  CHECK(a.reason == b.reason);
  REQUIRE(a.trajectory_evidence.size() == b.trajectory_evidence.size());
  for (std::size_t i = 0; i < a.trajectory_evidence.size(); ++i) {
    CHECK(a.trajectory_evidence[i].path.final_radius == b.trajectory_evidence[i].path.final_radius);
  }
}

TEST_CASE("positive rescaling keeps the stability") {
  const auto base = catalog("inv");
  const auto slow = base.scaled(parse_expr("1/(1 + r2)"), "slow");
  for (double mu : {-0.05, 0.05}) {
    CHECK(certify_infinity_stability(slow, mu).verdict == certify_infinity_stability(base, mu).verdict);
  }
}

}
