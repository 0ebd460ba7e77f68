#include <cmath>
#include <random>

#include "doctest.h"

#include "hopfinf/error.hpp"
#include "hopfinf/flux_index.hpp"
#include "hopfinf/rng.hpp"

using namespace hopfinf;

namespace {

// Closed-form flux: rot 2 pi mu r^2, focus 2 pi (mu - 1) r^2, inv 2 pi (mu r^2 - 1), rotinv 2 pi (mu r^2 + 1).
double flux_oracle(const std::string& name, double mu, double r) {
  if (name == "rot") return kTwoPi * mu * r * r;
  if (name == "focus") return kTwoPi * (mu - 1) * r * r;
  if (name == "inv") return kTwoPi * (mu * r * r - 1);
  return kTwoPi * (mu * r * r + 1);
}

}  // namespace

TEST_SUITE("flux_index") {

TEST_CASE("flux matches closed forms") {
  for (const auto& name : {"rot", "focus", "inv", "rotinv"}) {
    for (double mu : {-1.0, -0.1, 0.0, 0.04, 0.5}) {
      for (double r : {1.5, 2.0, 8.0, 32.0, 300.0}) {
        const Estimate e = flux(catalog(name), mu, r);
        const double ex = flux_oracle(name, mu, r);
        CHECK(std::fabs(e.value - ex) <= 1e-10 * std::max(1.0, std::fabs(ex)) + 1e-12 * r * r);
        CHECK(std::fabs(e.value - ex) <= e.error + 1e-12 * r * r);
      }
    }
  }
}

TEST_CASE("flux of mu z is added exactly") {
  std::mt19937_64 rng(4);
  const auto f = parse_field("f = sin(x) - y^3/r2; g = x*y/r2 + cos(y)", 1.0);
  for (int k = 0; k < 20; ++k) {
    const double mu = uniform(rng, -1, 1), r = uniform(rng, 1.5, 20);
    const double d = flux(f, mu, r).value - flux(f, 0.0, r).value;
    CHECK(d == doctest::Approx(kTwoPi * mu * r * r).epsilon(1e-9));
  }
}

TEST_CASE("divergence theorem on annuli") {
  std::mt19937_64 rng(21);
  const char* names[] = {"rot", "focus", "inv", "rotinv"};
  for (int k = 0; k < 12; ++k) {
    const auto f = catalog(names[k % 4]);
    const double mu = uniform(rng, -1, 1);
    double a = uniform(rng, 1.5, 40), b = uniform(rng, 1.5, 40);
    if (a > b) std::swap(a, b);
    const Estimate div = divergence_integral(f, mu, {a, b});
    const Estimate fo = flux(f, mu, b), fi = flux(f, mu, a);
    const double gap = std::fabs(div.value - (fo.value - fi.value));
    CHECK(gap <= div.error + fo.error + fi.error);
    CHECK(gap <= 1e-9 * (std::fabs(fo.value) + std::fabs(fi.value)) + 1e-9);
  }
}

TEST_CASE("divergence integral of a non-polynomial field") {
  // trace of (x exp(-r2/50), y exp(-r2/50)) integrates to the boundary flux.
  const auto f = parse_field("f = x*exp(-r2/50); g = y*exp(-r2/50)", 1.0);
  const Estimate div = divergence_integral(f, 0.0, {1.5, 12.0});
  const double ex = kTwoPi * (144 * std::exp(-144.0 / 50) - 2.25 * std::exp(-2.25 / 50));
  CHECK(div.value == doctest::Approx(ex).epsilon(1e-9));
}

TEST_CASE("index classification") {
  auto plus = index_at_infinity(catalog("rot"), 0.01);
  CHECK(plus.classification == IndexClass::DivergesToPlusInfinity);
  CHECK(plus.sign() == 1);
  auto minus = index_at_infinity(catalog("rot"), -0.01);
  CHECK(minus.classification == IndexClass::DivergesToMinusInfinity);
  CHECK(minus.sign() == -1);
  auto zero = index_at_infinity(catalog("rot"), 0.0);
  CHECK(zero.classification == IndexClass::Finite);
  CHECK(zero.sign() == 0);
  auto inv = index_at_infinity(catalog("inv"), 0.0);
  CHECK(inv.classification == IndexClass::Finite);
  CHECK(inv.value == doctest::Approx(-kTwoPi).epsilon(1e-9));
  CHECK(inv.uncertainty < 1e-5);
  CHECK(inv.sign() == -1);
  CHECK(index_at_infinity(catalog("focus"), 0.5).classification == IndexClass::DivergesToMinusInfinity);
  for (std::size_t i = 0; i < inv.evidence.radii.size(); ++i) {
    CHECK(std::fabs(inv.evidence.flux[i] + kTwoPi) <= 1e-6);
  }
}

TEST_CASE("flux limit classifier on synthetic profiles") {
  IndexControls c;
  auto make = [](std::vector<double> phi) {
    FluxProfile p;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      p.radii.push_back(std::pow(2.0, static_cast<double>(i + 1)));
      p.flux.push_back(phi[i]);
      p.quadrature_error.push_back(1e-12);
    }
    return p;
  };
  CHECK(classify_flux_limit(make({1, 4, 16, 64, 256, 1024, 4096}), c).classification ==
        IndexClass::DivergesToPlusInfinity);
  auto fin = classify_flux_limit(make({3, 3.5, 3.75, 3.875, 3.9375, 3.96875}), c);
  CHECK(fin.classification == IndexClass::Finite);
  CHECK(fin.value == 3.96875);
  CHECK(fin.uncertainty >= 4.0 - 3.96875 - 1e-12);
  CHECK(classify_flux_limit(make({1, -1, 2, -2, 3, -3}), c).classification == IndexClass::Indeterminate);
  // grows but stays below the threshold
  CHECK(classify_flux_limit(make({1, 2, 4, 8, 16, 32}), c).classification == IndexClass::Indeterminate);
  CHECK_THROWS_AS(classify_flux_limit(make({1, 2, 3}), c), InvalidArgument);
}

TEST_CASE("schedule validation") {
  IndexControls c;
  c.schedule.count = 5;
  CHECK_THROWS_AS(index_at_infinity(catalog("rot"), 0.1, c), InvalidArgument);
  c.schedule.count = 8;
  c.schedule.ratio = 1.2;
  CHECK_THROWS_AS(index_at_infinity(catalog("rot"), 0.1, c), InvalidArgument);
  CHECK_THROWS_AS(flux(catalog("rot"), 0.1, 0.5), DomainViolation);
}

TEST_CASE("minimum speed on circles") {
  // inv: |X|^2 = r^2 + r^-2 on every circle
  CHECK(radial_min_speed(catalog("inv"), 0.0, 2.0) == doctest::Approx(std::sqrt(4.25)).epsilon(1e-12));
  // rot + mu z: |X| = r sqrt(1 + mu^2)
  CHECK(radial_min_speed(catalog("rot"), 0.1, 5.0) == doctest::Approx(5 * std::sqrt(1.01)).epsilon(1e-12));
  // a field with an angular minimum: (x, 2y) has min speed r at theta = 0
  CHECK(radial_min_speed(parse_field("f = x; g = 2*y", 1.0), 0.0, 3.0) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("speed integral check") {
  const auto rot = speed_integral_check(catalog("rot"), 0.1, {});
  CHECK(rot.verdict == SpeedIntegralVerdict::DivergenceSupported);
  CHECK(radial_min_speed(catalog("rot"), 0.0, 3.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(speed_integral_check(catalog("rot"), 0.2, {}).verdict == SpeedIntegralVerdict::DivergenceSupported);
  const auto inverse_square = speed_integral_check(parse_field("f = -y/(r2*sqrt(r2)); g = x/(r2*sqrt(r2))", 1.0), 0.0, {});
  CHECK(inverse_square.verdict == SpeedIntegralVerdict::Inconclusive);
  // speed decaying like r^-3 has a convergent integral
  const auto decay = speed_integral_check(parse_field("f = -y/r2^2; g = x/r2^2", 1.0), 0.0, {});
  CHECK(decay.verdict == SpeedIntegralVerdict::Inconclusive);
}

TEST_CASE("winding numbers") {
  for (double r : {1.5, 5.0, 20.0, 300.0}) {
    CHECK(winding_number(catalog("rot"), 0.1, r) == 1);
    CHECK(winding_number(catalog("focus"), 0.5, r) == 1);
    CHECK(winding_number(catalog("inv"), 0.04, r) == 1);
  }
  const auto z2 = parse_field("f = x^2 - y^2; g = 2*x*y", 1.0);
  CHECK(winding_number(z2, 0.0, 3.0) == 2);
  CHECK(poincare_index_at_infinity(2) == 0);
  const auto conj = parse_field("f = x; g = -y", 1.0);
  CHECK(winding_number(conj, 0.0, 3.0) == -1);
  // a zero on the circle: (x - 3, y)
  const auto shifted = parse_field("f = x - 3; g = y", 1.0);
  CHECK_THROWS_AS(winding_number(shifted, 0.0, 3.0), WindingUndefined);
  CHECK(winding_number(shifted, 0.0, 4.0) == 1);
  CHECK(winding_number(shifted, 0.0, 2.0) == 0);
}

}
