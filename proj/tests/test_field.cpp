#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "hopfinf/error.hpp"
#include "hopfinf/field.hpp"
#include "hopfinf/rng.hpp"

using namespace hopfinf;

TEST_SUITE("field") {

TEST_CASE("catalog values") {
  const auto inv = catalog("inv");
  const Vec2 v = inv.eval({2, 0}, 0.0);
  CHECK(v.x == -0.5);
  CHECK(v.y == 2.0);
  const Vec2 w = inv.eval({2, 0}, 0.25);  // + mu*z
  CHECK(w.x == 0.0);
  CHECK(w.y == 2.0);
  CHECK(catalog("rot").eval({0, 3}, 0.0) == Vec2{-3, 0});
  CHECK(catalog("focus").eval({1, 1}, 1.0) == Vec2{-1, 1});
  const auto names = catalog_names();
  for (const char* n : {"rot", "focus", "inv", "rotinv"}) {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
}

TEST_CASE("jacobians match central differences") {
  std::mt19937_64 rng(5);
  for (const auto& name : {"rot", "focus", "inv", "rotinv"}) {
    const auto f = catalog(name);
    for (int k = 0; k < 200; ++k) {
      const Vec2 z = polar(uniform(rng, 1.2, 30.0), uniform(rng, 0, kTwoPi));
      const double mu = uniform(rng, -1, 1);
      const Mat2 j = f.jet(z, mu).jacobian;
      const double h = 1e-6 * (1 + z.norm());
      const Vec2 dx = (f.eval({z.x + h, z.y}, mu) - f.eval({z.x - h, z.y}, mu)) * (0.5 / h);
      const Vec2 dy = (f.eval({z.x, z.y + h}, mu) - f.eval({z.x, z.y - h}, mu)) * (0.5 / h);
      const double scale = 1 + j.max_abs();
      CHECK(std::fabs(j.a - dx.x) < 1e-7 * scale);
      CHECK(std::fabs(j.c - dx.y) < 1e-7 * scale);
      CHECK(std::fabs(j.b - dy.x) < 1e-7 * scale);
      CHECK(std::fabs(j.d - dy.y) < 1e-7 * scale);
    }
  }
}

TEST_CASE("inv jacobian closed form") {
  // trace 0, det 1 - r^-4
  const auto inv = catalog("inv");
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const double r = uniform(rng, 1.1, 50.0);
    const Mat2 j = inv.jet(polar(r, uniform(rng, 0, kTwoPi)), 0.0).jacobian;
    CHECK(std::fabs(j.trace()) < 1e-14);
    CHECK(j.det() == doctest::Approx(1 - std::pow(r, -4)).epsilon(1e-13));
  }
}

TEST_CASE("domain and construction errors") {
  const auto rot = catalog("rot");
  CHECK_THROWS_AS(rot.eval({0.5, 0.5}, 0.0), DomainViolation);
  CHECK_THROWS_AS(rot.eval({1.0, 0.0}, 0.0), DomainViolation);
  CHECK_THROWS_AS(catalog("nosuch"), UnknownName);
  CHECK_THROWS_AS(parse_field("f = -y; g = x", 0.0), InvalidArgument);
  CHECK_THROWS_AS(parse_field("f = -y + mu*x; g = x", 1.0), InvalidArgument);
  CHECK_NOTHROW(parse_field("f = -y + mu*x; g = x", 1.0, "g", ParamMode::General));
  const auto bad = parse_field("f = 1/(x - 2); g = 0", 1.0);
  CHECK_THROWS_AS(bad.eval({2, 0}, 0.0), NonFiniteValue);
}

TEST_CASE("definition files") {
  const auto f = parse_field_definition("# linear spiral\nname = spiral\nsigma = 2\nf = -y\ng = x\n");
  CHECK(f.name() == "spiral");
  CHECK(f.sigma() == 2.0);
  CHECK(f.eval({3, 0}, 1.0) == Vec2{3, 3});
  CHECK_THROWS_AS(parse_field_definition("f = x\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_field_definition("f = x\ng = y\ncolor = red\n"), InvalidArgument);

  const auto path = std::filesystem::temp_directory_path() / "hopfinf_field_def.txt";
  {
    std::ofstream os(path);
    os << "name = fromfile\nf = -y - x/r2\ng = x - y/r2\n";
  }
  const auto g = load_field_file(path.string());
  CHECK(g.name() == "fromfile");
  CHECK(g.eval({2, 0}, 0.0) == catalog("inv").eval({2, 0}, 0.0));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_field_file("/nonexistent/field.txt"), InvalidArgument);
}

TEST_CASE("source text reproduces the field") {
  for (const auto& name : {"rot", "focus", "inv", "rotinv"}) {
    const auto f = catalog(name);
    const auto g = parse_field(f.source(), f.sigma());
    for (double t : {0.1, 1.0, 2.5}) {
      CHECK(g.eval(polar(3, t), 0.3) == f.eval(polar(3, t), 0.3));
    }
  }
}

TEST_CASE("shift, scale and mu-dependent scale") {
  const auto inv = catalog("inv");
  const auto sh = inv.shifted(0.3, "inv_shift");
  CHECK_FALSE(sh.is_family());
  const auto s = parse_expr("1/(1 + r2)");
  const auto sc = inv.scaled(s, "inv_scaled");
  const auto hm = inv.scaled_by_mu([](double m) { return m == 0 ? 1.0 : 1.0 / m; }, "inv_hmu");
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vec2 z = polar(uniform(rng, 1.5, 20), uniform(rng, 0, kTwoPi));
    const double mu = uniform(rng, -1, 1);
    const Vec2 a = sh.eval(z, mu), b = inv.eval(z, mu - 0.3);
    CHECK(a.x == doctest::Approx(b.x).epsilon(1e-14));
    CHECK(a.y == doctest::Approx(b.y).epsilon(1e-14));
    const Vec2 c = sc.eval(z, mu), d = inv.eval(z, mu) * (1 / (1 + z.x * z.x + z.y * z.y));
    CHECK(c.x == doctest::Approx(d.x).epsilon(1e-13));
    CHECK(c.y == doctest::Approx(d.y).epsilon(1e-13));
    const Vec2 e = hm.eval(z, mu), f = inv.eval(z, mu) * (1 / mu);
    CHECK(e.x == doctest::Approx(f.x).epsilon(1e-14));
    const Mat2 je = hm.jet(z, mu).jacobian, jf = inv.jet(z, mu).jacobian * (1 / mu);
    CHECK(je.a == doctest::Approx(jf.a).epsilon(1e-14));
  }
  CHECK(hm.eval({2, 0}, 0.0) == inv.eval({2, 0}, 0.0));
}

TEST_CASE("registered fields are found by name") {
  register_field(parse_field("f = -2*y; g = 2*x", 1.0, "rot2"));
  CHECK(catalog("rot2").eval({1, 1}, 0.0) == Vec2{-2, 2});
}

}
