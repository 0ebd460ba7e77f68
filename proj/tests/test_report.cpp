#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "hopfinf/format.hpp"
#include "hopfinf/parallel.hpp"
#include "hopfinf/report.hpp"

using namespace hopfinf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

BifurcationControls quick() {
  BifurcationControls c;
  c.locate_tol = 1e-3;
  return c;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("shortest round-trip formatting") {
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(-2.5) == "-2.5");
  CHECK(fmt(1e-300) == "1e-300");
  CHECK(fmt(Vec2{1, -0.5}) == "(1, -0.5)");
}

TEST_CASE("sweep schema") {
  const auto rep = sweep(catalog("rot"), {-0.1, 0.1}, quick());
  const Json j = to_json(rep);
  for (const char* key : {"field", "mu_samples", "verdict", "mu_star", "bracket", "located_width", "orientation",
                          "details", "locate", "audit"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["verdict"] == "hopf_at_infinity_detected");
  CHECK(j["orientation"] == "repellor_to_attractor");
  const Json& s = j["mu_samples"][0];
  CHECK(s["mu"] == -0.1);
  CHECK(s["index"]["class"] == "diverges_to_minus_infinity");
  CHECK(s["index"]["sign"] == -1);
  CHECK(s["stability"] == "repellor");
  CHECK(s["singularity_free"]["pass"] == true);
  CHECK(Json::parse(dump(j)) == j);
  CHECK(sweep_csv(rep).rfind("mu,index_sign,stability\n", 0) == 0);
}

TEST_CASE("reports are identical for any worker count") {
  const unsigned saved = worker_limit();
  set_worker_limit(1);
  const std::string a = dump(to_json(sweep(catalog("inv"), {-0.05, 0.05}, quick())));
  set_worker_limit(6);
  const std::string b = dump(to_json(sweep(catalog("inv"), {-0.05, 0.05}, quick())));
  set_worker_limit(saved);
  CHECK(a == b);
}

TEST_CASE("csv exports") {
  const auto e = index_at_infinity(catalog("rot"), 0.1);
  const std::string csv = flux_csv(e.evidence);
  CHECK(csv.rfind("r,phi,err\n2,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  TrajectoryControls c;
  c.t_max = 1.0;
  const auto t = integrate(catalog("rot"), 0.0, {2, 0}, Direction::Forward, c);
  CHECK(trajectory_csv(t).rfind("t,x,y\n0,2,0\n", 0) == 0);
  const Json ej = to_json(e);
  CHECK(ej["flux"].size() == 12);
}

TEST_CASE("atomic writes") {
  const fs::path dir = fs::temp_directory_path() / "hopfinf_report_test" / "nested";
  fs::remove_all(dir.parent_path());
  const fs::path file = dir / "out.json";
  write_file_atomic(file.string(), "first\n");
  write_file_atomic(file.string(), "second\n");
  CHECK(slurp(file) == "second\n");
  CHECK(!fs::exists(file.string() + ".tmp"));
  fs::remove_all(dir.parent_path());
}

}
