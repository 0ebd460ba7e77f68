#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "hopfinf/bifurcation.hpp"
#include "hopfinf/error.hpp"
#include "hopfinf/format.hpp"
#include "hopfinf/parallel.hpp"
#include "hopfinf/portrait.hpp"
#include "hopfinf/report.hpp"

namespace hopfinf::cli {

namespace {

struct Options {
  // common
  std::string field;
  double sigma = 1.0;
  std::string mode = "family";
  std::string mu = "0";
  std::string out = ".";
  unsigned jobs = 0;
  std::uint64_t seed = 0;
  bool print_config = false;
  std::string config;

  // index
  double radii_first = 0.0;
  double radii_ratio = 2.0;
  int radii_count = 12;
  double threshold = 1e3;
  int tail_window = 4;
  double quad_rtol = 1e-12;
  double quad_atol = 1e-12;

  // stability of infinity
  int probes = 16;
  int angular_samples = 256;
  int min_circles = 3;
  double probe_tmax = 5000.0;
  double probe_rtol = 1e-8;
  double probe_atol = 1e-10;
  double escape_factor = 2.0;

  // spectral
  std::string spectral_class = "dissipative";
  std::string annulus;
  std::string grid = "40:64";
  std::string mu_interval;

  // classify
  std::string point;
  std::string direction = "forward";
  double rtol = 1e-9;
  double atol = 1e-12;
  double tmax = 1000.0;
  double escape_radius = 0.0;
  double inner_radius = 0.0;
  std::string parametrization = "time";

  // sweep / locate / audit
  bool no_locate = false;
  double tol = 1e-6;
  int locate_budget = 200;
  std::vector<std::string> audit;
  std::string scale;
  std::string bracket;
  std::string theorem = "Thm2.4";
  double eps0 = 0.0;

  // portrait
  double window = 0.0;
  int size = 640;
};

std::vector<double> split_numbers(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidArgument("cannot read " + what + " from '" + text + "'");
    }
  }
  return out;
}

std::vector<double> parse_mu_list(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto v = split_numbers(text, ':', "mu range lo:hi:n");
    if (v.size() != 3 || v[2] < 2 || v[2] != std::floor(v[2]) || !(v[1] > v[0])) {
      throw InvalidArgument("mu range must be lo:hi:n with lo < hi and integer n >= 2");
    }
    const int n = static_cast<int>(v[2]);
    std::vector<double> out;
    for (int k = 0; k < n; ++k) {
      // Rounded to 15 digits so -0.2:0.2:9 gives -0.15 rather than -0.15000000000000002.
      const double t = static_cast<double>(k) / (n - 1);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.15g", v[0] * (1.0 - t) + v[1] * t);
      out.push_back(std::strtod(buf, nullptr));
    }
    return out;
  }
  return split_numbers(text, ',', "mu values");
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
  const auto v = split_numbers(text, text.find(':') != std::string::npos ? ':' : ',', what);
  if (v.size() != 2) throw InvalidArgument(what + " must have the form a:b");
  return {v[0], v[1]};
}

PlanarField resolve_field(const Options& o) {
  if (o.field.empty()) throw InvalidArgument("--field is required");
  const ParamMode mode = o.mode == "general" ? ParamMode::General : ParamMode::Family;
  if (o.field.find('=') != std::string::npos && o.field.find(';') != std::string::npos) {
    return parse_field(o.field, o.sigma, "inline", mode);
  }
  const auto names = catalog_names();
  if (std::find(names.begin(), names.end(), o.field) != names.end()) return catalog(o.field);
  if (std::filesystem::exists(o.field)) return load_field_file(o.field);
  return catalog(o.field);  // throws with the list of known names
}

IndexControls index_controls(const Options& o) {
  IndexControls c;
  c.schedule = {o.radii_first, o.radii_ratio, o.radii_count};
  c.divergence_threshold = o.threshold;
  c.tail_window = o.tail_window;
  c.quadrature.rel_tol = o.quad_rtol;
  c.quadrature.abs_tol = o.quad_atol;
  return c;
}

StabilityControls stability_controls(const Options& o) {
  StabilityControls c;
  c.circles = {o.radii_first, o.radii_ratio, o.radii_count};
  c.angular_samples = o.angular_samples;
  c.min_circles = o.min_circles;
  c.probes = o.probes;
  c.seed = o.seed;
  c.escape_factor = o.escape_factor;
  c.trajectory.t_max = o.probe_tmax;
  c.trajectory.rtol = o.probe_rtol;
  c.trajectory.atol = o.probe_atol;
  return c;
}

BifurcationControls bifurcation_controls(const Options& o, const PlanarField& field) {
  BifurcationControls c;
  c.index = index_controls(o);
  c.stability = stability_controls(o);
  if (!o.annulus.empty()) {
    auto [a, b] = parse_pair(o.annulus, "annulus");
    c.annulus = {a, b};
  }
  c.annulus = effective_annulus(field, c);
  auto [nr, nt] = parse_pair(o.grid, "grid");
  c.spectral_grid = {static_cast<int>(nr), static_cast<int>(nt)};
  c.locate = !o.no_locate;
  c.locate_tol = o.tol;
  c.locate_budget = o.locate_budget;
  c.eps0 = o.eps0;
  for (const auto& t : o.audit) c.audit.push_back(parse_theorem(t));
  return c;
}

struct Output {
  std::filesystem::path dir;
  std::ostream& out;

  void write(const std::string& name, const std::string& content) const {
    write_file_atomic((dir / name).string(), content);
  }
  void report(const std::string& stem, const Json& j, const std::string& text) const {
    write(stem + ".json", dump(j));
    write(stem + ".txt", text);
    out << text;
  }
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--field,--family", o.field, "Catalog name, field definition file, or inline \"f = ...; g = ...\"");
  sub->add_option("--sigma", o.sigma, "Disk radius for inline fields")->capture_default_str();
  sub->add_option("--mode", o.mode, "Inline field mode")
      ->check(CLI::IsMember({"family", "general"}))
      ->capture_default_str();
  sub->add_option("--mu", o.mu, "Parameter: a value, a list a,b,c, or a range lo:hi:n")->capture_default_str();
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "Worker thread cap (0 = automatic)")->capture_default_str();
  sub->add_option("--seed", o.seed, "Seed for probe angles")->capture_default_str();
  sub->add_flag("--print-config", o.print_config, "Print the effective configuration and exit")->configurable(false);
  sub->add_option("--config", o.config, "File of key=value overrides, as printed by --print-config")
      ->configurable(false);
}

void add_index(CLI::App* sub, Options& o) {
  sub->add_option("--radii-first", o.radii_first, "First scheduled radius (0 = 2*sigma)")->capture_default_str();
  sub->add_option("--radii-ratio", o.radii_ratio, "Ratio between scheduled radii")->capture_default_str();
  sub->add_option("--radii-count", o.radii_count, "Number of scheduled radii")->capture_default_str();
  sub->add_option("--threshold", o.threshold, "Flux magnitude treated as divergent")->capture_default_str();
  sub->add_option("--tail-window", o.tail_window, "Differences examined at the tail")->capture_default_str();
  sub->add_option("--quad-rtol", o.quad_rtol, "Quadrature relative tolerance")->capture_default_str();
  sub->add_option("--quad-atol", o.quad_atol, "Quadrature absolute tolerance")->capture_default_str();
}

void add_stability(CLI::App* sub, Options& o) {
  sub->add_option("--probes", o.probes, "Escape probes per stability certificate")->capture_default_str();
  sub->add_option("--angular-samples", o.angular_samples, "Samples per transversal circle")->capture_default_str();
  sub->add_option("--min-circles", o.min_circles, "Transversal circles required")->capture_default_str();
  sub->add_option("--probe-tmax", o.probe_tmax, "Probe integration budget")->capture_default_str();
  sub->add_option("--probe-rtol", o.probe_rtol, "Probe relative tolerance")->capture_default_str();
  sub->add_option("--probe-atol", o.probe_atol, "Probe absolute tolerance")->capture_default_str();
  sub->add_option("--escape-factor", o.escape_factor, "Probe escape radius over the outermost circle")
      ->capture_default_str();
}

void add_spectral_grid(CLI::App* sub, Options& o) {
  sub->add_option("--annulus", o.annulus, "Annulus r_in:r_out (default 1.1*sigma:50*sigma)")->capture_default_str();
  sub->add_option("--grid", o.grid, "Polar grid n_r:n_theta")->capture_default_str();
}

int cmd_spectral(const Options& o, const Output& io) {
  const PlanarField field = resolve_field(o);
  const auto c = bifurcation_controls(o, field);
  SpectralClass cls{parse_spectral_class(o.spectral_class)};
  if (cls.kind == SpectralClassKind::DetPositiveOnInterval) {
    if (o.mu_interval.empty()) throw InvalidArgument("--mu-interval lo:hi is required for this class");
    auto [lo, hi] = parse_pair(o.mu_interval, "mu interval");
    cls = SpectralClass::det_positive_on(lo, hi);
  }
  const double mu = parse_mu_list(o.mu).front();
  const auto rep = certify_class(field, mu, c.annulus, c.spectral_grid, cls);
  io.report("spectral", to_json(rep), summary(rep));
  return rep.verdict == SpectralVerdict::CertifiedOnSample ? 0 : 2;
}

int cmd_index(const Options& o, const Output& io) {
  const PlanarField field = resolve_field(o);
  const double mu = parse_mu_list(o.mu).front();
  const auto est = index_at_infinity(field, mu, index_controls(o));
  Json j{{"field", field.name()}, {"mu", mu}};
  j["index"] = to_json(est);
  io.write("flux.csv", flux_csv(est.evidence));
  io.report("index", j, summary(est));
  return 0;
}

int cmd_classify(const Options& o, const Output& io) {
  const PlanarField field = resolve_field(o);
  const double mu = parse_mu_list(o.mu).front();
  if (o.point.empty()) {
    const auto st = certify_infinity_stability(field, mu, stability_controls(o));
    Json j{{"field", field.name()}, {"mu", mu}};
    j["stability"] = to_json(st);
    io.report("stability", j, summary(st));
    return 0;
  }
  auto [x, y] = parse_pair(o.point, "point");
  TrajectoryControls tc;
  tc.rtol = o.rtol;
  tc.atol = o.atol;
  tc.t_max = o.tmax;
  tc.escape_radius = o.escape_radius;
  tc.inner_radius = o.inner_radius;
  tc.parametrization = o.parametrization == "orbit" ? Parametrization::Orbit : Parametrization::Time;
  const Direction dir = o.direction == "backward" ? Direction::Backward : Direction::Forward;
  const Trajectory traj = integrate(field, mu, {x, y}, dir, tc);
  const auto outcome = classify(traj, field, mu, dir, tc);
  Json j{{"field", field.name()}, {"mu", mu}};
  j["trajectory"] = to_json(outcome);
  io.write("trajectory.csv", trajectory_csv(traj));
  io.report("classify", j, summary(outcome));
  return 0;
}

int cmd_sweep(const Options& o, const Output& io) {
  const PlanarField field = resolve_field(o);
  const auto c = bifurcation_controls(o, field);
  const auto mus = parse_mu_list(o.mu);
  if (!o.scale.empty()) {
    const auto cmp = scaling_family_check(field, o.scale == "h_mu" ? "" : o.scale, mus, c);
    io.write("sweep.csv", sweep_csv(cmp.scaled));
    io.report("scaling", to_json(cmp), summary(cmp));
    return cmp.pass ? 0 : 2;
  }
  const auto rep = sweep(field, mus, c);
  io.write("sweep.csv", sweep_csv(rep));
  io.report("sweep", to_json(rep), summary(rep));
  return rep.verdict.kind == BifurcationVerdictKind::HopfAtInfinityDetected ? 0 : 2;
}

int cmd_locate(const Options& o, const Output& io) {
  const PlanarField field = resolve_field(o);
  const auto c = bifurcation_controls(o, field);
  if (o.bracket.empty()) throw InvalidArgument("--bracket lo:hi is required");
  auto [lo, hi] = parse_pair(o.bracket, "bracket");
  const auto res = locate_bifurcation(field, lo, hi, o.tol, c);
  Json j{{"field", field.name()}};
  j["locate"] = to_json(res);
  io.report("locate", j, summary(res));
  return 0;
}

int cmd_audit(const Options& o, const Output& io) {
  const PlanarField field = resolve_field(o);
  const auto c = bifurcation_controls(o, field);
  const auto rows = audit_hypotheses(field, parse_mu_list(o.mu), parse_theorem(o.theorem), c);
  Json j{{"field", field.name()}, {"theorem", to_string(parse_theorem(o.theorem))}};
  Json arr = Json::array();
  bool violated = false;
  for (const auto& r : rows) {
    arr.push_back(to_json(r));
    violated = violated || r.status == HypothesisStatus::Violated;
  }
  j["audit"] = std::move(arr);
  io.report("audit", j, summary(rows));
  return violated ? 2 : 0;
}

int cmd_portrait(const Options& o, const Output& io) {
  const PlanarField field = resolve_field(o);
  PortraitOptions po;
  po.mu = parse_mu_list(o.mu).front();
  po.window = o.window;
  po.size = o.size;
  const auto p = render_portrait(field, po);
  io.write("portrait.svg", p.svg);
  std::ostringstream os;
  os << "portrait of " << field.name() << " at mu=" << fmt(po.mu) << " written to "
     << (io.dir / "portrait.svg").string() << "\n";
  for (const auto& c : p.cycles) {
    os << "  flux changes sign at r=" << fmt(c.flux_root);
    if (c.closed) os << "; periodic orbit, mean radius " << fmt(c.loop.mean_radius) << ", period " << fmt(c.loop.period);
    os << "\n";
  }
  io.out << os.str();
  return 0;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Expands `--config FILE` into command-line arguments. Lines are key=value as
// printed by --print-config; options already given on the command line win.
void apply_config_file(CLI::App& app, std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return;
  CLI::App* sub = nullptr;
  for (const auto& a : args) {
    if ((sub = app.get_subcommand_no_throw(a)) != nullptr) break;
  }
  if (sub == nullptr) throw CLI::RequiredError("a subcommand before --config");

  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  auto given = [&](const std::string& key) {
    for (const auto& a : args) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ConversionError("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw CLI::ConversionError("unknown config key '" + key + "' for " + sub->get_name());
    if (!opt->get_configurable() || given(key) || value.empty()) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Hopf bifurcation at infinity for planar vector field families X_mu = X + mu*z"};
  app.name("hopfinf");
  app.require_subcommand(1);

  auto* spectral = app.add_subcommand("spectral", "Certify a Jacobian spectral class on an annulus");
  add_common(spectral, o);
  add_spectral_grid(spectral, o);
  spectral->add_option("--class", o.spectral_class,
                       "dissipative | positive_determinant | free_real_eigenvalues | det_positive_on_interval")
      ->capture_default_str();
  spectral->add_option("--mu-interval", o.mu_interval, "Interval lo:hi for det_positive_on_interval");

  auto* index = app.add_subcommand("index", "Index at infinity from the flux through growing circles");
  add_common(index, o);
  add_index(index, o);

  auto* cls = app.add_subcommand("classify", "Classify a trajectory (--point) or the stability of infinity");
  add_common(cls, o);
  add_index(cls, o);
  add_stability(cls, o);
  cls->add_option("--point", o.point, "Initial point x:y; omit to certify the stability of infinity");
  cls->add_option("--direction", o.direction, "forward | backward")
      ->check(CLI::IsMember({"forward", "backward"}))
      ->capture_default_str();
  cls->add_option("--rtol", o.rtol, "Relative tolerance")->capture_default_str();
  cls->add_option("--atol", o.atol, "Absolute tolerance")->capture_default_str();
  cls->add_option("--tmax", o.tmax, "Integration budget")->capture_default_str();
  cls->add_option("--escape-radius", o.escape_radius, "Escape radius (0 = 1000*sigma)")->capture_default_str();
  cls->add_option("--inner-radius", o.inner_radius, "Inner stop radius (0 = 1.01*sigma)")->capture_default_str();
  cls->add_option("--param", o.parametrization, "time | orbit")
      ->check(CLI::IsMember({"time", "orbit"}))
      ->capture_default_str();

  auto* sw = app.add_subcommand("sweep", "Sweep mu and detect a Hopf bifurcation at infinity");
  add_common(sw, o);
  add_index(sw, o);
  add_stability(sw, o);
  add_spectral_grid(sw, o);
  sw->add_flag("--no-locate", o.no_locate, "Skip bisection inside the detected bracket");
  sw->add_option("--tol", o.tol, "Bisection tolerance")->capture_default_str();
  sw->add_option("--locate-budget", o.locate_budget, "Bisection iteration budget")->capture_default_str();
  sw->add_option("--audit", o.audit, "Theorems to audit: Thm2.4, Thm3.5, Prop4.2");
  sw->add_option("--eps0", o.eps0, "Upper end of the determinant interval (0 = largest positive mu)")
      ->capture_default_str();
  sw->add_option("--scale", o.scale, "Compare with h*X_mu for a DSL scalar h, or h_mu for 1/mu");

  auto* loc = app.add_subcommand("locate", "Bisect for the parameter where infinity changes stability");
  add_common(loc, o);
  add_index(loc, o);
  add_stability(loc, o);
  loc->add_option("--bracket", o.bracket, "Bracket lo:hi with opposite stability at the ends");
  loc->add_option("--tol", o.tol, "Bracket width at termination")->capture_default_str();
  loc->add_option("--locate-budget", o.locate_budget, "Bisection iteration budget")->capture_default_str();

  auto* aud = app.add_subcommand("audit", "Audit the hypotheses of a theorem on sampled mu");
  add_common(aud, o);
  add_index(aud, o);
  add_spectral_grid(aud, o);
  aud->add_option("--theorem", o.theorem, "Thm2.4 | Thm3.5 | Prop4.2")->capture_default_str();
  aud->add_option("--eps0", o.eps0, "Upper end of the determinant interval (0 = largest positive mu)")
      ->capture_default_str();

  auto* por = app.add_subcommand("portrait", "Write an SVG phase portrait");
  add_common(por, o);
  por->add_option("--window", o.window, "Half-width of the plotted square (0 = 12*sigma)")->capture_default_str();
  por->add_option("--size", o.size, "Image size in pixels")->capture_default_str();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    apply_config_file(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  CLI::App* active = app.get_subcommands().front();
  if (o.print_config) {
    out << active->config_to_str(true, false);
    return 0;
  }

  try {
    if (o.jobs > 0) set_worker_limit(o.jobs);
    const Output io{std::filesystem::path(o.out), out};
    const std::string name = active->get_name();
    if (name == "spectral") return cmd_spectral(o, io);
    if (name == "index") return cmd_index(o, io);
    if (name == "classify") return cmd_classify(o, io);
    if (name == "sweep") return cmd_sweep(o, io);
    if (name == "locate") return cmd_locate(o, io);
    if (name == "audit") return cmd_audit(o, io);
    if (name == "portrait") return cmd_portrait(o, io);
    err << "error: unknown command " << name << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hopfinf::cli
