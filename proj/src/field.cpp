#include "hopfinf/field.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "hopfinf/error.hpp"

namespace hopfinf {

DomainViolation::DomainViolation(Vec2 z, double sigma)
    : Error("point (" + std::to_string(z.x) + ", " + std::to_string(z.y) +
            ") is not outside the excluded disk of radius " + std::to_string(sigma)),
      point_(z) {}

NonFiniteValue::NonFiniteValue(Vec2 z)
    : Error("non-finite field value at (" + std::to_string(z.x) + ", " + std::to_string(z.y) + ")"),
      point_(z) {}

PlanarField::PlanarField(std::string name, Expr f, Expr g, double sigma, ParamMode mode)
    : name_(std::move(name)), f_(std::move(f)), g_(std::move(g)), sigma_(sigma), mode_(mode) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("sigma must be positive, got " + std::to_string(sigma));
  }
  if (mode_ == ParamMode::Family && (f_.uses_mu() || g_.uses_mu())) {
    throw InvalidArgument("family-mode field '" + name_ +
                          "' must not reference mu; the tool adds mu*z itself");
  }
}

Vec2 PlanarField::eval(Vec2 z, double mu) const {
  if (!in_domain(z)) throw DomainViolation(z, sigma_);
  Vec2 v{f_.eval(z.x, z.y, mu), g_.eval(z.x, z.y, mu)};
  if (mode_ == ParamMode::Family) v = v + mu * z;
  if (prefactor_) v = v * (*prefactor_)(mu);
  if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw NonFiniteValue(z);
  return v;
}

Jet PlanarField::jet(Vec2 z, double mu) const {
  if (!in_domain(z)) throw DomainViolation(z, sigma_);
  const Dual x(z.x, 1.0, 0.0);
  const Dual y(z.y, 0.0, 1.0);
  const Dual fd = f_.eval(x, y, mu);
  const Dual gd = g_.eval(x, y, mu);
  Jet j{{fd.v, gd.v}, {fd.dx, fd.dy, gd.dx, gd.dy}};
  if (mode_ == ParamMode::Family) {
    j.value = j.value + mu * z;
    j.jacobian = j.jacobian + Mat2::identity() * mu;
  }
  if (prefactor_) {
    const double c = (*prefactor_)(mu);
    j.value = j.value * c;
    j.jacobian = j.jacobian * c;
  }
  if (!std::isfinite(j.value.x) || !std::isfinite(j.value.y) || !j.jacobian.finite()) {
    throw NonFiniteValue(z);
  }
  return j;
}

std::string PlanarField::source() const {
  return "f = " + f_.to_string() + "; g = " + g_.to_string();
}

namespace {

// Expressions of the full member X_mu, whatever the mode.
std::pair<Expr, Expr> member_exprs(const PlanarField& fld) {
  if (fld.mode() == ParamMode::Family) {
    return {fld.f() + Expr::var_mu() * Expr::var_x(), fld.g() + Expr::var_mu() * Expr::var_y()};
  }
  return {fld.f(), fld.g()};
}

Expr substitute_mu(const NodePtr& n, const Expr& replacement) {
  if (n->op == Op::Mu) return replacement;
  if (n->args.empty()) return Expr(n);
  auto copy = std::make_shared<Node>(*n);
  for (auto& a : copy->args) a = substitute_mu(a, replacement).root();
  return Expr(copy);
}

}  // namespace

PlanarField PlanarField::scaled(const Expr& h, std::string name) const {
  if (prefactor_) throw InvalidArgument("field already carries a mu-dependent prefactor");
  auto [f, g] = member_exprs(*this);
  return PlanarField(std::move(name), h * f, h * g, sigma_, ParamMode::General);
}

PlanarField PlanarField::scaled_by_mu(std::function<double(double)> c, std::string name) const {
  if (prefactor_) throw InvalidArgument("field already carries a mu-dependent prefactor");
  PlanarField out(std::move(name), f_, g_, sigma_, mode_);
  out.prefactor_ = std::make_shared<const std::function<double(double)>>(std::move(c));
  return out;
}

PlanarField PlanarField::shifted(double shift, std::string name) const {
  if (prefactor_) throw InvalidArgument("field already carries a mu-dependent prefactor");
  auto [f, g] = member_exprs(*this);
  const Expr mu_shifted = Expr::var_mu() - Expr::constant(shift);
  return PlanarField(std::move(name), substitute_mu(f.root(), mu_shifted),
                     substitute_mu(g.root(), mu_shifted), sigma_, ParamMode::General);
}

PlanarField parse_field(std::string_view source, double sigma, std::string name, ParamMode mode) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive, got " + std::to_string(sigma));
  FieldSource src = parse_field_source(source);
  return PlanarField(std::move(name), std::move(src.f), std::move(src.g), sigma, mode);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

PlanarField parse_field_definition(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("field definition line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key != "name" && key != "sigma" && key != "f" && key != "g" && key != "mode") {
      throw InvalidArgument("field definition line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    kv[key] = trim(std::string_view(t).substr(eq + 1));
  }
  for (const char* required : {"f", "g"}) {
    if (!kv.count(required)) throw InvalidArgument(std::string("field definition missing '") + required + "='");
  }
  double sigma = 1.0;
  if (kv.count("sigma")) {
    const std::string& s = kv["sigma"];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), sigma);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidArgument("bad sigma '" + s + "'");
  }
  ParamMode mode = ParamMode::Family;
  if (kv.count("mode")) {
    if (kv["mode"] == "general") mode = ParamMode::General;
    else if (kv["mode"] != "family") throw InvalidArgument("mode must be 'family' or 'general'");
  }
  const std::string name = kv.count("name") ? kv["name"] : std::string("user");
  return parse_field("f = " + kv["f"] + "; g = " + kv["g"], sigma, name, mode);
}

PlanarField load_field_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open field file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_field_definition(buf.str());
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, PlanarField> user;
};

Registry& registry() {
  static Registry r;
  return r;
}

const std::map<std::string, std::string>& builtin_sources() {
  static const std::map<std::string, std::string> m = {
      {"rot", "f = -y; g = x"},
      {"focus", "f = -x - y; g = x - y"},
      {"inv", "f = -y - x/r2; g = x - y/r2"},
      {"rotinv", "f = -y + x/r2; g = x + y/r2"},
  };
  return m;
}

}  // namespace

PlanarField catalog(const std::string& name) {
  const auto& builtins = builtin_sources();
  if (auto it = builtins.find(name); it != builtins.end()) {
    return parse_field(it->second, 1.0, name);
  }
  {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    if (auto it = reg.user.find(name); it != reg.user.end()) return it->second;
  }
  std::string list;
  for (const auto& n : catalog_names()) list += (list.empty() ? "" : ", ") + n;
  throw UnknownName("unknown field '" + name + "' (available: " + list + ")");
}

void register_field(const PlanarField& field) {
  if (builtin_sources().count(field.name())) {
    throw InvalidArgument("cannot replace built-in field '" + field.name() + "'");
  }
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  reg.user.insert_or_assign(field.name(), field);
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& [n, _] : builtin_sources()) out.push_back(n);
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  for (const auto& [n, _] : reg.user) out.push_back(n);
  return out;
}

}  // namespace hopfinf
