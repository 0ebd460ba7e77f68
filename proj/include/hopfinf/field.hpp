#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hopfinf/expr.hpp"
#include "hopfinf/geometry.hpp"

namespace hopfinf {

/// Value and exact Jacobian of a field at a point.
struct Jet {
  Vec2 value;
  Mat2 jacobian;
};

/// How the parameter enters the field.
enum class ParamMode {
  /// X_mu(z) = X(z) + mu*z; the base expressions must not reference mu.
  Family,
  /// The expressions reference mu directly; no structure is imposed.
  General,
};

/// Planar vector field on the exterior of the disk of radius sigma.
/// Immutable; eval and jet are safe to call concurrently.
class PlanarField {
 public:
  PlanarField(std::string name, Expr f, Expr g, double sigma, ParamMode mode = ParamMode::Family);

  const std::string& name() const { return name_; }
  double sigma() const { return sigma_; }
  ParamMode mode() const { return mode_; }
  bool is_family() const { return mode_ == ParamMode::Family && !prefactor_; }
  const Expr& f() const { return f_; }
  const Expr& g() const { return g_; }

  /// X_mu(z). Throws DomainViolation for ||z|| <= sigma and NonFiniteValue.
  Vec2 eval(Vec2 z, double mu) const;
  Jet jet(Vec2 z, double mu) const;

  bool in_domain(Vec2 z) const { return z.norm() > sigma_; }

  /// DSL text that reproduces the base expressions.
  std::string source() const;

  /// Field h(z, mu) * X_mu(z) in General mode.
  PlanarField scaled(const Expr& h, std::string name) const;
  /// Field c(mu) * X_mu(z); c may be discontinuous in mu.
  PlanarField scaled_by_mu(std::function<double(double)> c, std::string name) const;
  /// Field X_{mu - shift}, i.e. the family reparametrized so the flip moves to mu = shift.
  PlanarField shifted(double shift, std::string name) const;

 private:
  std::string name_;
  Expr f_;
  Expr g_;
  double sigma_;
  ParamMode mode_;
  std::shared_ptr<const std::function<double(double)>> prefactor_;
};

/// parse_field("f = -y; g = x", 1.0)
PlanarField parse_field(std::string_view source, double sigma, std::string name = "user",
                        ParamMode mode = ParamMode::Family);

/// Reads a definition file with lines `name=`, `sigma=`, `f=`, `g=` and an
/// optional `mode=family|general`. Blank lines and `#` comments are ignored.
PlanarField load_field_file(const std::string& path);
PlanarField parse_field_definition(std::string_view text);

/// Built-in fields: rot, focus, inv, rotinv. User registrations are process-wide.
PlanarField catalog(const std::string& name);
void register_field(const PlanarField& field);
std::vector<std::string> catalog_names();

}  // namespace hopfinf
