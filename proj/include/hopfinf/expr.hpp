#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hopfinf/dual.hpp"

namespace hopfinf {

// Expression language for field components: reals, x, y, mu, r2 (= x^2+y^2),
// + - * /, integer powers, unary minus, parentheses, sin cos exp sqrt atan2.
// Precedence: ^ > unary minus > * / > + -, binary operators left-associative.

enum class Op : std::uint8_t {
  Const, X, Y, Mu, R2,
  Neg, Add, Sub, Mul, Div, Pow,
  Sin, Cos, Exp, Sqrt, Atan2,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int exponent = 0;    // Pow
  std::vector<NodePtr> args;
};

/// Immutable expression: AST for printing/composition plus a compiled postfix
/// program for evaluation.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(NodePtr root);

  static Expr constant(double v);
  static Expr var_x();
  static Expr var_y();
  static Expr var_mu();

  const NodePtr& root() const { return root_; }
  bool uses_mu() const { return uses_mu_; }

  double eval(double x, double y, double mu) const { return run<double>(x, y, mu); }
  Dual eval(Dual x, Dual y, double mu) const { return run<Dual>(x, y, mu); }

  /// Canonical text that parses back to an evaluation-identical tree.
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  struct Instr {
    Op op;
    int exponent;
    double value;
  };

  template <class T>
  T run(T x, T y, double mu) const;

  NodePtr root_;
  std::vector<Instr> program_;
  int max_stack_ = 0;
  bool uses_mu_ = false;
};

/// Parses a single scalar expression. Offsets in errors are relative to `text`
/// plus `base_offset`.
Expr parse_expr(std::string_view text, std::size_t base_offset = 0);

struct FieldSource {
  Expr f;
  Expr g;
};

/// Parses "f = ...; g = ..." (order free, each exactly once).
FieldSource parse_field_source(std::string_view source);

}  // namespace hopfinf
