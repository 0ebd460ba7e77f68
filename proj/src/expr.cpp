#include "hopfinf/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <utility>

#include "hopfinf/error.hpp"

namespace hopfinf {

namespace {

NodePtr make_node(Op op, std::vector<NodePtr> args = {}, double value = 0.0, int exponent = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->exponent = exponent;
  n->args = std::move(args);
  return n;
}

// ---------------------------------------------------------------------------
// Tokenizer

enum class Tok { Number, Ident, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  std::size_t offset = 0;
  double number = 0.0;

  bool is(char c) const { return kind == Tok::Symbol && text.size() == 1 && text[0] == c; }
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> tokenize(std::string_view s, std::size_t base) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.offset = base + i;
    if (is_digit(c) || (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
      std::size_t j = i;
      while (j < s.size() && is_digit(s[j])) ++j;
      if (j < s.size() && s[j] == '.') {
        ++j;
        while (j < s.size() && is_digit(s[j])) ++j;
      }
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && is_digit(s[k])) {
          while (k < s.size() && is_digit(s[k])) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = s.substr(i, j - i);
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
        throw ParseError("malformed number '" + std::string(t.text) + "'", t.offset);
      }
      i = j;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      t.kind = Tok::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (std::string_view("+-*/^(),;=").find(c) != std::string_view::npos) {
      t.kind = Tok::Symbol;
      t.text = s.substr(i, 1);
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", t.offset);
    }
    out.push_back(t);
  }
  Token end;
  end.kind = Tok::End;
  end.offset = base + s.size();
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool at_end() const { return peek().kind == Tok::End; }

  void expect(char c, const char* what) {
    if (!peek().is(c)) throw ParseError(std::string("expected ") + what, peek().offset);
    ++pos_;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    while (peek().is('+') || peek().is('-')) {
      const Token op = next();
      NodePtr rhs = operand_after(op, &Parser::term);
      lhs = make_node(op.is('+') ? Op::Add : Op::Sub, {lhs, rhs});
    }
    return lhs;
  }

 private:
  using Rule = NodePtr (Parser::*)();

  // A binary operator with nothing usable after it is reported at the operator.
  NodePtr operand_after(const Token& op, Rule rule) {
    const Token& t = peek();
    const bool starts_operand = t.kind == Tok::Number || t.kind == Tok::Ident || t.is('(') || t.is('-');
    if (!starts_operand) {
      throw ParseError("expected operand after '" + std::string(op.text) + "'", op.offset);
    }
    return (this->*rule)();
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (peek().is('*') || peek().is('/')) {
      const Token op = next();
      NodePtr rhs = operand_after(op, &Parser::unary);
      lhs = make_node(op.is('*') ? Op::Mul : Op::Div, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr unary() {
    if (peek().is('-')) {
      const Token op = next();
      return make_node(Op::Neg, {operand_after(op, &Parser::unary)});
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    while (peek().is('^')) {
      const Token op = next();
      base = make_node(Op::Pow, {base}, 0.0, integer_exponent(op));
    }
    return base;
  }

  int integer_exponent(const Token& caret) {
    const bool paren = peek().is('(');
    if (paren) ++pos_;
    bool negative = false;
    if (peek().is('-')) {
      negative = true;
      ++pos_;
    }
    const Token& t = peek();
    if (t.kind != Tok::Number) {
      throw ParseError("expected integer exponent after '^'", caret.offset);
    }
    int n = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw ParseError("exponent must be an integer", t.offset);
    }
    ++pos_;
    if (paren) expect(')', "')' closing exponent");
    return negative ? -n : n;
  }

  NodePtr primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number:
        ++pos_;
        return make_node(Op::Const, {}, t.number);
      case Tok::Ident:
        ++pos_;
        return identifier(t);
      case Tok::Symbol:
        if (t.is('(')) {
          ++pos_;
          NodePtr inner = expression();
          expect(')', "')'");
          return inner;
        }
        throw ParseError("unexpected '" + std::string(t.text) + "'", t.offset);
      case Tok::End:
        break;
    }
    throw ParseError("unexpected end of expression", t.offset);
  }

  NodePtr identifier(const Token& t) {
    const std::string_view name = t.text;
    if (name == "x") return make_node(Op::X);
    if (name == "y") return make_node(Op::Y);
    if (name == "mu") return make_node(Op::Mu);
    if (name == "r2") return make_node(Op::R2);

    Op fn;
    int arity = 1;
    if (name == "sin") fn = Op::Sin;
    else if (name == "cos") fn = Op::Cos;
    else if (name == "exp") fn = Op::Exp;
    else if (name == "sqrt") fn = Op::Sqrt;
    else if (name == "atan2") { fn = Op::Atan2; arity = 2; }
    else throw ParseError("unknown identifier '" + std::string(name) + "'", t.offset);

    expect('(', "'(' after function name");
    std::vector<NodePtr> args;
    args.push_back(expression());
    for (int k = 1; k < arity; ++k) {
      expect(',', "',' between arguments");
      args.push_back(expression());
    }
    expect(')', "')' closing argument list");
    return make_node(fn, std::move(args));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

std::string number_text(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void print(const Node& n, std::string& out) {
  auto binary = [&](const char* sym) {
    out += '(';
    print(*n.args[0], out);
    out += sym;
    print(*n.args[1], out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) out += ", ";
      print(*n.args[i], out);
    }
    out += ')';
  };
  switch (n.op) {
    case Op::Const:
      if (std::signbit(n.value)) {
        out += "(-" + number_text(-n.value) + ")";
      } else {
        out += number_text(n.value);
      }
      break;
    case Op::X: out += 'x'; break;
    case Op::Y: out += 'y'; break;
    case Op::Mu: out += "mu"; break;
    case Op::R2: out += "r2"; break;
    case Op::Neg:
      out += "(-";
      print(*n.args[0], out);
      out += ')';
      break;
    case Op::Add: binary(" + "); break;
    case Op::Sub: binary(" - "); break;
    case Op::Mul: binary("*"); break;
    case Op::Div: binary("/"); break;
    case Op::Pow:
      out += '(';
      print(*n.args[0], out);
      out += n.exponent < 0 ? "^(" + std::to_string(n.exponent) + ")" : "^" + std::to_string(n.exponent);
      out += ')';
      break;
    case Op::Sin: call("sin"); break;
    case Op::Cos: call("cos"); break;
    case Op::Exp: call("exp"); break;
    case Op::Sqrt: call("sqrt"); break;
    case Op::Atan2: call("atan2"); break;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : Expr(make_node(Op::Const, {}, 0.0)) {}

Expr::Expr(NodePtr root) : root_(std::move(root)) {
  int depth = 0;
  auto emit = [&](auto&& self, const Node& n) -> void {
    for (const auto& a : n.args) self(self, *a);
    program_.push_back({n.op, n.exponent, n.value});
    if (n.op == Op::Mu) uses_mu_ = true;
    depth += 1 - static_cast<int>(n.args.size());
    max_stack_ = std::max(max_stack_, depth);
  };
  emit(emit, *root_);
}

Expr Expr::constant(double v) { return Expr(make_node(Op::Const, {}, v)); }
Expr Expr::var_x() { return Expr(make_node(Op::X)); }
Expr Expr::var_y() { return Expr(make_node(Op::Y)); }
Expr Expr::var_mu() { return Expr(make_node(Op::Mu)); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(make_node(Op::Add, {a.root_, b.root_})); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make_node(Op::Sub, {a.root_, b.root_})); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make_node(Op::Mul, {a.root_, b.root_})); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make_node(Op::Div, {a.root_, b.root_})); }
Expr operator-(const Expr& a) { return Expr(make_node(Op::Neg, {a.root_})); }

std::string Expr::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

template <class T>
T Expr::run(T x, T y, double mu) const {
  constexpr int kInline = 48;
  std::array<T, kInline> inline_stack;
  std::vector<T> heap_stack;
  T* st = inline_stack.data();
  if (max_stack_ > kInline) {
    heap_stack.resize(static_cast<std::size_t>(max_stack_));
    st = heap_stack.data();
  }
  st[0] = T(0.0);
  int sp = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const: st[sp++] = T(in.value); break;
      case Op::X: st[sp++] = x; break;
      case Op::Y: st[sp++] = y; break;
      case Op::Mu: st[sp++] = T(mu); break;
      case Op::R2: st[sp++] = x * x + y * y; break;
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Add: --sp; st[sp - 1] = st[sp - 1] + st[sp]; break;
      case Op::Sub: --sp; st[sp - 1] = st[sp - 1] - st[sp]; break;
      case Op::Mul: --sp; st[sp - 1] = st[sp - 1] * st[sp]; break;
      case Op::Div: --sp; st[sp - 1] = st[sp - 1] / st[sp]; break;
      case Op::Pow: st[sp - 1] = powi(st[sp - 1], in.exponent); break;
      case Op::Sin: { using std::sin; st[sp - 1] = sin(st[sp - 1]); break; }
      case Op::Cos: { using std::cos; st[sp - 1] = cos(st[sp - 1]); break; }
      case Op::Exp: { using std::exp; st[sp - 1] = exp(st[sp - 1]); break; }
      case Op::Sqrt: { using std::sqrt; st[sp - 1] = sqrt(st[sp - 1]); break; }
      case Op::Atan2: {
        using std::atan2;
        --sp;
        st[sp - 1] = atan2(st[sp - 1], st[sp]);
        break;
      }
    }
  }
  return st[0];
}

template double Expr::run<double>(double, double, double) const;
template Dual Expr::run<Dual>(Dual, Dual, double) const;

// ---------------------------------------------------------------------------
// Entry points

Expr parse_expr(std::string_view text, std::size_t base_offset) {
  Parser p(tokenize(text, base_offset));
  if (p.at_end()) throw ParseError("empty expression", base_offset);
  NodePtr root = p.expression();
  if (!p.at_end()) {
    throw ParseError("unexpected '" + std::string(p.peek().text) + "'", p.peek().offset);
  }
  return Expr(root);
}

FieldSource parse_field_source(std::string_view source) {
  Parser p(tokenize(source, 0));
  std::optional<Expr> f;
  std::optional<Expr> g;
  while (!p.at_end()) {
    if (p.peek().is(';')) {
      p.next();
      continue;
    }
    const Token name = p.next();
    if (name.kind != Tok::Ident || (name.text != "f" && name.text != "g")) {
      throw ParseError("expected 'f =' or 'g ='", name.offset);
    }
    p.expect('=', "'=' after component name");
    if (p.at_end() || p.peek().is(';')) throw ParseError("empty expression", p.peek().offset);
    Expr e(p.expression());
    auto& slot = name.text == "f" ? f : g;
    if (slot) throw ParseError("component '" + std::string(name.text) + "' defined twice", name.offset);
    slot = std::move(e);
    if (!p.at_end() && !p.peek().is(';')) {
      throw ParseError("unexpected '" + std::string(p.peek().text) + "'", p.peek().offset);
    }
  }
  if (!f) throw ParseError("missing component 'f'", source.size());
  if (!g) throw ParseError("missing component 'g'", source.size());
  return {*f, *g};
}

}  // namespace hopfinf
