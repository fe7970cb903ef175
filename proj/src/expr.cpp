#include "bhv/expr.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

namespace bhv {

namespace detail {

enum class Kind { Number, Parameter, Coordinate, Binary, Negate, Call };

struct Node {
  Kind kind;
  double value = 0.0;                 // Number
  std::string name;                   // Parameter
  int index = -1;                     // Coordinate
  BinaryOp op = BinaryOp::Add;        // Binary
  UnaryFunc func = UnaryFunc::Sqrt;   // Call
  NodePtr a, b;                       // children
};

Expression wrap_node(NodePtr n) { return Expression(std::move(n)); }
const NodePtr& node_of(const Expression& e) { return e.node_; }

}  // namespace detail

using detail::Kind;
using detail::Node;
using detail::NodePtr;
using detail::node_of;
using detail::wrap_node;

double ParameterBinding::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw InvalidInput("unbound parameter '" + name + "'");
  return it->second;
}

ParameterBinding ParameterBinding::merged_with(const ParameterBinding& other) const {
  ParameterBinding out = *this;
  for (const auto& [name, value] : other.values_) {
    auto it = out.values_.find(name);
    if (it != out.values_.end() && it->second != value)
      throw InvalidInput("parameter '" + name + "' bound to conflicting values");
    out.values_[name] = value;
  }
  return out;
}

CoordinateSystem::CoordinateSystem(std::vector<std::string> names)
    : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    for (std::size_t j = i + 1; j < names_.size(); ++j)
      if (names_[i] == names_[j])
        throw InvalidInput("duplicate coordinate name '" + names_[i] + "'");
}

CoordinateSystem CoordinateSystem::ambient(int surface_dim) {
  if (surface_dim < 1) throw InvalidInput("surface dimension must be >= 1");
  std::vector<std::string> names;
  for (int i = 1; i <= surface_dim; ++i) names.push_back("x" + std::to_string(i));
  names.push_back("z");
  return CoordinateSystem(std::move(names));
}

CoordinateSystem CoordinateSystem::chart(int dim) {
  if (dim < 1) throw InvalidInput("chart dimension must be >= 1");
  std::vector<std::string> names;
  for (int i = 1; i <= dim; ++i) names.push_back("u" + std::to_string(i));
  return CoordinateSystem(std::move(names));
}

std::optional<int> CoordinateSystem::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

Expression::Expression() : node_(std::make_shared<Node>(Node{Kind::Number})) {}
Expression::Expression(NodePtr node) : node_(std::move(node)) {}

Expression Expression::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = value;
  return Expression(std::move(n));
}

Expression Expression::parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Parameter;
  n->name = std::move(name);
  return Expression(std::move(n));
}

Expression Expression::coordinate(int index) {
  if (index < 0) throw InvalidInput("negative coordinate index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Coordinate;
  n->index = index;
  return Expression(std::move(n));
}

Expression Expression::binary(BinaryOp op, Expression lhs, Expression rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->a = std::move(lhs.node_);
  n->b = std::move(rhs.node_);
  return Expression(std::move(n));
}

Expression Expression::negate(Expression operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->a = std::move(operand.node_);
  return Expression(std::move(n));
}

Expression Expression::call(UnaryFunc f, Expression argument) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = f;
  n->a = std::move(argument.node_);
  return Expression(std::move(n));
}

bool Expression::is_number() const { return node_->kind == Kind::Number; }

double Expression::number_value() const {
  if (!is_number()) throw InvalidInput("expression is not a numeric literal");
  return node_->value;
}

namespace {

bool is_const(const Expression& e, double v) {
  return e.is_number() && e.number_value() == v;
}

// Integer exponents allow any base; everything else needs a positive base.
double checked_pow(double base, double exponent) {
  const bool integral =
      std::nearbyint(exponent) == exponent && std::abs(exponent) < 1e15;
  if (base > 0.0) return std::pow(base, exponent);
  if (integral) {
    if (base == 0.0 && exponent < 0.0)
      throw DomainError("zero base raised to a negative power");
    return std::pow(base, exponent);
  }
  throw DomainError("non-integer power of a non-positive base");
}

double apply_func(UnaryFunc f, double x) {
  switch (f) {
    case UnaryFunc::Sqrt:
      if (x <= 0.0) throw DomainError("sqrt of a non-positive value");
      return std::sqrt(x);
    case UnaryFunc::Exp:
      return std::exp(x);
    case UnaryFunc::Ln:
      if (x <= 0.0) throw DomainError("ln of a non-positive value");
      return std::log(x);
    case UnaryFunc::Sin:
      return std::sin(x);
    case UnaryFunc::Cos:
      return std::cos(x);
  }
  throw InvalidInput("unknown function kind");
}

const char* func_name(UnaryFunc f) {
  switch (f) {
    case UnaryFunc::Sqrt: return "sqrt";
    case UnaryFunc::Exp: return "exp";
    case UnaryFunc::Ln: return "ln";
    case UnaryFunc::Sin: return "sin";
    case UnaryFunc::Cos: return "cos";
  }
  return "?";
}

}  // namespace

Expression Expression::add(Expression a, Expression b) {
  if (a.is_number() && b.is_number()) {
    const double v = a.number_value() + b.number_value();
    if (std::isfinite(v)) return number(v);
  }
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return binary(BinaryOp::Add, std::move(a), std::move(b));
}

Expression Expression::sub(Expression a, Expression b) {
  if (a.is_number() && b.is_number()) {
    const double v = a.number_value() - b.number_value();
    if (std::isfinite(v)) return number(v);
  }
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  return binary(BinaryOp::Sub, std::move(a), std::move(b));
}

Expression Expression::mul(Expression a, Expression b) {
  if (a.is_number() && b.is_number()) {
    const double v = a.number_value() * b.number_value();
    if (std::isfinite(v)) return number(v);
  }
  if (is_const(a, 0.0) || is_const(b, 0.0)) return number(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return binary(BinaryOp::Mul, std::move(a), std::move(b));
}

Expression Expression::div(Expression a, Expression b) {
  if (a.is_number() && b.is_number() && b.number_value() != 0.0) {
    const double v = a.number_value() / b.number_value();
    if (std::isfinite(v)) return number(v);
  }
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return number(0.0);
  if (is_const(b, 1.0)) return a;
  return binary(BinaryOp::Div, std::move(a), std::move(b));
}

Expression Expression::pow(Expression base, Expression exponent) {
  if (base.is_number() && exponent.is_number()) {
    try {
      const double v = checked_pow(base.number_value(), exponent.number_value());
      if (std::isfinite(v)) return number(v);
    } catch (const DomainError&) {
      // keep the node; evaluation will report the domain error
    }
  }
  if (is_const(exponent, 1.0)) return base;
  if (is_const(exponent, 0.0)) return number(1.0);  // base != 0 assumed
  return binary(BinaryOp::Pow, std::move(base), std::move(exponent));
}

Expression Expression::neg(Expression a) {
  if (a.is_number()) return number(-a.number_value());
  if (a.node_->kind == Kind::Negate) return Expression(a.node_->a);
  return negate(std::move(a));
}

Expression Expression::apply(UnaryFunc f, Expression a) {
  if (a.is_number()) {
    try {
      const double v = apply_func(f, a.number_value());
      if (std::isfinite(v)) return number(v);
    } catch (const DomainError&) {
    }
  }
  return call(f, std::move(a));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const Node* n, std::span<const double> coords,
                 const ParameterBinding& params,
                 std::unordered_map<const Node*, double>& memo) {
  auto hit = memo.find(n);
  if (hit != memo.end()) return hit->second;
  double v = 0.0;
  switch (n->kind) {
    case Kind::Number:
      v = n->value;
      break;
    case Kind::Parameter:
      v = params.get(n->name);
      break;
    case Kind::Coordinate:
      if (n->index >= static_cast<int>(coords.size()))
        throw InvalidInput("coordinate index out of range for point");
      v = coords[n->index];
      break;
    case Kind::Binary: {
      const double a = eval_node(n->a.get(), coords, params, memo);
      const double b = eval_node(n->b.get(), coords, params, memo);
      switch (n->op) {
        case BinaryOp::Add: v = a + b; break;
        case BinaryOp::Sub: v = a - b; break;
        case BinaryOp::Mul: v = a * b; break;
        case BinaryOp::Div:
          if (b == 0.0) throw DomainError("division by zero");
          v = a / b;
          break;
        case BinaryOp::Pow: v = checked_pow(a, b); break;
      }
      break;
    }
    case Kind::Negate:
      v = -eval_node(n->a.get(), coords, params, memo);
      break;
    case Kind::Call:
      v = apply_func(n->func, eval_node(n->a.get(), coords, params, memo));
      break;
  }
  if (!std::isfinite(v)) throw DomainError("non-finite value in evaluation");
  memo.emplace(n, v);
  return v;
}

}  // namespace

double Expression::evaluate(std::span<const double> coords,
                            const ParameterBinding& params) const {
  std::unordered_map<const Node*, double> memo;
  return eval_node(node_.get(), coords, params, memo);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

bool node_depends_on_coords(const Node* n) {
  switch (n->kind) {
    case Kind::Number:
    case Kind::Parameter:
      return false;
    case Kind::Coordinate:
      return true;
    case Kind::Binary:
      return node_depends_on_coords(n->a.get()) ||
             node_depends_on_coords(n->b.get());
    case Kind::Negate:
    case Kind::Call:
      return node_depends_on_coords(n->a.get());
  }
  return false;
}

Expression diff_node(const NodePtr& n, int var,
                     std::unordered_map<const Node*, Expression>& memo) {
  auto hit = memo.find(n.get());
  if (hit != memo.end()) return hit->second;
  using E = Expression;
  Expression result;
  switch (n->kind) {
    case Kind::Number:
    case Kind::Parameter:
      result = E::number(0.0);
      break;
    case Kind::Coordinate:
      result = E::number(n->index == var ? 1.0 : 0.0);
      break;
    case Kind::Binary: {
      const Expression u = wrap_node(n->a);
      const Expression v = wrap_node(n->b);
      const Expression du = diff_node(n->a, var, memo);
      const Expression dv = diff_node(n->b, var, memo);
      switch (n->op) {
        case BinaryOp::Add:
          result = E::add(du, dv);
          break;
        case BinaryOp::Sub:
          result = E::sub(du, dv);
          break;
        case BinaryOp::Mul:
          result = E::add(E::mul(du, v), E::mul(u, dv));
          break;
        case BinaryOp::Div:
          result = E::div(E::sub(E::mul(du, v), E::mul(u, dv)), E::mul(v, v));
          break;
        case BinaryOp::Pow:
          if (!node_depends_on_coords(n->b.get())) {
            // d(u^c) = c * u^(c-1) * u'
            result = E::mul(E::mul(v, E::pow(u, E::sub(v, E::number(1.0)))), du);
          } else {
            // d(u^v) = u^v * (v' ln u + v u'/u)
            result = E::mul(E::pow(u, v),
                            E::add(E::mul(dv, E::apply(UnaryFunc::Ln, u)),
                                   E::mul(v, E::div(du, u))));
          }
          break;
      }
      break;
    }
    case Kind::Negate:
      result = E::neg(diff_node(n->a, var, memo));
      break;
    case Kind::Call: {
      const Expression u = wrap_node(n->a);
      const Expression du = diff_node(n->a, var, memo);
      switch (n->func) {
        case UnaryFunc::Sqrt:
          result = E::div(du, E::mul(E::number(2.0), E::apply(UnaryFunc::Sqrt, u)));
          break;
        case UnaryFunc::Exp:
          result = E::mul(E::apply(UnaryFunc::Exp, u), du);
          break;
        case UnaryFunc::Ln:
          result = E::div(du, u);
          break;
        case UnaryFunc::Sin:
          result = E::mul(E::apply(UnaryFunc::Cos, u), du);
          break;
        case UnaryFunc::Cos:
          result = E::neg(E::mul(E::apply(UnaryFunc::Sin, u), du));
          break;
      }
      break;
    }
  }
  memo.emplace(n.get(), result);
  return result;
}

}  // namespace

Expression Expression::differentiate(int coord_index) const {
  if (coord_index < 0) throw InvalidInput("negative coordinate index");
  std::unordered_map<const Node*, Expression> memo;
  return diff_node(node_, coord_index, memo);
}

// ---------------------------------------------------------------------------
// Simplification: bottom-up rebuild through the simplifying constructors.

namespace {

Expression simplify_node(const NodePtr& n,
                         std::unordered_map<const Node*, Expression>& memo) {
  auto hit = memo.find(n.get());
  if (hit != memo.end()) return hit->second;
  using E = Expression;
  Expression result;
  switch (n->kind) {
    case Kind::Number:
    case Kind::Parameter:
    case Kind::Coordinate:
      result = wrap_node(n);
      break;
    case Kind::Binary: {
      const Expression a = simplify_node(n->a, memo);
      const Expression b = simplify_node(n->b, memo);
      switch (n->op) {
        case BinaryOp::Add: result = E::add(a, b); break;
        case BinaryOp::Sub: result = E::sub(a, b); break;
        case BinaryOp::Mul: result = E::mul(a, b); break;
        case BinaryOp::Div: result = E::div(a, b); break;
        case BinaryOp::Pow: result = E::pow(a, b); break;
      }
      break;
    }
    case Kind::Negate:
      result = E::neg(simplify_node(n->a, memo));
      break;
    case Kind::Call:
      result = E::apply(n->func, simplify_node(n->a, memo));
      break;
  }
  memo.emplace(n.get(), result);
  return result;
}

}  // namespace

Expression Expression::simplify() const {
  std::unordered_map<const Node*, Expression> memo;
  return simplify_node(node_, memo);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

Expression subst_node(const NodePtr& n, const std::vector<Expression>& repl,
                      std::unordered_map<const Node*, Expression>& memo) {
  auto hit = memo.find(n.get());
  if (hit != memo.end()) return hit->second;
  using E = Expression;
  Expression result;
  switch (n->kind) {
    case Kind::Number:
    case Kind::Parameter:
      result = wrap_node(n);
      break;
    case Kind::Coordinate:
      if (n->index >= static_cast<int>(repl.size()))
        throw InvalidInput("substitution does not cover coordinate index " +
                           std::to_string(n->index));
      result = repl[n->index];
      break;
    case Kind::Binary:
      result = E::binary(n->op, subst_node(n->a, repl, memo),
                         subst_node(n->b, repl, memo));
      break;
    case Kind::Negate:
      result = E::negate(subst_node(n->a, repl, memo));
      break;
    case Kind::Call:
      result = E::call(n->func, subst_node(n->a, repl, memo));
      break;
  }
  memo.emplace(n.get(), result);
  return result;
}

}  // namespace

Expression Expression::substitute_coordinates(
    const std::vector<Expression>& replacements) const {
  std::unordered_map<const Node*, Expression> memo;
  return subst_node(node_, replacements, memo);
}

// ---------------------------------------------------------------------------
// Queries

bool Expression::depends_on_coordinates() const {
  return node_depends_on_coords(node_.get());
}

namespace {

bool depends_on_index(const Node* n, int index) {
  switch (n->kind) {
    case Kind::Number:
    case Kind::Parameter:
      return false;
    case Kind::Coordinate:
      return n->index == index;
    case Kind::Binary:
      return depends_on_index(n->a.get(), index) ||
             depends_on_index(n->b.get(), index);
    case Kind::Negate:
    case Kind::Call:
      return depends_on_index(n->a.get(), index);
  }
  return false;
}

void collect_params(const Node* n, std::vector<std::string>& out) {
  switch (n->kind) {
    case Kind::Parameter:
      for (const auto& s : out)
        if (s == n->name) return;
      out.push_back(n->name);
      return;
    case Kind::Binary:
      collect_params(n->a.get(), out);
      collect_params(n->b.get(), out);
      return;
    case Kind::Negate:
    case Kind::Call:
      collect_params(n->a.get(), out);
      return;
    default:
      return;
  }
}

bool nodes_equal(const Node* x, const Node* y) {
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Kind::Number: return x->value == y->value;
    case Kind::Parameter: return x->name == y->name;
    case Kind::Coordinate: return x->index == y->index;
    case Kind::Binary:
      return x->op == y->op && nodes_equal(x->a.get(), y->a.get()) &&
             nodes_equal(x->b.get(), y->b.get());
    case Kind::Negate: return nodes_equal(x->a.get(), y->a.get());
    case Kind::Call:
      return x->func == y->func && nodes_equal(x->a.get(), y->a.get());
  }
  return false;
}

void count_nodes(const Node* n, std::unordered_map<const Node*, bool>& seen,
                 std::size_t& count) {
  if (seen.count(n)) return;
  seen.emplace(n, true);
  ++count;
  if (n->a) count_nodes(n->a.get(), seen, count);
  if (n->b) count_nodes(n->b.get(), seen, count);
}

}  // namespace

bool Expression::depends_on_coordinate(int index) const {
  return depends_on_index(node_.get(), index);
}

std::vector<std::string> Expression::parameter_names() const {
  std::vector<std::string> out;
  collect_params(node_.get(), out);
  return out;
}

bool Expression::equals(const Expression& other) const {
  return nodes_equal(node_.get(), other.node_.get());
}

std::size_t Expression::node_count() const {
  std::unordered_map<const Node*, bool> seen;
  std::size_t count = 0;
  count_nodes(node_.get(), seen, count);
  return count;
}

// ---------------------------------------------------------------------------
// Printing. Minimal parentheses, chosen so the parser reproduces the tree.

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Precedence levels: additive 1, multiplicative 2, unary minus 3, power 4,
// atoms 5. A literal with a sign bit prints a leading '-', so it binds like
// a unary minus.
int node_level(const Node* n) {
  switch (n->kind) {
    case Kind::Number: return std::signbit(n->value) ? 3 : 5;
    case Kind::Parameter:
    case Kind::Coordinate:
    case Kind::Call:
      return 5;
    case Kind::Binary:
      switch (n->op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
      return 1;
    case Kind::Negate: return 3;
  }
  return 5;
}

void print_node(const Node* n, int min_level, const CoordinateSystem& coords,
                std::string& out) {
  const bool parens = node_level(n) < min_level;
  if (parens) out += '(';
  switch (n->kind) {
    case Kind::Number:
      out += format_double(n->value);
      break;
    case Kind::Parameter:
      out += n->name;
      break;
    case Kind::Coordinate:
      if (n->index >= coords.size())
        throw InvalidInput("coordinate index out of range for formatting");
      out += coords.name(n->index);
      break;
    case Kind::Binary: {
      const char* sym = "";
      int lmin = 1, rmin = 1;
      switch (n->op) {
        case BinaryOp::Add: sym = "+"; lmin = 1; rmin = 2; break;
        case BinaryOp::Sub: sym = "-"; lmin = 1; rmin = 2; break;
        case BinaryOp::Mul: sym = "*"; lmin = 2; rmin = 3; break;
        case BinaryOp::Div: sym = "/"; lmin = 2; rmin = 3; break;
        case BinaryOp::Pow: sym = "^"; lmin = 5; rmin = 3; break;
      }
      print_node(n->a.get(), lmin, coords, out);
      out += sym;
      print_node(n->b.get(), rmin, coords, out);
      break;
    }
    case Kind::Negate: {
      out += '-';
      const Node* child = n->a.get();
      // "-(5)" and "-(-x)" keep the operand from fusing into a literal or a
      // second leading minus when reparsed.
      const bool child_parens = node_level(child) < 3 ||
                                child->kind == Kind::Negate ||
                                child->kind == Kind::Number;
      if (child_parens) {
        out += '(';
        print_node(child, 1, coords, out);
        out += ')';
      } else {
        print_node(child, 3, coords, out);
      }
      break;
    }
    case Kind::Call:
      out += func_name(n->func);
      out += '(';
      print_node(n->a.get(), 1, coords, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string Expression::format(const CoordinateSystem& coords) const {
  std::string out;
  print_node(node_.get(), 1, coords, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  const CoordinateSystem* coords;

  void skip_ws() {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
            text[pos] == '\r'))
      ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

  Expression parse_expr() {
    Expression lhs = parse_term();
    for (;;) {
      const char c = peek();
      if (c == '+' || c == '-') {
        ++pos;
        Expression rhs = parse_term();
        lhs = Expression::binary(c == '+' ? BinaryOp::Add : BinaryOp::Sub,
                                 std::move(lhs), std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  Expression parse_term() {
    Expression lhs = parse_factor();
    for (;;) {
      const char c = peek();
      if (c == '*' || c == '/') {
        ++pos;
        Expression rhs = parse_factor();
        lhs = Expression::binary(c == '*' ? BinaryOp::Mul : BinaryOp::Div,
                                 std::move(lhs), std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  Expression parse_factor() {
    if (peek() == '-') {
      ++pos;
      skip_ws();
      const bool literal_start =
          pos < text.size() && (is_digit(text[pos]) || text[pos] == '.');
      Expression operand = parse_power();
      // A minus fused directly onto a numeric literal is the literal's sign,
      // so "-5" round-trips as the number -5 rather than Negate(5).
      if (literal_start && operand.is_number())
        return Expression::number(-operand.number_value());
      return Expression::negate(std::move(operand));
    }
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_atom();
    if (peek() == '^') {
      ++pos;
      Expression exponent = parse_factor();
      return Expression::binary(BinaryOp::Pow, std::move(base),
                                std::move(exponent));
    }
    return base;
  }

  Expression parse_atom() {
    skip_ws();
    if (pos >= text.size()) throw ParseError("expected expression", pos);
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      Expression inner = parse_expr();
      if (!consume(')')) throw ParseError("expected ')'", pos);
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }

  Expression parse_number() {
    const std::size_t start = pos;
    while (pos < text.size() && is_digit(text[pos])) ++pos;
    if (pos < text.size() && text[pos] == '.') {
      const std::size_t dot = pos;
      ++pos;
      if (pos < text.size() && is_digit(text[pos])) {
        while (pos < text.size() && is_digit(text[pos])) ++pos;
      } else {
        pos = dot;  // trailing dot is not part of the number
      }
    }
    if (pos == start) throw ParseError("malformed number", start);
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      const std::size_t mark = pos;
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && is_digit(text[pos])) {
        while (pos < text.size() && is_digit(text[pos])) ++pos;
      } else {
        pos = mark;  // bare 'e' belongs to the next token
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text.data() + start, text.data() + pos, value);
    if (res.ec != std::errc() || res.ptr != text.data() + pos)
      throw ParseError("malformed number", start);
    return Expression::number(value);
  }

  Expression parse_ident() {
    const std::size_t start = pos;
    while (pos < text.size() && is_ident_char(text[pos])) ++pos;
    const std::string name(text.substr(start, pos - start));
    if (peek() == '(') {
      ++pos;
      UnaryFunc f;
      if (name == "sqrt") f = UnaryFunc::Sqrt;
      else if (name == "exp") f = UnaryFunc::Exp;
      else if (name == "ln") f = UnaryFunc::Ln;
      else if (name == "sin") f = UnaryFunc::Sin;
      else if (name == "cos") f = UnaryFunc::Cos;
      else throw ParseError("unknown function '" + name + "'", start);
      Expression arg = parse_expr();
      if (!consume(')')) throw ParseError("expected ')'", pos);
      return Expression::call(f, std::move(arg));
    }
    if (auto idx = coords->index_of(name)) return Expression::coordinate(*idx);
    return Expression::parameter(name);
  }
};

}  // namespace

Expression parse_expression(std::string_view text, const CoordinateSystem& coords) {
  Parser p{text, 0, &coords};
  Expression e = p.parse_expr();
  if (!p.at_end()) throw ParseError("unexpected trailing input", p.pos);
  return e;
}

}  // namespace bhv
