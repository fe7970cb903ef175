#pragma once

#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bhv/errors.hpp"

namespace bhv {

// Named coordinates of either the ambient space (x1..xm, z) or a chart
// (u1..um). Index order is the order of the name list.
class CoordinateSystem {
 public:
  explicit CoordinateSystem(std::vector<std::string> names);

  // Ambient coordinates of R^{m+1}: x1..xm followed by z.
  static CoordinateSystem ambient(int surface_dim);
  // Chart coordinates u1..um.
  static CoordinateSystem chart(int dim);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const { return names_.at(i); }
  std::optional<int> index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

// Values for the free parameters of an expression (A, B, C, t, ...).
class ParameterBinding {
 public:
  ParameterBinding() = default;
  ParameterBinding(std::initializer_list<std::pair<const std::string, double>> init)
      : values_(init) {}

  void set(const std::string& name, double value) { values_[name] = value; }
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  double get(const std::string& name) const;
  // Union of two bindings; a name bound to two different values is an error.
  ParameterBinding merged_with(const ParameterBinding& other) const;
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class UnaryFunc { Sqrt, Exp, Ln, Sin, Cos };

class Expression;

namespace detail {
struct Node;
using NodePtr = std::shared_ptr<const Node>;
Expression wrap_node(NodePtr n);
const NodePtr& node_of(const Expression& e);
}  // namespace detail

// Immutable expression tree for scalar fields. Copies are cheap handles;
// subtrees are shared freely, so derived expressions form DAGs and every
// traversal memoizes on node identity.
class Expression {
 public:
  Expression();  // the literal 0

  static Expression number(double value);
  static Expression parameter(std::string name);
  static Expression coordinate(int index);

  // Structural constructors: build exactly the requested node. The parser
  // uses these so that parse(format(e)) reproduces e node for node.
  static Expression binary(BinaryOp op, Expression lhs, Expression rhs);
  static Expression negate(Expression operand);
  static Expression call(UnaryFunc f, Expression argument);

  // Simplifying constructors: fold constants and the 0/1 identities at the
  // root. Differentiation builds through these so derivatives come out
  // readable.
  static Expression add(Expression a, Expression b);
  static Expression sub(Expression a, Expression b);
  static Expression mul(Expression a, Expression b);
  static Expression div(Expression a, Expression b);
  static Expression pow(Expression base, Expression exponent);
  static Expression neg(Expression a);
  static Expression apply(UnaryFunc f, Expression a);

  double evaluate(std::span<const double> coords,
                  const ParameterBinding& params) const;
  Expression differentiate(int coord_index) const;
  Expression simplify() const;
  std::string format(const CoordinateSystem& coords) const;
  // Composition: coordinate i is replaced by replacements[i].
  Expression substitute_coordinates(
      const std::vector<Expression>& replacements) const;

  bool depends_on_coordinates() const;
  bool depends_on_coordinate(int index) const;
  std::vector<std::string> parameter_names() const;
  bool equals(const Expression& other) const;

  bool is_number() const;
  double number_value() const;  // requires is_number()
  std::size_t node_count() const;

  friend Expression operator+(Expression a, Expression b) { return add(a, b); }
  friend Expression operator-(Expression a, Expression b) { return sub(a, b); }
  friend Expression operator*(Expression a, Expression b) { return mul(a, b); }
  friend Expression operator/(Expression a, Expression b) { return div(a, b); }
  friend Expression operator-(Expression a) { return neg(a); }

 private:
  explicit Expression(detail::NodePtr node);
  friend Expression detail::wrap_node(detail::NodePtr);
  friend const detail::NodePtr& detail::node_of(const Expression&);
  detail::NodePtr node_;
};

inline Expression operator+(Expression a, double b) { return a + Expression::number(b); }
inline Expression operator+(double a, Expression b) { return Expression::number(a) + b; }
inline Expression operator-(Expression a, double b) { return a - Expression::number(b); }
inline Expression operator-(double a, Expression b) { return Expression::number(a) - b; }
inline Expression operator*(Expression a, double b) { return a * Expression::number(b); }
inline Expression operator*(double a, Expression b) { return Expression::number(a) * b; }
inline Expression operator/(Expression a, double b) { return a / Expression::number(b); }
inline Expression operator/(double a, Expression b) { return Expression::number(a) / b; }

// Recursive-descent parser over
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-'? power
//   power  := atom ('^' factor)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
// Identifiers matching a coordinate name become coordinate references, known
// function names (sqrt, exp, ln, sin, cos) must be followed by '(', anything
// else becomes a parameter reference.
Expression parse_expression(std::string_view text, const CoordinateSystem& coords);

}  // namespace bhv
