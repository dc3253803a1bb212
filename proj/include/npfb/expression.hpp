#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "npfb/grid.hpp"

namespace npfb {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed-form expression of (x1..xn, t).
///
/// Grammar (whitespace is ignored):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?
///     primary := number | 'x1'..'xn' | 't' | func '(' expr (',' expr)* ')' | '(' expr ')'
///     func    := 'min' | 'max' | 'exp'
///
/// min and max take two or more arguments, exp exactly one. '^' is right
/// associative and binds tighter than unary minus, so -x1^2 == -(x1^2).
class Expression {
 public:
  Expression();

  static Expression parse(std::string_view text, int n);
  static Expression constant(double value);

  double operator()(const Point& x, double t) const;

  const std::string& source() const { return source_; }
  bool depends_on_time() const { return uses_time_; }
  bool depends_on_space() const { return uses_space_; }

  struct Node {
    enum class Op { constant, variable, time, add, sub, mul, div, neg, pow, exp, min, max };
    Op op = Op::constant;
    double value = 0.0;
    int var = 0;
    std::vector<int> args;
  };

 private:
  double eval(int node, const Point& x, double t) const;

  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = 0;
  std::string source_;
  bool uses_time_ = false;
  bool uses_space_ = false;
};

}  // namespace npfb
