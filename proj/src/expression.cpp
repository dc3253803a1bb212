#include "npfb/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace npfb {

namespace {

using Node = Expression::Node;
using Op = Node::Op;

class Parser {
 public:
  Parser(std::string_view text, int n) : text_(text), n_(n) {}

  int parse_all() {
    const int root = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

  std::vector<Node> nodes;
  bool uses_time = false;
  bool uses_space = false;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression error at column " << pos_ + 1 << ": " << what << " in \"" << text_ << "\"";
    throw ExpressionError(os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int add(Node node) {
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  }

  int binary(Op op, int lhs, int rhs) { return add(Node{op, 0.0, 0, {lhs, rhs}}); }

  int parse_expr() {
    int lhs = parse_term();
    while (true) {
      if (accept('+')) lhs = binary(Op::add, lhs, parse_term());
      else if (accept('-')) lhs = binary(Op::sub, lhs, parse_term());
      else return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    while (true) {
      if (accept('*')) lhs = binary(Op::mul, lhs, parse_unary());
      else if (accept('/')) lhs = binary(Op::div, lhs, parse_unary());
      else return lhs;
    }
  }

  int parse_unary() {
    if (accept('-')) return add(Node{Op::neg, 0.0, 0, {parse_unary()}});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return binary(Op::pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  int parse_number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return add(Node{Op::constant, v, 0, {}});
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "t") {
      uses_time = true;
      return add(Node{Op::time, 0.0, 0, {}});
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int var = std::atoi(name.c_str() + 1);
      if (var < 1 || var > n_) {
        pos_ = start;
        fail("coordinate " + name + " outside 1.." + std::to_string(n_));
      }
      uses_space = true;
      return add(Node{Op::variable, 0.0, var - 1, {}});
    }
    Op op;
    if (name == "exp") op = Op::exp;
    else if (name == "min") op = Op::min;
    else if (name == "max") op = Op::max;
    else {
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    expect('(');
    std::vector<int> args{parse_expr()};
    while (accept(',')) args.push_back(parse_expr());
    expect(')');
    if (op == Op::exp && args.size() != 1) fail("exp takes one argument");
    if (op != Op::exp && args.size() < 2) fail(name + " takes at least two arguments");
    return add(Node{op, 0.0, 0, std::move(args)});
  }

  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : nodes_(std::make_shared<std::vector<Node>>(1)), source_("0") {}

Expression Expression::parse(std::string_view text, int n) {
  Parser parser(text, n);
  Expression e;
  e.root_ = parser.parse_all();
  e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(parser.nodes));
  e.source_ = std::string(text);
  e.uses_time_ = parser.uses_time;
  e.uses_space_ = parser.uses_space;
  return e;
}

Expression Expression::constant(double value) {
  Expression e;
  e.nodes_ = std::make_shared<const std::vector<Node>>(1, Node{Op::constant, value, 0, {}});
  std::ostringstream os;
  os.precision(17);
  os << value;
  e.source_ = os.str();
  return e;
}

double Expression::operator()(const Point& x, double t) const { return eval(root_, x, t); }

double Expression::eval(int index, const Point& x, double t) const {
  const Node& node = (*nodes_)[static_cast<std::size_t>(index)];
  auto arg = [&](std::size_t i) { return eval(node.args[i], x, t); };
  switch (node.op) {
    case Op::constant: return node.value;
    case Op::variable: return x[node.var];
    case Op::time: return t;
    case Op::add: return arg(0) + arg(1);
    case Op::sub: return arg(0) - arg(1);
    case Op::mul: return arg(0) * arg(1);
    case Op::div: return arg(0) / arg(1);
    case Op::neg: return -arg(0);
    case Op::pow: return std::pow(arg(0), arg(1));
    case Op::exp: return std::exp(arg(0));
    case Op::min: {
      double v = arg(0);
      for (std::size_t i = 1; i < node.args.size(); ++i) v = std::min(v, arg(i));
      return v;
    }
    case Op::max: {
      double v = arg(0);
      for (std::size_t i = 1; i < node.args.size(); ++i) v = std::max(v, arg(i));
      return v;
    }
  }
  return 0.0;
}

}  // namespace npfb
