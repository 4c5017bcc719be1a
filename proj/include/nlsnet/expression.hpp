#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>

#include "nlsnet/error.hpp"

namespace nlsnet {

/// Real function of x compiled from a small grammar:
///   expr  := term (('+' | '-') term)*
///   term  := unary (('*' | '/') unary)*
///   unary := '-' unary | power
///   power := atom ('^' unary)?
///   atom  := number | 'x' | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'
/// Exponentiation binds tighter than unary minus, so -x^2 is -(x^2).
class Expression {
 public:
  static Expression parse(std::string_view text) {
    Parser parser{text, 0};
    auto root = parser.expr();
    parser.skip();
    if (parser.pos != text.size())
      throw Error(ErrorKind::config, "unexpected '" + std::string(text.substr(parser.pos)) +
                                         "' in expression '" + std::string(text) + "'");
    return Expression(std::move(root));
  }

  double operator()(double x) const { return root_->eval(x); }

 private:
  struct Node {
    enum class Op { number, var, neg, add, sub, mul, div, pow, sin, cos, exp } op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double x) const {
      switch (op) {
        case Op::number: return value;
        case Op::var: return x;
        case Op::neg: return -lhs->eval(x);
        case Op::add: return lhs->eval(x) + rhs->eval(x);
        case Op::sub: return lhs->eval(x) - rhs->eval(x);
        case Op::mul: return lhs->eval(x) * rhs->eval(x);
        case Op::div: return lhs->eval(x) / rhs->eval(x);
        case Op::pow: {
          const double base = lhs->eval(x);
          const double e = rhs->eval(x);
          // integer powers by repeated multiplication keep x^2 bit-identical to x*x
          if (e == 2.0) return base * base;
          return std::pow(base, e);
        }
        case Op::sin: return std::sin(lhs->eval(x));
        case Op::cos: return std::cos(lhs->eval(x));
        case Op::exp: return std::exp(lhs->eval(x));
      }
      return 0.0;
    }
  };
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr make(Node::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double v = 0.0) {
    return std::make_shared<const Node>(Node{op, v, std::move(lhs), std::move(rhs)});
  }

  struct Parser {
    std::string_view text;
    std::size_t pos;

    void skip() {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool accept(char c) {
      skip();
      if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c))
        throw Error(ErrorKind::config, std::string("expected '") + c + "' in expression '" +
                                           std::string(text) + "'");
    }

    NodePtr expr() {
      auto lhs = term();
      for (;;) {
        if (accept('+')) lhs = make(Node::Op::add, lhs, term());
        else if (accept('-')) lhs = make(Node::Op::sub, lhs, term());
        else return lhs;
      }
    }
    NodePtr term() {
      auto lhs = unary();
      for (;;) {
        if (accept('*')) lhs = make(Node::Op::mul, lhs, unary());
        else if (accept('/')) lhs = make(Node::Op::div, lhs, unary());
        else return lhs;
      }
    }
    NodePtr unary() {
      if (accept('-')) return make(Node::Op::neg, unary());
      return power();
    }
    NodePtr power() {
      auto base = atom();
      if (accept('^')) return make(Node::Op::pow, base, unary());
      return base;
    }
    NodePtr atom() {
      skip();
      if (pos >= text.size())
        throw Error(ErrorKind::config, "unexpected end of expression '" + std::string(text) + "'");
      if (accept('(')) {
        auto inner = expr();
        expect(')');
        return inner;
      }
      const char c = text[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string rest(text.substr(pos));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        pos += static_cast<std::size_t>(end - rest.c_str());
        return make(Node::Op::number, nullptr, nullptr, v);
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = pos;
        while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
        const std::string_view name = text.substr(start, pos - start);
        if (name == "x") return make(Node::Op::var);
        Node::Op op;
        if (name == "sin") op = Node::Op::sin;
        else if (name == "cos") op = Node::Op::cos;
        else if (name == "exp") op = Node::Op::exp;
        else throw Error(ErrorKind::config, "unknown identifier '" + std::string(name) + "'");
        expect('(');
        auto arg = expr();
        expect(')');
        return make(op, arg);
      }
      throw Error(ErrorKind::config, std::string("unexpected character '") + c + "' in expression '" +
                                         std::string(text) + "'");
    }
  };

  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  NodePtr root_;
};

}  // namespace nlsnet
