#pragma once

// Small closed-form expression language for config-defined dynamics.
//
// Grammar:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 't' | 'x' digits | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp
//
// Variables are x1..xN (1-based state components) and t.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "etmas/errors.hpp"

namespace etmas {

class Expression {
 public:
  static Expression parse(std::string_view text);

  /// Evaluates against a state vector (x1 = state[0]) and time.
  [[nodiscard]] double operator()(std::span<const double> state, double t) const {
    return eval(*root_, state, t);
  }

  /// Largest 1-based state index referenced, 0 if none.
  [[nodiscard]] std::size_t max_state_index() const noexcept { return max_index_; }
  [[nodiscard]] bool uses_time() const noexcept { return uses_time_; }
  [[nodiscard]] const std::string& source() const noexcept { return source_; }

 private:
  enum class Op { Const, Var, Time, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };

  struct Node {
    Op op = Op::Const;
    double value = 0.0;
    std::size_t index = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  class Parser;

  static double eval(const Node& n, std::span<const double> s, double t) {
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::Var:
        if (n.index >= s.size()) throw ConfigError("expression references x" + std::to_string(n.index + 1) +
                                                   " beyond the supplied state");
        return s[n.index];
      case Op::Time: return t;
      case Op::Add: return eval(*n.lhs, s, t) + eval(*n.rhs, s, t);
      case Op::Sub: return eval(*n.lhs, s, t) - eval(*n.rhs, s, t);
      case Op::Mul: return eval(*n.lhs, s, t) * eval(*n.rhs, s, t);
      case Op::Div: return eval(*n.lhs, s, t) / eval(*n.rhs, s, t);
      case Op::Pow: return std::pow(eval(*n.lhs, s, t), eval(*n.rhs, s, t));
      case Op::Neg: return -eval(*n.lhs, s, t);
      case Op::Sin: return std::sin(eval(*n.lhs, s, t));
      case Op::Cos: return std::cos(eval(*n.lhs, s, t));
      case Op::Exp: return std::exp(eval(*n.lhs, s, t));
    }
    return 0.0;
  }

  NodePtr root_;
  std::size_t max_index_ = 0;
  bool uses_time_ = false;
  std::string source_;
};

class Expression::Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

  std::size_t max_index = 0;
  bool uses_time = false;

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression \"" + std::string(text_) + "\": " + msg + " at column " + std::to_string(pos_ + 1));
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

  static NodePtr make(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "t") {
      uses_time = true;
      auto n = std::make_shared<Node>();
      n->op = Op::Time;
      return n;
    }
    if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      const std::size_t idx = std::stoul(std::string(name.substr(1)));
      if (idx == 0) fail("state indices are 1-based");
      max_index = std::max(max_index, idx);
      auto n = std::make_shared<Node>();
      n->op = Op::Var;
      n->index = idx - 1;
      return n;
    }
    Op op{};
    if (name == "sin") {
      op = Op::Sin;
    } else if (name == "cos") {
      op = Op::Cos;
    } else if (name == "exp") {
      op = Op::Exp;
    } else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "' (allowed: x<k>, t, sin, cos, exp)");
    }
    if (!accept('(')) fail("expected '(' after " + std::string(name));
    NodePtr arg = expr();
    if (!accept(')')) fail("expected ')'");
    return make(op, arg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse_all();
  e.max_index_ = p.max_index;
  e.uses_time_ = p.uses_time;
  e.source_ = std::string(text);
  return e;
}

}  // namespace etmas
