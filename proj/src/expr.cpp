#include "qgeo/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>

#include "qgeo/errors.hpp"

namespace qgeo::expr {

enum class OpKind {
  kConst,
  kVar,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kNeg,
  kCall1,
  kCall2,
};

struct Expr::Op {
  OpKind kind;
  double value = 0.0;                     // kConst
  int var = 0;                            // kVar
  double (*fn1)(double) = nullptr;        // kCall1
  double (*fn2)(double, double) = nullptr;  // kCall2
};

namespace {

const std::map<std::string, double (*)(double)>& unary_table() {
  static const std::map<std::string, double (*)(double)> table = {
      {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
      {"asin", std::asin}, {"acos", std::acos}, {"atan", std::atan},
      {"sinh", std::sinh}, {"cosh", std::cosh}, {"tanh", std::tanh},
      {"sqrt", std::sqrt}, {"exp", std::exp},   {"log", std::log},
      {"abs", std::fabs},
  };
  return table;
}

double fn_min(double a, double b) { return std::fmin(a, b); }
double fn_max(double a, double b) { return std::fmax(a, b); }

const std::map<std::string, double (*)(double, double)>& binary_table() {
  static const std::map<std::string, double (*)(double, double)> table = {
      {"atan2", std::atan2},
      {"pow", std::pow},
      {"min", fn_min},
      {"max", fn_max},
  };
  return table;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars,
         std::vector<Expr::Op>& out)
      : text_(text), vars_(vars), out_(out) {}

  void run() {
    parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ConfigError("expr: trailing input at '" + text_.substr(pos_) +
                        "'");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(
                                      text_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void parse_expr() {
    parse_term();
    while (true) {
      if (consume('+')) {
        parse_term();
        out_.push_back({OpKind::kAdd});
      } else if (consume('-')) {
        parse_term();
        out_.push_back({OpKind::kSub});
      } else {
        return;
      }
    }
  }

  void parse_term() {
    parse_factor();
    while (true) {
      if (consume('*')) {
        parse_factor();
        out_.push_back({OpKind::kMul});
      } else if (consume('/')) {
        parse_factor();
        out_.push_back({OpKind::kDiv});
      } else {
        return;
      }
    }
  }

  void parse_factor() {
    bool negate = false;
    while (true) {
      if (consume('-'))
        negate = !negate;
      else if (!consume('+'))
        break;
    }
    parse_primary();
    if (consume('^')) {
      parse_factor();  // right associative
      out_.push_back({OpKind::kPow});
    }
    if (negate) out_.push_back({OpKind::kNeg});
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ConfigError("expr: unexpected end");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parse_expr();
      if (!consume(')')) throw ConfigError("expr: missing ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = std::stod(text_.substr(pos_), &used);
      pos_ += used;
      out_.push_back({OpKind::kConst, v});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      std::string name = text_.substr(start, pos_ - start);
      if (peek() == '(') {
        ++pos_;
        if (auto it1 = unary_table().find(name); it1 != unary_table().end()) {
          parse_expr();
          if (!consume(')')) throw ConfigError("expr: missing ')'");
          Expr::Op op{OpKind::kCall1};
          op.fn1 = it1->second;
          out_.push_back(op);
          return;
        }
        if (auto it2 = binary_table().find(name);
            it2 != binary_table().end()) {
          parse_expr();
          if (!consume(',')) throw ConfigError("expr: expected ','");
          parse_expr();
          if (!consume(')')) throw ConfigError("expr: missing ')'");
          Expr::Op op{OpKind::kCall2};
          op.fn2 = it2->second;
          out_.push_back(op);
          return;
        }
        throw ConfigError("expr: unknown function '" + name + "'");
      }
      if (name == "pi") {
        out_.push_back({OpKind::kConst, M_PI});
        return;
      }
      if (name == "e") {
        out_.push_back({OpKind::kConst, M_E});
        return;
      }
      for (size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          Expr::Op op{OpKind::kVar};
          op.var = static_cast<int>(i);
          out_.push_back(op);
          return;
        }
      }
      throw ConfigError("expr: unknown identifier '" + name + "'");
    }
    throw ConfigError(std::string("expr: unexpected character '") + c + "'");
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  std::vector<Expr::Op>& out_;
  size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(const std::string& text,
                 const std::vector<std::string>& variables) {
  auto program = std::make_shared<std::vector<Op>>();
  Parser(text, variables, *program).run();
  Expr e;
  e.program_ = std::move(program);
  return e;
}

double Expr::eval(const std::vector<double>& values) const {
  std::vector<double> stack;
  stack.reserve(16);
  auto pop = [&stack]() {
    double v = stack.back();
    stack.pop_back();
    return v;
  };
  for (const Op& op : *program_) {
    switch (op.kind) {
      case OpKind::kConst:
        stack.push_back(op.value);
        break;
      case OpKind::kVar:
        stack.push_back(values[op.var]);
        break;
      case OpKind::kAdd: {
        double b = pop();
        stack.back() += b;
        break;
      }
      case OpKind::kSub: {
        double b = pop();
        stack.back() -= b;
        break;
      }
      case OpKind::kMul: {
        double b = pop();
        stack.back() *= b;
        break;
      }
      case OpKind::kDiv: {
        double b = pop();
        stack.back() /= b;
        break;
      }
      case OpKind::kPow: {
        double b = pop();
        stack.back() = std::pow(stack.back(), b);
        break;
      }
      case OpKind::kNeg:
        stack.back() = -stack.back();
        break;
      case OpKind::kCall1:
        stack.back() = op.fn1(stack.back());
        break;
      case OpKind::kCall2: {
        double b = pop();
        stack.back() = op.fn2(stack.back(), b);
        break;
      }
    }
  }
  return stack.back();
}

}  // namespace qgeo::expr
