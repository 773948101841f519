#pragma once

#include <memory>
#include <string>
#include <vector>

namespace qgeo::expr {

/// Small arithmetic expression evaluator for config files. Supports
/// + - * / ^, parentheses, the constants pi and e, named variables, and
/// the functions sin cos tan asin acos atan sinh cosh tanh sqrt exp log
/// abs, plus two-argument atan2, pow, min, max.
class Expr {
 public:
  /// Parses `text` against the given variable names. Throws ConfigError
  /// on syntax errors or unknown identifiers.
  static Expr parse(const std::string& text,
                    const std::vector<std::string>& variables);

  double eval(const std::vector<double>& values) const;

  struct Op;

 private:
  std::shared_ptr<const std::vector<Op>> program_;
};

}  // namespace qgeo::expr
