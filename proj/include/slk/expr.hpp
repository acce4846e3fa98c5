#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "slk/types.hpp"

namespace slk {

/// Syntax error with the offending position in the input text.
struct parse_error : std::runtime_error {
    parse_error(const std::string& msg, size_t position)
        : std::runtime_error(msg + " at position " + std::to_string(position)), pos(position) {}
    size_t pos;
};

/// A parsed arithmetic expression in one variable. Grammar: decimal and
/// scientific numbers, the imaginary unit i, the variable, pi, + - * / ^
/// with standard precedence, unary minus, parentheses, and the functions
/// sin cos tan exp log sinh cosh tanh sech sqrt abs. Immutable.
class Expression {
  public:
    /// variable: the identifier treated as the free variable ("x" for
    /// potentials, "omega" for boundary coefficients).
    static Expression parse(const std::string& text, const std::string& variable = "x");

    Complex operator()(Complex value) const;

    /// Canonical fully parenthesized form; parse(to_string()) is a fixed
    /// point under printing.
    std::string to_string() const;

    struct Node;

  private:
    Expression(std::shared_ptr<const Node> root, std::string variable)
        : root_(std::move(root)), var_(std::move(variable)) {}
    std::shared_ptr<const Node> root_;
    std::string var_;
};

/// Spec name: parses and returns the evaluable expression.
inline Expression parse_expression(const std::string& text, const std::string& variable = "x") {
    return Expression::parse(text, variable);
}

} // namespace slk
