#include "slk/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

namespace slk {

struct Expression::Node {
    enum class Kind { Number, ImagUnit, Pi, Var, Neg, Binary, Call } kind;
    double number = 0;
    char op = 0;             // Binary: + - * / ^
    std::string func;        // Call
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

Complex apply_function(const std::string& name, Complex v, size_t pos) {
    if (name == "sin") return std::sin(v);
    if (name == "cos") return std::cos(v);
    if (name == "tan") return std::tan(v);
    if (name == "exp") return std::exp(v);
    if (name == "log") return std::log(v);
    if (name == "sinh") return std::sinh(v);
    if (name == "cosh") return std::cosh(v);
    if (name == "tanh") return std::tanh(v);
    if (name == "sech") return 1.0 / std::cosh(v);
    if (name == "sqrt") return std::sqrt(v);
    if (name == "abs") return Complex(std::abs(v));
    throw parse_error("unknown function '" + name + "'", pos);
}

bool known_function(const std::string& name) {
    for (const char* f : {"sin", "cos", "tan", "exp", "log", "sinh", "cosh", "tanh", "sech",
                          "sqrt", "abs"})
        if (name == f) return true;
    return false;
}

class Parser {
  public:
    Parser(const std::string& text, std::string variable)
        : text_(text), var_(std::move(variable)) {}

    NodePtr run() {
        skip_space();
        if (pos_ >= text_.size()) throw parse_error("empty expression", 0);
        auto node = parse_expr();
        skip_space();
        if (pos_ < text_.size())
            throw parse_error(std::string("unexpected '") + text_[pos_] + "', expected operator or end",
                              pos_);
        return node;
    }

  private:
    const std::string& text_;
    std::string var_;
    size_t pos_ = 0;

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek_is(char c) {
        skip_space();
        return pos_ < text_.size() && text_[pos_] == c;
    }
    bool consume(char c) {
        if (!peek_is(c)) return false;
        ++pos_;
        return true;
    }

    NodePtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            skip_space();
            if (consume('+'))
                lhs = make({Node::Kind::Binary, 0, '+', {}, lhs, parse_term()});
            else if (consume('-'))
                lhs = make({Node::Kind::Binary, 0, '-', {}, lhs, parse_term()});
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            skip_space();
            if (consume('*'))
                lhs = make({Node::Kind::Binary, 0, '*', {}, lhs, parse_unary()});
            else if (consume('/'))
                lhs = make({Node::Kind::Binary, 0, '/', {}, lhs, parse_unary()});
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        skip_space();
        if (consume('-')) return make({Node::Kind::Neg, 0, 0, {}, parse_unary(), nullptr});
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        skip_space();
        if (consume('^'))
            return make({Node::Kind::Binary, 0, '^', {}, base, parse_unary()});
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) throw parse_error("expected a value", pos_);
        const char c = text_[pos_];
        if (consume('(')) {
            auto inner = parse_expr();
            if (!consume(')')) throw parse_error("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw parse_error(std::string("unexpected '") + c + "', expected a value", pos_);
    }

    NodePtr parse_number() {
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark; // the 'e' belongs to something else
            }
        }
        if (pos_ == start || (pos_ == start + 1 && text_[start] == '.'))
            throw parse_error("malformed number", start);
        return make({Node::Kind::Number, std::stod(text_.substr(start, pos_ - start)), 0, {},
                     nullptr, nullptr});
    }

    NodePtr parse_identifier() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        if (name == "i") return make({Node::Kind::ImagUnit, 0, 0, {}, nullptr, nullptr});
        if (name == "pi") return make({Node::Kind::Pi, 0, 0, {}, nullptr, nullptr});
        if (name == var_) return make({Node::Kind::Var, 0, 0, {}, nullptr, nullptr});
        if (known_function(name)) {
            if (!consume('(')) throw parse_error("expected '(' after '" + name + "'", pos_);
            auto arg = parse_expr();
            if (!consume(')')) throw parse_error("expected ')'", pos_);
            return make({Node::Kind::Call, 0, 0, name, arg, nullptr});
        }
        throw parse_error("unknown identifier '" + name + "'", start);
    }
};

Complex eval(const Node& n, Complex x) {
    switch (n.kind) {
        case Node::Kind::Number: return Complex(n.number);
        case Node::Kind::ImagUnit: return Complex(0, 1);
        case Node::Kind::Pi: return Complex(3.14159265358979323846);
        case Node::Kind::Var: return x;
        case Node::Kind::Neg: return -eval(*n.a, x);
        case Node::Kind::Call: return apply_function(n.func, eval(*n.a, x), 0);
        case Node::Kind::Binary: {
            Complex l = eval(*n.a, x), r = eval(*n.b, x);
            switch (n.op) {
                case '+': return l + r;
                case '-': return l - r;
                case '*': return l * r;
                case '/': return l / r;
                case '^': return std::pow(l, r);
            }
        }
    }
    return 0;
}

void print(const Node& n, std::string& out, const std::string& var) {
    switch (n.kind) {
        case Node::Kind::Number: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.number);
            out += buf;
            return;
        }
        case Node::Kind::ImagUnit: out += 'i'; return;
        case Node::Kind::Pi: out += "pi"; return;
        case Node::Kind::Var: out += var; return;
        case Node::Kind::Neg:
            out += "(-";
            print(*n.a, out, var);
            out += ')';
            return;
        case Node::Kind::Call:
            out += n.func;
            out += '(';
            print(*n.a, out, var);
            out += ')';
            return;
        case Node::Kind::Binary:
            out += '(';
            print(*n.a, out, var);
            out += n.op;
            print(*n.b, out, var);
            out += ')';
            return;
    }
}

} // namespace

Expression Expression::parse(const std::string& text, const std::string& variable) {
    return Expression(Parser(text, variable).run(), variable);
}

Complex Expression::operator()(Complex value) const { return eval(*root_, value); }

std::string Expression::to_string() const {
    std::string out;
    print(*root_, out, var_);
    return out;
}

} // namespace slk
