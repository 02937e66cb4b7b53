#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace qheat {

/// Parse failure with the 0-based character offset of the problem.
class ExpressionError : public InputError {
public:
    ExpressionError(const std::string& msg, std::size_t pos)
        : InputError("expression error at position " + std::to_string(pos) + ": " + msg), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

/// Real-valued expression in x1..xn, y1..yn (real and imaginary parts of z).
///
/// Grammar: numbers, the constants pi and e, + - * / ^ (right-assoc, binds
/// tighter than unary minus), parentheses, and exp(...).
class Expression {
public:
    static Expression parse(std::string_view text, std::size_t n) {
        Parser p{text, n, 0};
        Expression e;
        e.root_ = p.parse_sum();
        p.skip_space();
        if (p.pos != text.size()) throw ExpressionError("unexpected '" + std::string(1, text[p.pos]) + "'", p.pos);
        e.n_ = n;
        return e;
    }

    double operator()(std::span<const complex> z) const {
        require_size(z.size(), n_, "expression point");
        return root_->eval(z);
    }

private:
    struct Node {
        enum class Kind { number, x, y, neg, add, sub, mul, div, pow, exp } kind;
        double value = 0.0;
        std::size_t var = 0;
        std::unique_ptr<Node> lhs, rhs;

        double eval(std::span<const complex> z) const {
            switch (kind) {
                case Kind::number: return value;
                case Kind::x: return z[var].real();
                case Kind::y: return z[var].imag();
                case Kind::neg: return -lhs->eval(z);
                case Kind::add: return lhs->eval(z) + rhs->eval(z);
                case Kind::sub: return lhs->eval(z) - rhs->eval(z);
                case Kind::mul: return lhs->eval(z) * rhs->eval(z);
                case Kind::div: return lhs->eval(z) / rhs->eval(z);
                case Kind::pow: return std::pow(lhs->eval(z), rhs->eval(z));
                case Kind::exp: return std::exp(lhs->eval(z));
            }
            return 0.0;
        }
    };
    using NodePtr = std::unique_ptr<Node>;

    static NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto node = std::make_unique<Node>();
        node->kind = k;
        node->lhs = std::move(a);
        node->rhs = std::move(b);
        return node;
    }

    struct Parser {
        std::string_view text;
        std::size_t n;
        std::size_t pos;

        void skip_space() {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_space();
            if (pos < text.size() && text[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        NodePtr parse_sum() {
            NodePtr lhs = parse_product();
            for (;;) {
                if (accept('+'))
                    lhs = make(Node::Kind::add, std::move(lhs), parse_product());
                else if (accept('-'))
                    lhs = make(Node::Kind::sub, std::move(lhs), parse_product());
                else
                    return lhs;
            }
        }

        NodePtr parse_product() {
            NodePtr lhs = parse_unary();
            for (;;) {
                if (accept('*'))
                    lhs = make(Node::Kind::mul, std::move(lhs), parse_unary());
                else if (accept('/'))
                    lhs = make(Node::Kind::div, std::move(lhs), parse_unary());
                else
                    return lhs;
            }
        }

        NodePtr parse_unary() {
            if (accept('-')) return make(Node::Kind::neg, parse_unary());
            if (accept('+')) return parse_unary();
            return parse_power();
        }

        NodePtr parse_power() {
            NodePtr base = parse_atom();
            if (accept('^')) return make(Node::Kind::pow, std::move(base), parse_unary());
            return base;
        }

        NodePtr parse_atom() {
            skip_space();
            if (pos >= text.size()) throw ExpressionError("unexpected end of expression", pos);
            const char c = text[pos];
            if (c == '(') {
                ++pos;
                NodePtr inner = parse_sum();
                if (!accept(')')) throw ExpressionError("expected ')'", pos);
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                double v = 0.0;
                auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
                if (ec != std::errc()) throw ExpressionError("malformed number", pos);
                pos = static_cast<std::size_t>(ptr - text.data());
                auto node = make(Node::Kind::number);
                node->value = v;
                return node;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::size_t start = pos;
                while (pos < text.size() && std::isalnum(static_cast<unsigned char>(text[pos]))) ++pos;
                const std::string_view name = text.substr(start, pos - start);
                if (name == "exp") {
                    if (!accept('(')) throw ExpressionError("expected '(' after exp", pos);
                    NodePtr arg = parse_sum();
                    if (!accept(')')) throw ExpressionError("expected ')'", pos);
                    return make(Node::Kind::exp, std::move(arg));
                }
                if (name == "pi" || name == "e") {
                    auto node = make(Node::Kind::number);
                    node->value = name == "pi" ? std::numbers::pi : std::numbers::e;
                    return node;
                }
                if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
                    std::size_t idx = 0;
                    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
                    if (ec == std::errc() && ptr == name.data() + name.size() && idx >= 1 && idx <= n) {
                        auto node = make(name[0] == 'x' ? Node::Kind::x : Node::Kind::y);
                        node->var = idx - 1;
                        return node;
                    }
                }
                throw ExpressionError("unknown identifier '" + std::string(name) + "'", start);
            }
            throw ExpressionError("unexpected '" + std::string(1, c) + "'", pos);
        }
    };

    std::shared_ptr<const Node> root_;
    std::size_t n_ = 0;
};

}  // namespace qheat
