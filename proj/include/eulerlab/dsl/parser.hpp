#pragma once

// Recursive-descent parser for coefficient expressions. Grammar in
// docs/grammar.ebnf:
//
//   expr    ::= term { ("+" | "-") term }
//   term    ::= unary { ("*" | "/") unary }
//   unary   ::= "-" unary | power
//   power   ::= primary [ "^" unary ]
//   primary ::= number | identifier | identifier "(" expr { "," expr } ")"
//             | "(" expr ")"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "eulerlab/dsl/expr.hpp"
#include "eulerlab/error.hpp"

namespace eulerlab::dsl {

namespace detail {

inline constexpr int kMaxDepth = 200;

class Parser {
public:
    Parser(std::string_view src, int dim, const std::vector<std::string>& extras)
        : src_(src), dim_(dim), extras_(extras) {}

    NodePtr parse_all() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
        auto e = expr();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view src_;
    int dim_;
    const std::vector<std::string>& extras_;
    std::size_t pos_ = 0;
    int depth_ = 0;

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth) throw ParseError("expression nested too deeply", p.pos_);
        }
        ~DepthGuard() { --p.depth_; }
    };

    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
                ++pos_;
            else
                break;
        }
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
        if (src_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    NodePtr expr() {
        DepthGuard g(*this);
        auto lhs = term();
        for (;;) {
            if (peek('+')) {
                ++pos_;
                lhs = make_binary(BinOp::add, lhs, term());
            } else if (peek('-')) {
                ++pos_;
                lhs = make_binary(BinOp::sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (peek('*')) {
                ++pos_;
                lhs = make_binary(BinOp::mul, lhs, unary());
            } else if (peek('/')) {
                ++pos_;
                lhs = make_binary(BinOp::div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        DepthGuard g(*this);
        if (peek('-')) {
            ++pos_;
            return make_negate(unary());
        }
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (peek('^')) {
            ++pos_;
            return make_binary(BinOp::pow, base, unary());
        }
        return base;
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        if (pos_ - start == 1 && src_[start] == '.') throw ParseError("malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ >= src_.size() || !is_digit(src_[pos_]))
                throw ParseError("malformed exponent", save);
            while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
        std::string text(src_.substr(start, pos_ - start));
        double v = std::strtod(text.c_str(), nullptr);
        if (!std::isfinite(v)) throw ParseError("number out of range", start);
        return make_number(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        std::string name(src_.substr(start, pos_ - start));

        if (peek('(')) {
            auto info = lookup_function(name);
            if (!info) throw ParseError("unknown function '" + name + "'", start);
            ++pos_;
            std::vector<NodePtr> args;
            if (!peek(')')) {
                args.push_back(expr());
                while (peek(',')) {
                    ++pos_;
                    args.push_back(expr());
                }
            }
            expect(')');
            if (static_cast<int>(args.size()) != info->arity)
                throw ParseError("function '" + name + "' takes " + std::to_string(info->arity) +
                                     " argument(s), got " + std::to_string(args.size()),
                                 start);
            return make_call(info->id, std::move(args));
        }

        if (name == "pi") return make_number(std::numbers::pi);
        if (name == "t") return make_variable(name, 0);
        if (name.size() >= 2 && name[0] == 'x' && name[1] != '0') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i) digits = digits && is_digit(name[i]);
            if (digits) {
                if (name.size() > 6) throw ParseError("variable index too large '" + name + "'", start);
                int idx = std::stoi(name.substr(1));
                if (idx > dim_)
                    throw ParseError("variable '" + name + "' exceeds dimension " + std::to_string(dim_),
                                     start);
                return make_variable(name, idx);
            }
        }
        for (std::size_t i = 0; i < extras_.size(); ++i)
            if (extras_[i] == name) return make_variable(name, dim_ + 1 + static_cast<int>(i));
        if (lookup_function(name)) throw ParseError("function '" + name + "' requires arguments", start);
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        char c = src_[pos_];
        if (is_digit(c) || c == '.') return number();
        if (is_ident_start(c)) return identifier();
        if (c == '(') {
            DepthGuard g(*this);
            ++pos_;
            auto e = expr();
            expect(')');
            return e;
        }
        if (static_cast<unsigned char>(c) >= 0x80) throw ParseError("non-ASCII byte", pos_);
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }
};

}  // namespace detail

/// Parses `source` over variables t, x1..x`dim` and any `extras` (e.g. "k", "r").
inline Expr parse(std::string_view source, int dim, std::vector<std::string> extras = {}) {
    if (dim < 0) throw ConfigError("expression dimension must be nonnegative");
    detail::Parser p(source, dim, extras);
    auto root = p.parse_all();
    return Expr(std::move(root), dim, std::move(extras));
}

}  // namespace eulerlab::dsl
