#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "eulerlab/dsl/expr.hpp"
#include "eulerlab/error.hpp"

namespace eulerlab::dsl {

inline double sign_of(double v) {
    if (v > 0) return 1.0;
    if (v < 0) return -1.0;
    return v;  // 0 -> 0, NaN stays NaN
}

inline double nan_min(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
    return b < a ? b : a;
}

inline double nan_max(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
    return a < b ? b : a;
}

/// Applies a unary built-in. Returns false when the argument lies outside the
/// function's domain (only log of a negative number).
inline bool apply_unary(Func f, double a, double& out) {
    switch (f) {
        case Func::tan: out = std::tan(a); return true;
        case Func::sin: out = std::sin(a); return true;
        case Func::cos: out = std::cos(a); return true;
        case Func::exp: out = std::exp(a); return true;
        case Func::log:
            if (a < 0) return false;
            out = std::log(a);
            return true;
        case Func::abs: out = std::fabs(a); return true;
        case Func::sign: out = sign_of(a); return true;
        case Func::sqrt: out = std::sqrt(a); return true;
        case Func::floor: out = std::floor(a); return true;
        case Func::indicator:
            out = std::isnan(a) ? a : (a >= 0 ? 1.0 : 0.0);
            return true;
        default: break;
    }
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
}

inline double apply_binary_func(Func f, double a, double b) {
    switch (f) {
        case Func::min: return nan_min(a, b);
        case Func::max: return nan_max(a, b);
        case Func::pow: return std::pow(a, b);
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double apply_binop(BinOp op, double a, double b) {
    switch (op) {
        case BinOp::add: return a + b;
        case BinOp::sub: return a - b;
        case BinOp::mul: return a * b;
        case BinOp::div: return a / b;
        case BinOp::pow: return std::pow(a, b);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

struct Located {
    double value;
    const Node* nan_origin;  // deepest node whose own operation produced NaN
};

inline Located eval_tree(const Node& n, std::span<const double> vars) {
    switch (n.kind) {
        case Node::Kind::number: return {n.value, nullptr};
        case Node::Kind::variable: return {vars[static_cast<std::size_t>(n.slot)], nullptr};
        case Node::Kind::negate: {
            auto a = eval_tree(*n.children[0], vars);
            return {-a.value, a.nan_origin};
        }
        case Node::Kind::binary: {
            auto a = eval_tree(*n.children[0], vars);
            auto b = eval_tree(*n.children[1], vars);
            double v = apply_binop(n.op, a.value, b.value);
            const Node* origin = a.nan_origin ? a.nan_origin : b.nan_origin;
            if (!origin && std::isnan(v)) origin = &n;
            return {v, origin};
        }
        case Node::Kind::call: {
            std::array<Located, 2> args{};
            for (std::size_t i = 0; i < n.children.size(); ++i) args[i] = eval_tree(*n.children[i], vars);
            double v;
            if (n.children.size() == 1) {
                if (!apply_unary(n.func, args[0].value, v)) {
                    std::string s;
                    print_node(n, s);
                    throw EvalError("domain error: log of negative argument", s);
                }
            } else {
                v = apply_binary_func(n.func, args[0].value, args[1].value);
            }
            const Node* origin = args[0].nan_origin ? args[0].nan_origin : args[1].nan_origin;
            if (!origin && std::isnan(v)) origin = &n;
            return {v, origin};
        }
    }
    return {std::numeric_limits<double>::quiet_NaN(), &n};
}

}  // namespace detail

/// Flattened postfix form of an Expr. Evaluation is pure and reentrant.
class Program {
public:
    Program() = default;

    explicit Program(Expr e) : expr_(std::move(e)) {
        if (expr_.empty()) return;
        int depth = 0;
        compile(expr_.root(), depth);
        if (max_depth_ > kStack) heap_stack_ = true;
    }

    const Expr& expr() const { return expr_; }
    int dim() const { return expr_.dim(); }
    std::size_t slot_count() const { return 1 + static_cast<std::size_t>(expr_.dim()) + expr_.extras().size(); }

    /// Evaluates at (t, x, extras). Throws EvalError on NaN (naming the
    /// originating subexpression) or log of a negative argument.
    double operator()(double t, std::span<const double> x, std::span<const double> extras = {}) const {
        return with_slots(t, x, extras, [&](std::span<const double> slots) {
            double v = run(slots);
            if (std::isnan(v)) report_nan(slots);
            return v;
        });
    }

    /// Evaluation that returns NaN instead of throwing (log of a negative
    /// argument still throws).
    double eval_unchecked(double t, std::span<const double> x, std::span<const double> extras = {}) const {
        return with_slots(t, x, extras, [&](std::span<const double> slots) { return run(slots); });
    }

private:
    enum class Op : std::uint8_t { constant, variable, negate, binary, unary_call, binary_call };
    struct Instr {
        Op op;
        std::uint8_t code;  // BinOp or Func
        int slot;
        double value;
        const Node* node;
    };
    static constexpr int kStack = 64;

    Expr expr_;
    std::vector<Instr> code_;
    int max_depth_ = 0;
    bool heap_stack_ = false;

    void compile(const Node& n, int& depth) {
        switch (n.kind) {
            case Node::Kind::number:
                code_.push_back({Op::constant, 0, -1, n.value, &n});
                bump(depth, 1);
                return;
            case Node::Kind::variable:
                code_.push_back({Op::variable, 0, n.slot, 0.0, &n});
                bump(depth, 1);
                return;
            case Node::Kind::negate:
                compile(*n.children[0], depth);
                code_.push_back({Op::negate, 0, -1, 0.0, &n});
                return;
            case Node::Kind::binary:
                compile(*n.children[0], depth);
                compile(*n.children[1], depth);
                code_.push_back({Op::binary, static_cast<std::uint8_t>(n.op), -1, 0.0, &n});
                --depth;
                return;
            case Node::Kind::call:
                for (const auto& c : n.children) compile(*c, depth);
                if (n.children.size() == 1) {
                    code_.push_back({Op::unary_call, static_cast<std::uint8_t>(n.func), -1, 0.0, &n});
                } else {
                    code_.push_back({Op::binary_call, static_cast<std::uint8_t>(n.func), -1, 0.0, &n});
                    --depth;
                }
                return;
        }
    }

    template <class F>
    double with_slots(double t, std::span<const double> x, std::span<const double> extras, F&& body) const {
        double small[16];
        std::vector<double> big;
        double* vars = small;
        const std::size_t nslots = slot_count();
        if (nslots > 16) {
            big.resize(nslots);
            vars = big.data();
        }
        vars[0] = t;
        const auto d = static_cast<std::size_t>(expr_.dim());
        for (std::size_t i = 0; i < d; ++i) vars[1 + i] = x[i];
        for (std::size_t i = 0; i < expr_.extras().size(); ++i) vars[1 + d + i] = extras[i];
        return body(std::span<const double>(vars, nslots));
    }

    void bump(int& depth, int by) {
        depth += by;
        if (depth > max_depth_) max_depth_ = depth;
    }

    double run(std::span<const double> vars) const {
        if (code_.empty()) return 0.0;
        double small[kStack];
        std::vector<double> big;
        double* st = small;
        if (heap_stack_) {
            big.resize(static_cast<std::size_t>(max_depth_));
            st = big.data();
        }
        int sp = 0;
        for (const auto& ins : code_) {
            switch (ins.op) {
                case Op::constant: st[sp++] = ins.value; break;
                case Op::variable: st[sp++] = vars[static_cast<std::size_t>(ins.slot)]; break;
                case Op::negate: st[sp - 1] = -st[sp - 1]; break;
                case Op::binary:
                    --sp;
                    st[sp - 1] = apply_binop(static_cast<BinOp>(ins.code), st[sp - 1], st[sp]);
                    break;
                case Op::unary_call: {
                    double out;
                    if (!apply_unary(static_cast<Func>(ins.code), st[sp - 1], out)) {
                        std::string s;
                        print_node(*ins.node, s);
                        throw EvalError("domain error: log of negative argument", s);
                    }
                    st[sp - 1] = out;
                    break;
                }
                case Op::binary_call:
                    --sp;
                    st[sp - 1] = apply_binary_func(static_cast<Func>(ins.code), st[sp - 1], st[sp]);
                    break;
            }
        }
        return st[0];
    }

    [[noreturn]] void report_nan(std::span<const double> vars) const {
        auto located = detail::eval_tree(expr_.root(), vars);
        std::string s;
        print_node(located.nan_origin ? *located.nan_origin : expr_.root(), s);
        throw EvalError("NaN produced", s);
    }
};

}  // namespace eulerlab::dsl
