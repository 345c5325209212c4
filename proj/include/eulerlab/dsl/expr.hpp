#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eulerlab::dsl {

enum class Func : std::uint8_t {
    tan, sin, cos, exp, log, abs, sign, sqrt, floor, indicator, min, max, pow
};

struct FuncInfo {
    std::string_view name;
    Func id;
    int arity;
};

inline constexpr FuncInfo kFunctions[] = {
    {"tan", Func::tan, 1},     {"sin", Func::sin, 1},     {"cos", Func::cos, 1},
    {"exp", Func::exp, 1},     {"log", Func::log, 1},     {"abs", Func::abs, 1},
    {"sign", Func::sign, 1},   {"sqrt", Func::sqrt, 1},   {"floor", Func::floor, 1},
    {"indicator", Func::indicator, 1},
    {"min", Func::min, 2},     {"max", Func::max, 2},     {"pow", Func::pow, 2},
};

inline std::optional<FuncInfo> lookup_function(std::string_view name) {
    for (const auto& f : kFunctions)
        if (f.name == name) return f;
    return std::nullopt;
}

inline std::string_view function_name(Func f) {
    for (const auto& info : kFunctions)
        if (info.id == f) return info.name;
    return "?";
}

enum class BinOp : std::uint8_t { add, sub, mul, div, pow };

inline char binop_symbol(BinOp op) {
    switch (op) {
        case BinOp::add: return '+';
        case BinOp::sub: return '-';
        case BinOp::mul: return '*';
        case BinOp::div: return '/';
        case BinOp::pow: return '^';
    }
    return '?';
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable expression tree node.
struct Node {
    enum class Kind : std::uint8_t { number, variable, negate, binary, call };

    Kind kind;
    double value = 0.0;       // number
    int slot = -1;            // variable: 0 = t, 1..d = x1..xd, then extras
    std::string name;         // variable name
    BinOp op = BinOp::add;    // binary
    Func func = Func::tan;    // call
    std::vector<NodePtr> children;
};

inline NodePtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::number;
    n->value = v;
    return n;
}

inline NodePtr make_variable(std::string name, int slot) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::variable;
    n->name = std::move(name);
    n->slot = slot;
    return n;
}

inline NodePtr make_negate(NodePtr arg) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::negate;
    n->children.push_back(std::move(arg));
    return n;
}

inline NodePtr make_binary(BinOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->children.push_back(std::move(lhs));
    n->children.push_back(std::move(rhs));
    return n;
}

inline NodePtr make_call(Func f, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::call;
    n->func = f;
    n->children = std::move(args);
    return n;
}

inline bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    switch (a.kind) {
        case Node::Kind::number:
            // bitwise comparison keeps -0.0 and 0.0 apart
            if (std::bit_cast<std::uint64_t>(a.value) != std::bit_cast<std::uint64_t>(b.value))
                return false;
            break;
        case Node::Kind::variable:
            if (a.slot != b.slot || a.name != b.name) return false;
            break;
        case Node::Kind::binary:
            if (a.op != b.op) return false;
            break;
        case Node::Kind::call:
            if (a.func != b.func) return false;
            break;
        case Node::Kind::negate:
            break;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(*a.children[i], *b.children[i])) return false;
    return true;
}

inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case Node::Kind::number:
            out += format_number(n.value);
            return;
        case Node::Kind::variable:
            out += n.name;
            return;
        case Node::Kind::negate:
            out += "(-";
            print_node(*n.children[0], out);
            out += ')';
            return;
        case Node::Kind::binary:
            out += '(';
            print_node(*n.children[0], out);
            out += ' ';
            out += binop_symbol(n.op);
            out += ' ';
            print_node(*n.children[1], out);
            out += ')';
            return;
        case Node::Kind::call:
            out += function_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += ", ";
                print_node(*n.children[i], out);
            }
            out += ')';
            return;
    }
}

/// Parsed coefficient expression. Value type; copies share the immutable tree.
class Expr {
public:
    Expr() = default;
    explicit Expr(NodePtr root, int dim, std::vector<std::string> extras = {})
        : root_(std::move(root)), dim_(dim), extras_(std::move(extras)) {}

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }
    bool empty() const { return !root_; }
    int dim() const { return dim_; }
    const std::vector<std::string>& extras() const { return extras_; }

    /// Fully parenthesised text; parse(print(e)) reproduces e.
    std::string print() const {
        std::string s;
        if (root_) print_node(*root_, s);
        return s;
    }

    friend bool operator==(const Expr& a, const Expr& b) {
        if (!a.root_ || !b.root_) return !a.root_ && !b.root_;
        return structurally_equal(*a.root_, *b.root_);
    }

private:
    NodePtr root_;
    int dim_ = 0;
    std::vector<std::string> extras_;
};

}  // namespace eulerlab::dsl
