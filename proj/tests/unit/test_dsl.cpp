#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "eulerlab/dsl/field.hpp"
#include "eulerlab/dsl/parser.hpp"
#include "eulerlab/dsl/program.hpp"

using namespace eulerlab;
using namespace eulerlab::dsl;

namespace {

double ev(const std::string& src, std::vector<double> x = {}, double t = 0.0) {
    const int d = static_cast<int>(x.size());
    Program p(parse(src, d));
    return p(t, x);
}

// Random expression text over the whole grammar.
std::string random_expr(std::mt19937_64& g, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    static const char* unary_funcs[] = {"sin", "cos", "exp", "abs", "sign", "sqrt", "floor", "indicator", "tan"};
    static const char* binary_funcs[] = {"min", "max", "pow"};
    switch (pick(g)) {
        case 0: return std::to_string(std::uniform_int_distribution<int>(0, 99)(g));
        case 1: return std::uniform_int_distribution<int>(0, 1)(g) ? "x1" : "x2";
        case 2: return std::uniform_int_distribution<int>(0, 1)(g) ? "t" : "2.5e-1";
        case 3: return random_expr(g, depth - 1) + " + " + random_expr(g, depth - 1);
        case 4: return random_expr(g, depth - 1) + "*" + random_expr(g, depth - 1);
        case 5: return random_expr(g, depth - 1) + "-" + random_expr(g, depth - 1) + "/" + random_expr(g, depth - 1);
        case 6: return "-" + random_expr(g, depth - 1) + "^" + random_expr(g, depth - 1);
        case 7: return "(" + random_expr(g, depth - 1) + ")";
        case 8: return std::string(unary_funcs[std::uniform_int_distribution<int>(0, 8)(g)]) + "(" +
                       random_expr(g, depth - 1) + ")";
        default:
            return std::string(binary_funcs[std::uniform_int_distribution<int>(0, 2)(g)]) + "(" +
                   random_expr(g, depth - 1) + ", " + random_expr(g, depth - 1) + ")";
    }
}

}  // namespace

TEST(Parse, LiteralZero) {
    auto e = parse("0", 1);
    EXPECT_EQ(e.root().kind, Node::Kind::number);
    EXPECT_EQ(e.root().value, 0.0);
}

TEST(Parse, TanDriftTree) {
    auto e = parse("tan(-1.5707963267948966*x1)+1", 1);
    const Node& r = e.root();
    ASSERT_EQ(r.kind, Node::Kind::binary);
    EXPECT_EQ(r.op, BinOp::add);
    const Node& call = *r.children[0];
    ASSERT_EQ(call.kind, Node::Kind::call);
    EXPECT_EQ(call.func, Func::tan);
    const Node& prod = *call.children[0];
    ASSERT_EQ(prod.kind, Node::Kind::binary);
    EXPECT_EQ(prod.op, BinOp::mul);
    ASSERT_EQ(prod.children[0]->kind, Node::Kind::negate);
    EXPECT_EQ(prod.children[0]->children[0]->value, 1.5707963267948966);
    EXPECT_EQ(prod.children[1]->slot, 1);
    EXPECT_EQ(r.children[1]->value, 1.0);
}

TEST(Parse, TamedSingularDrift) {
    auto e = parse("min(abs(x1)^(-0.2), 5)", 1);
    EXPECT_EQ(e.root().func, Func::min);
    Program p(e);
    const double x = 0.5;
    EXPECT_DOUBLE_EQ(p(0, std::span<const double>(&x, 1)), std::min(std::pow(0.5, -0.2), 5.0));
    const double z = 0.0;
    EXPECT_EQ(p(0, std::span<const double>(&z, 1)), 5.0);
}

TEST(Parse, Precedence) {
    EXPECT_EQ(ev("2+3*4"), 14.0);
    EXPECT_EQ(ev("-2^2"), -4.0);
    EXPECT_EQ(ev("2^3^2"), 512.0);
    EXPECT_EQ(ev("2^-1"), 0.5);
    EXPECT_EQ(ev("8/4/2"), 1.0);
    EXPECT_EQ(ev("1-2-3"), -4.0);
    EXPECT_EQ(ev("--3"), 3.0);
}

TEST(Parse, Errors) {
    try {
        parse("1 + $", 1);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 4u);
    }
    EXPECT_THROW(parse("sin(1, 2)", 1), ParseError);
    EXPECT_THROW(parse("min(1)", 1), ParseError);
    EXPECT_THROW(parse("foo(1)", 1), ParseError);
    EXPECT_THROW(parse("y", 1), ParseError);
    EXPECT_THROW(parse("x3", 2), ParseError);
    EXPECT_THROW(parse("x0", 2), ParseError);
    EXPECT_THROW(parse("0x1F", 1), ParseError);
    EXPECT_THROW(parse("", 1), ParseError);
    EXPECT_THROW(parse("(1", 1), ParseError);
    EXPECT_THROW(parse("1e999", 1), ParseError);
    EXPECT_THROW(parse("x1 \xc3\xa9", 1), ParseError);
    EXPECT_NO_THROW(parse("x2", 2));
}

TEST(Parse, ExcessVariableMessage) {
    try {
        parse("x1 + x3", 2);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("dimension"), std::string::npos);
        EXPECT_EQ(e.offset(), 5u);
    }
}

TEST(Parse, DeepNestingIsRejectedNotCrashing) {
    std::string s(5000, '(');
    s += "1";
    s += std::string(5000, ')');
    EXPECT_THROW(parse(s, 1), ParseError);
}

TEST(Parse, FuzzCorpusNeverCrashes) {
    std::mt19937_64 g(7);
    const std::string alphabet = "0123456789.+-*/^(),xte piabsminlogsqrtE \t";
    for (int i = 0; i < 20000; ++i) {
        std::string s;
        const int len = std::uniform_int_distribution<int>(0, 30)(g);
        for (int j = 0; j < len; ++j) {
            if (std::uniform_int_distribution<int>(0, 50)(g) == 0)
                s += static_cast<char>(std::uniform_int_distribution<int>(0, 255)(g));
            else
                s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(g)];
        }
        try {
            auto e = parse(s, 2);
            EXPECT_FALSE(e.empty());
        } catch (const ParseError&) {
        }
    }
}

TEST(Parse, PrintParseRoundTrip) {
    std::mt19937_64 g(11);
    for (int i = 0; i < 1000; ++i) {
        const std::string src = random_expr(g, 4);
        auto e = parse(src, 2);
        const std::string printed = e.print();
        auto e2 = parse(printed, 2);
        EXPECT_TRUE(e == e2) << src << " -> " << printed;
        EXPECT_EQ(e2.print(), printed);
    }
}

TEST(Parse, RoundTripKeepsExactLiterals) {
    auto e = parse("0.1 + 1.5707963267948966 + 1e-300", 1);
    EXPECT_TRUE(parse(e.print(), 1) == e);
}

TEST(Parse, PiIsALiteral) { EXPECT_EQ(ev("pi"), std::numbers::pi); }

TEST(Eval, SignAtZero) {
    EXPECT_EQ(ev("sign(x1)", {0.0}), 0.0);
    EXPECT_EQ(ev("sign(x1)", {-2.0}), -1.0);
    EXPECT_EQ(ev("tan(-1.5707963267948966*x1) + sign(x1)", {0.0}), 0.0);
}

TEST(Eval, Indicator) {
    EXPECT_EQ(ev("indicator(x1)", {0.0}), 1.0);
    EXPECT_EQ(ev("indicator(x1)", {-1e-300}), 0.0);
    EXPECT_EQ(ev("indicator(1 - abs(x1))", {3.0}), 0.0);
}

TEST(Eval, SqrtDiffusionVanishesAtZero) {
    for (double a : {0.1, 0.5, 0.7, 1.0}) {
        Program p(parse("abs(1-abs(x1))^a*max(x1,0)^0.5", 1, {"a"}));
        const double x = 0.0;
        EXPECT_EQ(p(0.0, std::span<const double>(&x, 1), std::span<const double>(&a, 1)), 0.0);
    }
}

TEST(Eval, SinDiffusionAtHalfPi) {
    const double x = std::numbers::pi / 2;
    // independent evaluation
    const double oracle = 2.0 + std::sin(x);
    EXPECT_EQ(ev("2+sin(x1)", {x}), oracle);
    EXPECT_DOUBLE_EQ(oracle, 3.0);
}

TEST(Eval, MatchesDirectArithmetic) {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-3, 3);
    Program p(parse("exp(-x1^2/2)*cos(t*x2) + max(x1, x2) - floor(x2) + sqrt(abs(x1*x2))", 2));
    for (int i = 0; i < 1000; ++i) {
        const double t = u(g), x1 = u(g), x2 = u(g);
        const double want = std::exp(-x1 * x1 / 2) * std::cos(t * x2) + std::max(x1, x2) - std::floor(x2) +
                            std::sqrt(std::fabs(x1 * x2));
        const double x[] = {x1, x2};
        EXPECT_DOUBLE_EQ(p(t, x), want);
    }
}

TEST(Eval, LogOfNegativeIsDomainError) {
    Program p(parse("1 + log(x1)", 1));
    const double x = -1.0;
    EXPECT_THROW(p(0.0, std::span<const double>(&x, 1)), EvalError);
    const double y = std::exp(2.0);
    EXPECT_DOUBLE_EQ(p(0.0, std::span<const double>(&y, 1)), 3.0);
}

TEST(Eval, NanReportsOriginatingSubexpression) {
    Program p(parse("1 + sqrt(x1 - 2) * 3", 1));
    const double x = 0.0;
    try {
        p(0.0, std::span<const double>(&x, 1));
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.subexpression(), "sqrt((x1 - 2))");
    }
    EXPECT_TRUE(std::isnan(p.eval_unchecked(0.0, std::span<const double>(&x, 1))));
}

TEST(Eval, NanFromInfMinusInf) {
    Program p(parse("x1^(-1) - x1^(-1)", 1));
    const double x = 0.0;
    try {
        p(0.0, std::span<const double>(&x, 1));
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.subexpression(), "((x1 ^ (-1)) - (x1 ^ (-1)))");
    }
}

TEST(Eval, TimeVariable) { EXPECT_EQ(ev("t^2 + x1", {1.0}, 3.0), 10.0); }

TEST(Field, PoleConventionOverridesTan) {
    PoleRule rule;
    rule.kind = PoleRule::Kind::odd_integers;
    rule.value = 0.0;
    auto f = CoefficientField::parse({{"tan(-1.5707963267948966*x1)+1"}}, 1, {}, rule);
    Eigen::MatrixXd out;
    const double one = 1.0, three = -3.0, half = 0.5;
    f.eval(0.0, std::span<const double>(&one, 1), out);
    EXPECT_EQ(out(0, 0), 0.0);
    f.eval(0.0, std::span<const double>(&three, 1), out);
    EXPECT_EQ(out(0, 0), 0.0);
    f.eval(0.0, std::span<const double>(&half, 1), out);
    EXPECT_DOUBLE_EQ(out(0, 0), std::tan(-std::numbers::pi / 4) + 1);
}

TEST(Field, MatrixShapeAndZero) {
    auto f = CoefficientField::parse({{"1", "x1"}, {"x2", "0"}}, 2);
    EXPECT_EQ(f.rows(), 2);
    EXPECT_EQ(f.cols(), 2);
    Eigen::MatrixXd out;
    const double x[] = {3.0, 4.0};
    f.eval(0.0, x, out);
    EXPECT_EQ(out(0, 1), 3.0);
    EXPECT_EQ(out(1, 0), 4.0);
    EXPECT_FALSE(f.is_zero());
    EXPECT_TRUE(CoefficientField::constant(2, 1, 2, 0.0).is_zero());
    EXPECT_THROW(CoefficientField::parse({{"1", "2"}, {"3"}}, 2), ConfigError);
}

TEST(Field, ExtrasAreNamed) {
    auto f = CoefficientField::scalar("k^2 + t", 0, {"k"});
    const double k = 3.0;
    EXPECT_EQ(f.eval_scalar(1.0, {}, std::span<const double>(&k, 1)), 10.0);
}
