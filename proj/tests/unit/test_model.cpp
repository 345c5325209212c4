#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "eulerlab/model/domain.hpp"
#include "eulerlab/model/mixed_norm.hpp"
#include "eulerlab/model/partition.hpp"
#include "eulerlab/model/problem.hpp"
#include "eulerlab/model/taming.hpp"

using namespace eulerlab;

TEST(Partition, KappaUniform) {
    auto p = PartitionFamily::uniform({4, 10}, 1.0);
    EXPECT_EQ(p.kappa(4, 0.3), 0.25);
    EXPECT_EQ(p.kappa(4, 0.25), 0.25);
    EXPECT_EQ(p.kappa(4, 1.0), 1.0);
    EXPECT_EQ(p.kappa(10, 0.3), 0.3);  // 3/10 is a grid point
    EXPECT_EQ(p.kappa(10, 0.7), 0.7);
    EXPECT_EQ(p.kappa(10, std::nextafter(0.7, 0.0)), 0.6);
    EXPECT_THROW(p.kappa(4, 1.5), DomainError);
    EXPECT_THROW(p.kappa(4, -0.1), DomainError);
    EXPECT_THROW(p.kappa(5, 0.1), IndexError);
}

TEST(Partition, KappaAtEveryGridPointIsExact) {
    auto p = PartitionFamily::uniform({3, 7, 10, 49, 1000}, 1.0);
    for (Index n : p.indices())
        for (double t : p.grid(n).times) EXPECT_EQ(p.kappa(n, t), t);
}

TEST(Partition, KappaInvariant) {
    auto p = PartitionFamily::uniform({8, 13, 100}, 2.0);
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (Index n : p.indices())
        for (int i = 0; i < 2000; ++i) {
            const double t = u(g);
            const double k = p.kappa(n, t);
            EXPECT_LE(k, t);
            EXPECT_LT(t, k + p.mesh(n, 2.0));
            EXPECT_TRUE(p.grid(n).find(k).has_value());
        }
}

TEST(Partition, ExplicitGrid) {
    auto p = PartitionFamily::explicit_grids({{1, {0, 0.1, 0.4, 1.0}}}, 1.0);
    EXPECT_EQ(p.kappa(1, 0.39), 0.1);
    EXPECT_DOUBLE_EQ(p.mesh(1, 1.0), 0.6);
    EXPECT_DOUBLE_EQ(p.mesh(1, 0.5), 0.3);
    EXPECT_THROW(p.mesh(1, 0.05), DomainError);
    EXPECT_NEAR(p.regularity(1, 1.0), 0.1 / 0.6, 1e-15);
    EXPECT_THROW(PartitionFamily::explicit_grids({{1, {0, 0.5, 0.4, 1.0}}}, 1.0), ConfigError);
    EXPECT_THROW(PartitionFamily::explicit_grids({{1, {0, 0.5}}}, 1.0), ConfigError);
}

TEST(Partition, UniformMeshAndDelta) {
    auto p = PartitionFamily::uniform({10, 20}, 1.0);
    EXPECT_DOUBLE_EQ(p.mesh(10, 1.0), 0.1);
    EXPECT_DOUBLE_EQ(p.delta(1.0), 1.0);
    EXPECT_LT(p.mesh(20, 1.0), p.mesh(10, 1.0));
}

TEST(Domain, IntervalChain) {
    auto d = DomainChain::interval(-1, 1);
    for (int k = 1; k <= 6; ++k) {
        auto [a, b] = d.bounding_box(k);
        EXPECT_EQ(a[0], -1 + std::ldexp(1.0, -k));
        EXPECT_EQ(b[0], 1 - std::ldexp(1.0, -k));
        EXPECT_EQ(d.boundary_distance(k, b), 0.0);
        EXPECT_EQ(d.boundary_distance(k, a), 0.0);
        EXPECT_FALSE(d.contains(k, b));
    }
    const double z = 0.0;
    EXPECT_DOUBLE_EQ(d.boundary_distance(2, std::span<const double>(&z, 1)), 0.75);
}

TEST(Domain, ChainIsMonotone) {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<DomainChain> chains{DomainChain::interval(-1, 1), DomainChain::box({-1, 0}, {1, 2}),
                                    DomainChain::ball({0, 0}, 2.0), DomainChain::whole_space(2)};
    for (const auto& d : chains)
        for (int i = 0; i < 10000; ++i) {
            std::vector<double> x{u(g), u(g)};
            for (int k = 1; k < 8; ++k)
                if (d.contains(k, x)) {
                    EXPECT_TRUE(d.contains(k + 1, x));
                    EXPECT_TRUE(d.contains(x));
                }
            auto [a, b] = d.bounding_box(1);
            bool inside_box = true;
            for (int j = 0; j < d.dim(); ++j) inside_box = inside_box && x[j] >= a[j] && x[j] <= b[j];
            if (!inside_box) EXPECT_FALSE(d.contains(1, x));
        }
}

TEST(Domain, BallBoundaryPointsAreOnBoundary) {
    auto d = DomainChain::ball({1, -1, 0}, 2.0);
    for (const auto& p : d.boundary_points(3, 500)) EXPECT_NEAR(d.boundary_distance(3, p), 0.0, 1e-14);
}

namespace {

QuadratureSpec box1(double lo, double hi) {
    QuadratureSpec q;
    q.lo = {lo};
    q.hi = {hi};
    q.cells = 200;
    return q;
}

}  // namespace

TEST(MixedNorm, Zero) {
    auto f = CoefficientField::scalar("0", 1);
    EXPECT_EQ(mixed_norm(f, {2, 2, 1}, box1(-1, 1)).value, 0.0);
}

TEST(MixedNorm, ConstantOnUnitSquare) {
    auto f = CoefficientField::scalar("indicator(x1)*indicator(1-x1)", 1);
    auto q = box1(0, 1);
    q.check_truncation = false;
    EXPECT_NEAR(mixed_norm(f, {2, 2, 1}, q).value, 1.0, 1e-12);
}

TEST(MixedNorm, SingularPowerAgainstIndependentQuadrature) {
    // |x|^{-1/5} on |x| <= 1, p = 4, q = 2, T = 1
    auto f = CoefficientField::scalar("abs(x1)^(-0.2)*indicator(1-abs(x1))", 1);
    boost::math::quadrature::tanh_sinh<double> ts;
    const double inner = 2.0 * ts.integrate([](double x) { return std::pow(x, -0.8); }, 0.0, 1.0);
    EXPECT_NEAR(inner, 10.0, 1e-9);
    const double oracle = std::pow(inner, 0.25);
    auto q = box1(-1, 1);
    q.singular_points = {{0.0}};
    q.check_truncation = false;
    auto r = mixed_norm(f, {4, 2, 1}, q);
    EXPECT_NEAR(r.value, oracle, 1e-6);
}

TEST(MixedNorm, SupInSpaceAndTime) {
    auto f = CoefficientField::scalar("t*exp(-x1^2)", 1);
    auto q = box1(-3, 3);
    q.check_truncation = false;
    auto r = mixed_norm(f, {kInf, kInf, 2.0}, q);
    EXPECT_NEAR(r.value, 2.0, 1e-2);
    // sup_x then (∫ t^2 dt)^{1/2} on [0,1]
    EXPECT_NEAR(mixed_norm(f, {kInf, 2, 1.0}, q).value, std::sqrt(1.0 / 3.0), 1e-3);
}

TEST(MixedNorm, HomogeneousMonotoneTriangle) {
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(-2, 2);
    auto q = box1(-4, 4);
    q.check_truncation = false;
    for (int i = 0; i < 10; ++i) {
        const double a = u(g), b = u(g), c = u(g);
        const std::string fs = std::to_string(a) + "*exp(-(x1 - " + std::to_string(b) + ")^2)";
        const std::string gs = "sin(" + std::to_string(c) + "*x1 + t)";
        auto f = CoefficientField::scalar(fs, 1);
        auto h = CoefficientField::scalar(gs, 1);
        auto fh = CoefficientField::scalar("(" + fs + ") + (" + gs + ")", 1);
        auto f3 = CoefficientField::scalar("-3*(" + fs + ")", 1);
        const MixedNorm n{3, 2, 1};
        const double nf = mixed_norm(f, n, q).value;
        EXPECT_NEAR(mixed_norm(f3, n, q).value, 3 * nf, 1e-9 * (1 + nf));
        EXPECT_LE(mixed_norm(fh, n, q).value, nf + mixed_norm(h, n, q).value + 1e-9);
        EXPECT_LE(mixed_norm(h, {3, 2, 0.5}, q).value, mixed_norm(h, n, q).value);
    }
}

TEST(MixedNorm, TruncationFlagged) {
    auto f = CoefficientField::scalar("1", 1);
    auto r = mixed_norm(f, {2, 2, 1}, box1(-1, 1));
    EXPECT_TRUE(r.lower_bound);
    auto g = CoefficientField::scalar("exp(-x1^2)", 1);
    EXPECT_FALSE(mixed_norm(g, {2, 2, 1}, box1(-10, 10)).lower_bound);
}

TEST(MixedNorm, NonIntegrableSingularityFlagged) {
    // ∫ |x|^{-2p/5} dx diverges for 2p/5 >= 1
    auto f = CoefficientField::scalar("abs(x1)^(-0.2)*indicator(1-abs(x1))", 1);
    auto q = box1(-1, 1);
    q.singular_points = {{0.0}};
    EXPECT_FALSE(mixed_norm(f, {4, 4, 1}, q).lower_bound);   // 2p = 4 < 5
    EXPECT_TRUE(mixed_norm(f, {6, 4, 1}, q).lower_bound);    // exponent 1.2
}

namespace {

ProblemSpec eq15() {
    ProblemSpec p;
    p.name = "eq-1-5";
    p.drift = CoefficientField::vector({"abs(x1)^(-0.2)"}, 1);
    p.diffusion = CoefficientField::parse({{"2+sin(x1)"}}, 1);
    p.initial = InitialLaw::point_mass({0.0});
    return p;
}

}  // namespace

TEST(Taming, CapIsExactAndMatchesMin) {
    auto prob = eq15();
    auto part = PartitionFamily::uniform({8, 64, 256}, 1.0);
    TamingSchedule sched(prob, part, NormParams{2, 2, 1, 0.25}, 4.0, {{8, 5.0}});
    EXPECT_EQ(sched.cap(8), 5.0);
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-1e-3, 1e-3);
    Vec out;
    for (int i = 0; i < 10000; ++i) {
        const double x = i == 0 ? 0.0 : u(g);
        for (Index n : part.indices()) {
            sched.tamed_drift(n, 0.0, std::span<const double>(&x, 1), out);
            EXPECT_LE(std::fabs(out(0)), sched.cap(n));
            if (n == 8) EXPECT_DOUBLE_EQ(out(0), std::min(std::pow(std::fabs(x), -0.2), 5.0));
        }
    }
    EXPECT_DOUBLE_EQ(sched.cap(256), 4.0 * std::pow(1.0 / 256, -0.125));
}

TEST(Taming, ParameterChecks) {
    EXPECT_NO_THROW((NormParams{4, 2, 1, 0.25}.validate(1)));
    EXPECT_THROW((NormParams{1, 1, 1, 0.25}.validate(1)), ConfigError);
    EXPECT_THROW((NormParams{4, 2, 1, 0.6}.validate(1)), ConfigError);
    EXPECT_THROW((NormParams{1.5, 1.5, 1, 0.1}.validate(1)), ConfigError);  // 1/1.5 + 2/1.5 = 2
    EXPECT_THROW((NormParams{0.9, 2, 1, 0.1}.validate(1)), ConfigError);
}

TEST(Taming, BoundBIsConstantForDefaultCaps) {
    auto prob = eq15();
    auto part = PartitionFamily::uniform({8, 16, 32, 64, 128, 256}, 1.0);
    TamingSchedule sched(prob, part, NormParams{2, 2, 1, 0.25});
    QuadratureSpec q = box1(-10, 10);
    q.singular_points = {{0.0}};
    q.check_truncation = false;
    auto B = sched.bound_B(1.0, q);
    EXPECT_NEAR(B.value, 4.0, 1e-9);
}

TEST(Taming, DifferenceNormDecreases) {
    auto prob = eq15();
    auto part = PartitionFamily::uniform({8, 32, 128}, 1.0);
    TamingSchedule sched(prob, part, NormParams{2, 2, 1, 0.25});
    QuadratureSpec q = box1(-10, 10);
    q.singular_points = {{0.0}};
    double prev = HUGE_VAL;
    for (Index n : part.indices()) {
        auto r = sched.difference_norm(n, 1.0, 4.0, 4.0, q);
        EXPECT_FALSE(r.lower_bound) << r.note;
        EXPECT_LT(r.value, prev);
        prev = r.value;
    }
}

namespace {

ProblemSpec eq11(double alpha) {
    ProblemSpec p;
    p.name = "eq-1-1";
    dsl::PoleRule pole;
    pole.kind = dsl::PoleRule::Kind::odd_integers;
    p.drift = CoefficientField::parse({{"tan(-1.5707963267948966*x1)+1"}}, 1, {}, pole);
    p.diffusion = CoefficientField::parse({{"abs(1-abs(x1))^" + std::to_string(alpha) + "*max(x1,0)^0.5"}}, 1);
    p.initial = InitialLaw::point_mass({0.0});
    p.domain = DomainChain::interval(-1, 1);
    p.lyapunov = LyapunovSpec{CoefficientField::scalar("(2-x1^2)/(1-x1^2)", 1), std::nullopt,
                              CoefficientField::scalar("0.5", 0), 1e-4};
    return p;
}

}  // namespace

TEST(Lyapunov, BoundaryInfMatchesClosedForm) {
    auto p = eq11(0.7);
    double prev = 0.0;
    for (int k = 1; k <= 6; ++k) {
        const double a = 1 - std::ldexp(1.0, -k);
        const double want = (2 - a * a) / (1 - a * a);
        EXPECT_NEAR(p.boundary_inf(k, 1.0), want, 1e-12);
        EXPECT_GT(p.boundary_inf(k, 1.0), prev);
        prev = p.boundary_inf(k, 1.0);
    }
    EXPECT_NEAR(p.integrated_rate(1.0), 0.5, 1e-14);
}

TEST(Lyapunov, FiniteDifferenceGenerator) {
    // V = x^2 + t for b = -x, σ = 1: LV = 1 - 2x^2 + 1
    ProblemSpec p;
    p.drift = CoefficientField::vector({"-x1"}, 1);
    p.diffusion = CoefficientField::parse({{"1"}}, 1);
    p.initial = InitialLaw::point_mass({0.0});
    p.lyapunov = LyapunovSpec{CoefficientField::scalar("x1^2 + t", 1), std::nullopt,
                              CoefficientField::scalar("1", 0), 1e-4};
    for (double t : {0.0, 1e-6, 0.5})
        for (double x : {-2.0, 0.0, 0.3, 5.0}) {
            const double want = 1 - 2 * x * x + 1;
            EXPECT_NEAR(p.generator_applied(t, std::span<const double>(&x, 1)), want, 1e-3 * (1 + std::fabs(want)));
        }
}

TEST(Problem, CoefficientsVanishOutsideDomain) {
    auto p = eq11(0.7);
    Vec b;
    Mat s;
    const double x = 1.5;
    p.drift_at(0.0, std::span<const double>(&x, 1), b);
    p.diffusion_at(0.0, std::span<const double>(&x, 1), s);
    EXPECT_EQ(b(0), 0.0);
    EXPECT_EQ(s(0, 0), 0.0);
    EXPECT_NO_THROW(p.validate());
}

TEST(Problem, SampledEnvelopeFallback) {
    auto p = eq11(0.7);
    // sup of |b| on D_2 is tan(3π/8)+1; a 10^3 grid gets close from below
    const double exact = std::tan(std::numbers::pi / 2 * 0.75) + 1;
    const double m = p.envelope_at(2, 0.0);
    EXPECT_LE(m, exact + 1e-12);
    EXPECT_GT(m, 0.98 * exact);
}
