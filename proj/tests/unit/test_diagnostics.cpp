#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "eulerlab/diagnostics/diagnostics.hpp"

using namespace eulerlab;

namespace {

ProblemSpec make(const std::vector<std::string>& drift, const std::vector<std::vector<std::string>>& diff,
                 std::vector<double> x0) {
    ProblemSpec p;
    p.dim_state = static_cast<int>(drift.size());
    p.dim_noise = static_cast<int>(diff.front().size());
    p.drift = CoefficientField::vector(drift, p.dim_state);
    p.diffusion = CoefficientField::parse(diff, p.dim_state);
    p.initial = InitialLaw::point_mass(std::move(x0));
    p.validate();
    return p;
}

ProblemSpec tan_problem() {
    auto p = make({"tan(-1.5707963267948966*x1)+1"}, {{"abs(1-abs(x1))^0.7*max(x1,0)^0.5"}}, {0.0});
    p.domain = DomainChain::interval(-1, 1);
    p.lyapunov = LyapunovSpec{CoefficientField::scalar("(2-x1^2)/(1-x1^2)", 1), std::nullopt,
                              CoefficientField::scalar("0.5", 0)};
    p.validate();
    return p;
}

RunContext context(const ProblemSpec& p, const PartitionFamily& part, std::size_t N, std::uint64_t seed = 1) {
    RunContext c;
    c.problem = &p;
    c.partition = &part;
    c.ensemble = {seed, N, 1};
    return c;
}

}  // namespace

TEST(Cauchy, IdenticalIndicesGiveZero) {
    auto p = make({"-x1"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({16}, 1.0);
    auto r = cauchy_in_probability(context(p, part, 200), {{{16, 16}}, 0.05});
    EXPECT_EQ(r.rows[0].statistic, 0.0);
    EXPECT_GT(r.half_width, 0.0);
    EXPECT_EQ(r.verdict, verdict::shape_pass);
}

TEST(Cauchy, UncoupledIsConfigError) {
    auto p = make({"-x1"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({16, 32}, 1.0);
    CauchyParams par{{{16, 32}}, 0.05};
    par.coupled = false;
    EXPECT_THROW(cauchy_in_probability(context(p, part, 10), par), ConfigError);
    EXPECT_THROW(cauchy_in_probability(context(p, part, 10), {{{16, 64}}, 0.05}), ConfigError);
}

TEST(Cauchy, GbmStrictlyDecreasing) {
    auto p = make({"0.05*x1"}, {{"0.2*x1"}}, {1.0});
    auto part = PartitionFamily::uniform({10, 20, 40, 80}, 1.0);
    CauchyParams par{{{40, 80}, {10, 20}, {20, 40}}, 0.01};
    par.reference_n = 0;
    auto r = cauchy_in_probability(context(p, part, 2000), par);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_EQ(r.rows[0].extra("l"), 10.0);
    EXPECT_GT(r.rows[0].statistic, r.rows[1].statistic);
    EXPECT_GT(r.rows[1].statistic, r.rows[2].statistic);
    EXPECT_EQ(r.verdict, verdict::shape_pass);
}

TEST(Cauchy, DefaultEpsUsesDomainDiameter) {
    auto p = tan_problem();
    EXPECT_DOUBLE_EQ(default_eps(p), 0.05);  // diam D_1 = 1
    auto q = make({"0"}, {{"1"}}, {0.0});
    EXPECT_DOUBLE_EQ(default_eps(q), 0.05);
}

TEST(Exit, StillPathsNeverExit) {
    auto p = make({"0"}, {{"0"}}, {0.0});
    p.domain = DomainChain::interval(-1, 1);
    p.lyapunov = LyapunovSpec{CoefficientField::scalar("1/(1-x1^2)", 1), std::nullopt, CoefficientField::scalar("0", 0)};
    auto part = PartitionFamily::uniform({16}, 1.0);
    auto r = exit_time_bound(context(p, part, 100), {16, {1, 2}, 1.0, 0.1});
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.statistic, 0.0);
        EXPECT_EQ(row.extra("p_high_V"), 0.0);
        EXPECT_EQ(row.extra("p_outside"), 0.0);
    }
    EXPECT_EQ(r.verdict, verdict::pass);
}

TEST(Exit, TanPresetBoundValues) {
    auto p = tan_problem();
    auto part = PartitionFamily::uniform({64}, 1.0);
    const double delta = std::exp(-3.0);
    auto r = exit_time_bound(context(p, part, 500), {64, {2, 3, 4}, 1.0, delta});
    ASSERT_EQ(r.rows.size(), 3u);
    for (const auto& row : r.rows) {
        const int k = static_cast<int>(row.extra("k"));
        const double a = 1.0 - std::ldexp(1.0, -k);
        const double vk = (2 - a * a) / (1 - a * a);
        EXPECT_NEAR(row.extra("V_k"), vk, 1e-9 * vk);
        EXPECT_EQ(row.extra("p_high_V"), 0.0);  // V(0,0) = 2 < 3
        EXPECT_NEAR(*row.bound, std::exp(0.5) / (delta * vk), 1e-6);
        EXPECT_LE(row.statistic - row.half_width, *row.bound);
        EXPECT_LE(row.extra("grid_exit_fraction"), row.statistic);
    }
    EXPECT_EQ(r.verdict, verdict::pass);
}

TEST(Exit, VanishingBoundaryValueIsVacuous) {
    auto p = make({"0"}, {{"1"}}, {0.0});
    p.domain = DomainChain::interval(-1, 1);
    p.lyapunov = LyapunovSpec{CoefficientField::scalar("0", 1), std::nullopt, CoefficientField::scalar("0", 0)};
    auto part = PartitionFamily::uniform({16}, 1.0);
    auto r = exit_time_bound(context(p, part, 100), {16, {1}, 1.0, 0.5});
    EXPECT_TRUE(std::isinf(*r.rows[0].bound));
    EXPECT_EQ(r.verdict, verdict::pass);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Density, GaussianPeakMatches) {
    auto p = make({"0"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({256}, 1.0);
    auto r = density_bounds(context(p, part, 20000), {256, {0.01, 0.1, 1.0}});
    for (const auto& row : r.rows) {
        const double t = row.extra("t");
        EXPECT_NEAR(row.statistic, 1.0 / std::sqrt(2 * std::numbers::pi * t), 0.1 / std::sqrt(2 * std::numbers::pi * t));
        EXPECT_NEAR(row.extra("lq_norm"), 1.0, 1e-12);  // q = 1
        EXPECT_EQ(row.extra("truncated_mass"), 0.0);
    }
}

TEST(Density, RejectsHighDimensionAndThinBins) {
    auto p = make({"0", "0", "0", "0"}, {{"1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "0", "0", "1"}},
                  {0, 0, 0, 0});
    auto part = PartitionFamily::uniform({16}, 1.0);
    EXPECT_THROW(density_bounds(context(p, part, 10), {16, {0.5}}), ConfigError);
    auto q = make({"0"}, {{"1"}}, {0.0});
    DensityParams par{16, {0.5, 1.0}};
    par.bins = 50;
    EXPECT_THROW(density_bounds(context(q, part, 100), par), ResolutionError);
}

TEST(Density, ConditionalStartShiftsTime) {
    auto p = make({"0"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({64}, 1.0);
    DensityParams par{64, {0.05, 0.5}};
    par.start_step = 16;
    auto r = density_bounds(context(p, part, 20000), par);
    EXPECT_DOUBLE_EQ(r.metadata["start_time"].get<double>(), 0.25);
    EXPECT_NEAR(r.rows[0].statistic, 1.0 / std::sqrt(2 * std::numbers::pi * 0.05), 0.1 / std::sqrt(2 * std::numbers::pi * 0.05));
}

TEST(ExpMoment, ZeroAndConstantIntegrands) {
    auto p = make({"0"}, {{"2+sin(x1)"}}, {0.0});
    auto part = PartitionFamily::uniform({32}, 1.0);
    ExpMomentParams par;
    par.n = 32;
    par.f = CoefficientField::scalar("0", 1);
    auto r = exponential_moment(context(p, part, 200), par);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.statistic, 1.0);
        EXPECT_GE(row.extra("fitted_bound"), 2.0);
    }
    EXPECT_EQ(r.verdict, verdict::shape_pass);

    par.f = CoefficientField::scalar("0.5", 1);
    par.scalings = {1.0};
    r = exponential_moment(context(p, part, 200), par);
    EXPECT_NEAR(r.rows[0].statistic, std::exp(0.5), 1e-12);
}

TEST(ExpMoment, SingularIntegrandIsLogLinear) {
    auto p = make({"0"}, {{"2+sin(x1)"}}, {0.0});
    auto part = PartitionFamily::uniform({32}, 1.0);
    ExpMomentParams par;
    par.n = 32;
    par.f = CoefficientField::scalar("min(abs(x1)^(-0.4), 25)", 1);
    QuadratureSpec quad = default_quadrature(p, 4);
    quad.singular_points = {{0.0}};
    quad.check_truncation = false;
    par.quad = quad;
    auto r = exponential_moment(context(p, part, 2000), par);
    for (const auto& row : r.rows) EXPECT_TRUE(std::isfinite(row.statistic));
    EXPECT_EQ(r.verdict, verdict::shape_pass);
}

TEST(Girsanov, IdentityReweightingAndConstantShift) {
    auto p = make({"0.5"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({8, 16}, 1.0);
    TamingSchedule sched(p, part, NormParams{2, 2, 1, 0.25});
    auto ctx = context(p, part, 20000);
    ctx.variant = Variant::tamed;
    ctx.schedule = &sched;
    auto r = girsanov_moment(ctx, {{8, 16}, {-2, -1, 1, 2}});
    for (const auto& row : r.rows) {
        const double rho = row.extra("rho");
        if (rho == -1.0) {
            EXPECT_EQ(row.statistic, 1.0);
            continue;
        }
        const double want = std::exp(rho * (rho + 1) * 0.25 / 2);
        EXPECT_LT(std::fabs(row.statistic - want), 3 * row.half_width / stats::kZ95) << row.label;
    }
    EXPECT_EQ(r.verdict, verdict::shape_pass);
}

TEST(Girsanov, NeedsSchedule) {
    auto p = make({"0.5"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({8}, 1.0);
    EXPECT_THROW(girsanov_moment(context(p, part, 10), {{8}}), ConfigError);
}

TEST(Occupation, TrivialIntegrands) {
    auto p = make({"0"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({16, 32}, 1.0);
    OccupationParams par;
    par.ns = {16, 32};
    par.f = CoefficientField::scalar("0", 1);
    auto r = occupation_integral(context(p, part, 100), par);
    for (const auto& row : r.rows) EXPECT_EQ(row.statistic, 0.0);
    EXPECT_EQ(r.verdict, verdict::shape_pass);

    par.f = CoefficientField::scalar("1", 1);
    r = occupation_integral(context(p, part, 100), par);
    for (const auto& row : r.rows) EXPECT_NEAR(row.statistic, row.extra("s"), 1e-12);

    par.gamma = 0.5;
    EXPECT_THROW(occupation_integral(context(p, part, 10), par), ConfigError);
}

TEST(Occupation, GaussianBallOracle) {
    auto p = make({"0"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({16}, 1.0);
    OccupationParams par;
    par.ns = {16};
    par.scalings = {1.0};
    par.f = CoefficientField::scalar("indicator(0.3-abs(x1))", 1);
    auto r = occupation_integral(context(p, part, 20000), par);
    double want = 1.0 / 16;  // t_0 = 0: the ball always holds x_0
    for (int i = 1; i < 16; ++i) want += std::erf(0.3 / std::sqrt(2.0 * i / 16)) / 16;
    EXPECT_LT(std::fabs(r.rows[0].statistic - want), 3 * r.rows[0].half_width / stats::kZ95);
}

TEST(Tightness, BrownianFourthMoment) {
    auto p = make({"0"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({64}, 1.0);
    auto r = tightness_moment(context(p, part, 20000), {64});
    ASSERT_EQ(r.rows.size(), 5u);
    for (const auto& row : r.rows) {
        const double g = row.extra("gap");
        EXPECT_LT(std::fabs(row.statistic - 3 * g * g), 3 * row.half_width / stats::kZ95) << row.label;
    }
    EXPECT_NEAR(r.statistic, 2.0, 0.1);
    EXPECT_EQ(r.verdict, verdict::shape_pass);
}

TEST(Tightness, ZeroGapAndTooFewGaps) {
    auto p = make({"0"}, {{"1"}}, {0.0});
    auto part = PartitionFamily::uniform({64}, 1.0);
    auto pairs = default_tightness_pairs();
    pairs.emplace_back(0.5, 0.5);
    auto r = tightness_moment(context(p, part, 100), {64, pairs});
    EXPECT_EQ(r.rows.back().statistic, 0.0);
    EXPECT_THROW(tightness_moment(context(p, part, 10), {64, {{0, 0.1}, {0, 0.2}, {0, 0.3}}}), ConfigError);
}

TEST(DriftIntegral, GbmDecreasesAndReferenceIsZero) {
    auto p = make({"0.05*x1"}, {{"0.2*x1"}}, {1.0});
    auto part = PartitionFamily::uniform({8, 32, 128}, 1.0);
    TamingSchedule sched(p, part, NormParams{2, 2, 1, 0.25});
    auto ctx = context(p, part, 500);
    ctx.variant = Variant::tamed;
    ctx.schedule = &sched;
    auto r = drift_integral_convergence(ctx, {{8, 32, 128}, 1024});
    EXPECT_GT(r.rows[0].statistic, r.rows[1].statistic);
    EXPECT_GT(r.rows[1].statistic, r.rows[2].statistic);
    EXPECT_EQ(r.verdict, verdict::shape_pass);

    auto same = PartitionFamily::uniform({8, 1024}, 1.0);
    TamingSchedule s2(p, same, NormParams{2, 2, 1, 0.25});
    auto c2 = context(p, same, 50);
    c2.variant = Variant::tamed;
    c2.schedule = &s2;
    auto z = drift_integral_convergence(c2, {{8, 1024}, 1024});
    EXPECT_EQ(z.rows[1].statistic, 0.0);
}

TEST(Determinism, WorkerCountDoesNotChangeReports) {
    auto p = make({"abs(x1)^(-0.2)"}, {{"2+sin(x1)"}}, {0.0});
    auto part = PartitionFamily::uniform({8, 16, 32}, 1.0);
    TamingSchedule sched(p, part, NormParams{2, 2, 1, 0.25});
    auto a = context(p, part, 300);
    a.variant = Variant::tamed;
    a.schedule = &sched;
    auto b = a;
    b.ensemble.workers = 4;
    auto ra = girsanov_moment(a, {{8, 16, 32}});
    auto rb = girsanov_moment(b, {{8, 16, 32}});
    ASSERT_EQ(ra.rows.size(), rb.rows.size());
    for (std::size_t i = 0; i < ra.rows.size(); ++i) {
        EXPECT_EQ(ra.rows[i].statistic, rb.rows[i].statistic);
        EXPECT_EQ(ra.rows[i].half_width, rb.rows[i].half_width);
    }
    auto ca = cauchy_in_probability(a, {{{8, 16}, {16, 32}}, 0.05});
    auto cb = cauchy_in_probability(b, {{{8, 16}, {16, 32}}, 0.05});
    EXPECT_EQ(ca.metadata.dump(), cb.metadata.dump());
    EXPECT_EQ(ca.rows[1].statistic, cb.rows[1].statistic);
}
