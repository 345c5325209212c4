#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eulerlab/diagnostics/common.hpp"

namespace eulerlab {

inline constexpr Index kReferenceN = 4096;

struct CauchyParams {
    std::vector<std::pair<Index, Index>> pairs;
    double eps = 0.0;        // 0: 0.05 diam(D_1), or 0.05 without a domain
    double T = 0.0;          // 0: horizon
    double threshold = 0.1;
    bool coupled = true;
    Index reference_n = kReferenceN;  // sup taken over this uniform grid too; 0 disables
};

inline double default_eps(const ProblemSpec& p) {
    if (p.domain && p.domain->kind() != DomainChain::Kind::whole_space) return 0.05 * p.domain->diameter_1();
    return 0.05;
}

/// Empirical P(sup_{t <= T} |x_l(t) - x_m(t)| >= eps) per coupled pair, the
/// sup running over the fine grid. Blown-up pairs count as exceedances.
inline DiagnosticReport cauchy_in_probability(const RunContext& ctx, const CauchyParams& par) {
    const char* who = "cauchy_in_probability";
    detail::require_context(ctx, who);
    if (!par.coupled) throw ConfigError(who + std::string(": pairs must share one noise plan (coupled = true)"));
    if (par.pairs.empty()) throw ConfigError(who + std::string(": needs at least one pair"));
    const auto& part = ctx.part();
    std::vector<Index> ns;
    for (auto [l, m] : par.pairs) {
        detail::require_index(part, l, who);
        detail::require_index(part, m, who);
        ns.push_back(l);
        ns.push_back(m);
    }
    ns = detail::sorted_unique(ns);
    const double eps = par.eps == 0.0 ? default_eps(ctx.prob()) : par.eps;
    if (!(eps > 0)) throw ConfigError(who + std::string(": eps must be positive"));
    if (!(par.threshold > 0)) throw ConfigError(who + std::string(": threshold must be positive"));
    const double T = detail::resolve_horizon(part, par.T, who);

    std::vector<Grid> extra;
    if (par.reference_n > 0) extra.push_back(uniform_grid(par.reference_n, part.horizon()));
    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(part, ns, extra);
    const std::size_t jT = fine->floor_index(T);
    std::map<Index, GridEmbedding> emb;
    for (Index n : ns) emb[n] = embed(*fine, part.simulation_grid(n));

    auto pairs = par.pairs;
    std::stable_sort(pairs.begin(), pairs.end(), [](auto a, auto b) {
        return std::min(a.first, a.second) < std::min(b.first, b.second);
    });
    const std::size_t P = pairs.size(), N = ctx.ensemble.paths;
    const int d = ctx.prob().dim_state;
    std::vector<char> exceed(P * N, 0);
    std::vector<char> blown(N, 0);
    SimOptions opt = ctx.sim();
    opt.fine_trajectory = true;

    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        std::map<Index, DiscretePath> paths;
        for (Index n : ns) {
            paths.emplace(n, simulate_path(ctx.prob(), part, n, plan, xi, opt, &emb.at(n)));
            if (paths.at(n).blown_up) blown[i] = 1;
        }
        for (std::size_t k = 0; k < P; ++k) {
            const auto& a = paths.at(pairs[k].first);
            const auto& b = paths.at(pairs[k].second);
            bool hit = a.blown_up || b.blown_up;
            for (std::size_t j = 0; j <= jT && !hit; ++j) {
                double s2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double diff = a.fine_states[j * d + c] - b.fine_states[j * d + c];
                    s2 += diff * diff;
                }
                hit = std::sqrt(s2) >= eps;
            }
            exceed[k * N + i] = hit;
        }
    });

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    detail::note_blowups(r, static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1)), N);
    const std::size_t valid = N - fails.count();
    for (std::size_t k = 0; k < P; ++k) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < N; ++i) hits += !fails.failed[i] && exceed[k * N + i];
        auto row = proportion_row("(" + std::to_string(pairs[k].first) + "," + std::to_string(pairs[k].second) + ")",
                                  stats::proportion(hits, valid));
        row.extras = {{"l", static_cast<double>(pairs[k].first)}, {"m", static_cast<double>(pairs[k].second)}};
        r.rows.push_back(std::move(row));
    }
    r.statistic = r.rows.back().statistic;
    r.half_width = r.rows.back().half_width;
    const bool mono = nonincreasing_within(r.rows);
    const bool small = r.statistic < par.threshold;
    r.verdict = mono && small ? verdict::shape_pass : verdict::fail;
    if (!mono) r.warnings.push_back("exceedance estimates increase beyond their half-widths");
    if (!small) r.warnings.push_back("final exceedance " + detail::fmt_num(r.statistic) + " is not below " +
                                     detail::fmt_num(par.threshold));
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = variant_name(ctx.variant);
    r.metadata["n_range"] = detail::index_list(ns);
    r.metadata["eps"] = eps;
    r.metadata["T"] = T;
    r.metadata["threshold"] = par.threshold;
    r.metadata["fine_points"] = fine->size();
    r.metadata["statistic"] = "final exceedance probability";
    return r;
}

struct DriftIntegralParams {
    std::vector<Index> ns;
    Index reference_n = 1024;
    double T = 0.0;
    double max_reference_blowup = 0.01;
};

/// E ∫_0^T |b_n(κ_n(r), x_n(κ_n(r))) - b_ref(r, x_ref(r))|^2 dr with the
/// reference tamed chain as the proxy for x(t); sums run over the fine grid.
inline DiagnosticReport drift_integral_convergence(const RunContext& ctx, const DriftIntegralParams& par) {
    const char* who = "drift_integral_convergence";
    detail::require_context(ctx, who);
    if (!ctx.schedule) throw ConfigError(std::string(who) + " needs a taming schedule");
    if (par.ns.empty()) throw ConfigError(std::string(who) + ": n_list is empty");
    const auto ns = detail::sorted_unique(par.ns);
    if (par.reference_n < ns.back())
        throw ConfigError(std::string(who) + ": reference_n must be at least every element of n_list");
    const auto& base = ctx.part();
    for (Index n : ns) detail::require_index(base, n, who);
    const double T = detail::resolve_horizon(base, par.T, who);

    // the reference index may lie outside the configured family
    PartitionFamily ext = base;
    if (!base.has(par.reference_n)) {
        if (base.kind() != PartitionFamily::Kind::uniform)
            throw ConfigError(std::string(who) + ": reference_n must be configured for explicit partitions");
        auto all = base.indices();
        all.push_back(par.reference_n);
        ext = PartitionFamily::uniform(all, base.horizon());
    }
    const TamingSchedule sched(ctx.prob(), ext, ctx.schedule->params(), ctx.schedule->constant(),
                               ctx.schedule->explicit_caps());
    auto all_ns = ns;
    all_ns.push_back(par.reference_n);
    all_ns = detail::sorted_unique(all_ns);
    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(ext, all_ns);
    std::map<Index, GridEmbedding> emb;
    for (Index n : all_ns) emb[n] = embed(*fine, ext.simulation_grid(n));

    const std::size_t N = ctx.ensemble.paths, K = ns.size();
    const int d = ctx.prob().dim_state;
    std::vector<double> integral(K * N, 0.0);
    std::vector<char> ref_blown(N, 0), blown(N, 0);
    SimOptions opt;
    opt.variant = Variant::tamed;
    opt.schedule = &sched;
    SimOptions ref_opt = opt;
    ref_opt.fine_trajectory = true;
    const double lam_ref = sched.cap(par.reference_n);

    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        const auto ref = simulate_path(ctx.prob(), ext, par.reference_n, plan, xi, ref_opt, &emb.at(par.reference_n));
        if (ref.blown_up) {
            ref_blown[i] = 1;
            return;
        }
        // b capped at λ_ref along the reference path, at each fine point
        const std::size_t J = fine->size();
        std::vector<double> bref(J * static_cast<std::size_t>(d));
        Vec b;
        for (std::size_t j = 0; j + 1 < J && fine->times[j + 1] <= T; ++j) {
            ctx.prob().drift_at(fine->times[j], ref.fine_state(j), b);
            TamingSchedule::apply_cap(lam_ref, b);
            for (int c = 0; c < d; ++c) bref[j * d + c] = b(c);
        }
        for (std::size_t k = 0; k < K; ++k) {
            const auto path = simulate_path(ctx.prob(), ext, ns[k], plan, xi, opt, &emb.at(ns[k]));
            if (path.blown_up) blown[i] = 1;
            std::vector<double> bn(path.grid.size() * static_cast<std::size_t>(d));
            for (std::size_t g = 0; g < path.grid.size(); ++g) {
                sched.tamed_drift(ns[k], path.grid.times[g], path.state(g), b);
                for (int c = 0; c < d; ++c) bn[g * d + c] = b(c);
            }
            const auto& pos = emb.at(ns[k]).positions;
            double acc = 0.0;
            std::size_t g = 0;
            for (std::size_t j = 0; j + 1 < J && fine->times[j + 1] <= T; ++j) {
                while (g + 1 < pos.size() && pos[g + 1] <= j) ++g;
                double s2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double diff = bn[g * d + c] - bref[j * d + c];
                    s2 += diff * diff;
                }
                acc += s2 * (fine->times[j + 1] - fine->times[j]);
            }
            integral[k * N + i] = acc;
        }
    });

    const std::size_t nref = static_cast<std::size_t>(std::count(ref_blown.begin(), ref_blown.end(), 1));
    if (N > 0 && static_cast<double>(nref) > par.max_reference_blowup * static_cast<double>(N))
        throw ResolutionError("reference path blew up on " + std::to_string(nref) + " of " + std::to_string(N) +
                              " paths; reference rejected");

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    detail::note_blowups(r, static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1)) + nref, N);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> v;
        for (std::size_t i = 0; i < N; ++i)
            if (!fails.failed[i] && !ref_blown[i]) v.push_back(integral[k * N + i]);
        auto row = mean_row("n=" + std::to_string(ns[k]), stats::summarize(v));
        row.extras = {{"n", static_cast<double>(ns[k])}, {"cap", sched.cap(ns[k])}};
        r.rows.push_back(std::move(row));
    }
    r.statistic = r.rows.back().statistic;
    r.half_width = r.rows.back().half_width;
    const bool mono = nonincreasing_within(r.rows);
    r.verdict = mono ? verdict::shape_pass : verdict::fail;
    if (!mono) r.warnings.push_back("squared drift error increases in n beyond its half-widths");
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = "tamed";
    r.metadata["n_range"] = detail::index_list(ns);
    r.metadata["reference_n"] = par.reference_n;
    r.metadata["reference_cap"] = lam_ref;
    r.metadata["T"] = T;
    r.metadata["statistic"] = "squared drift error at the largest n";
    return r;
}

}  // namespace eulerlab
