#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eulerlab/diagnostics/common.hpp"

namespace eulerlab {

namespace detail {

inline QuadratureSpec quad_or_default(const std::optional<QuadratureSpec>& q, const ProblemSpec& p) {
    return q ? *q : default_quadrature(p, 4);
}

inline void note_norms(DiagnosticReport& r, const NormPair& np) {
    if (np.lower_bound) r.warnings.push_back("norm of f is a lower bound: " + np.note);
}

}  // namespace detail

struct ExpMomentParams {
    Index n = 0;
    CoefficientField f;
    double p = 2.0;
    double q = 2.0;
    double T = 0.0;
    std::vector<double> scalings{1.0, 2.0, 4.0};
    std::optional<QuadratureSpec> quad;
    double slope_limit = 1.25;
};

/// E exp(s ∫_0^T f(r, x_n(κ_n(r))) dr) on the driftless chain for each
/// scaling s, against Φ(s) = s^q (‖f‖_{p,q}^q + d_n^{q-1} ‖f‖_{∞,q}^q).
inline DiagnosticReport exponential_moment(const RunContext& ctx, const ExpMomentParams& par) {
    const char* who = "exponential_moment";
    detail::require_context(ctx, who);
    const auto& p = ctx.prob();
    const auto& part = ctx.part();
    detail::require_index(part, par.n, who);
    if (par.f.rows() != 1 || par.f.cols() != 1 || par.f.dim() != p.dim_state)
        throw ConfigError(std::string(who) + ": f must be a scalar field of the state");
    if (par.scalings.empty()) throw ConfigError(std::string(who) + ": needs at least one scaling");
    for (double s : par.scalings)
        if (!(s > 0)) throw ConfigError(std::string(who) + ": scalings must be positive");
    if (!(par.p >= 1) || !(par.q >= 1)) throw ConfigError(std::string(who) + ": p and q must be >= 1");
    const double T = detail::resolve_horizon(part, par.T, who);
    const auto np = field_norms(par.f, par.p, par.q, T, detail::quad_or_default(par.quad, p));
    const double dn = part.mesh(par.n, T);
    const double base = std::pow(np.pq, par.q) + std::pow(dn, par.q - 1) * std::pow(np.inf_q, par.q);

    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(part, {par.n});
    const auto emb = embed(*fine, part.simulation_grid(par.n));
    const std::size_t N = ctx.ensemble.paths;
    std::vector<double> integral(N, std::nan(""));
    std::vector<char> blown(N, 0);
    SimOptions opt;
    opt.variant = Variant::driftless;
    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        const auto path = simulate_path(p, part, par.n, plan, xi, opt, &emb);
        blown[i] = path.blown_up;
        Eigen::MatrixXd buf;
        integral[i] = detail::left_sum(par.f, path, T, buf);
    });

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    detail::note_blowups(r, static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1)), N);
    detail::note_norms(r, np);
    auto scalings = par.scalings;
    std::sort(scalings.begin(), scalings.end());

    std::vector<double> phi, logE;
    bool heavy = false;
    for (double s : scalings) {
        std::vector<double> v;
        for (std::size_t i = 0; i < N; ++i)
            if (!fails.failed[i]) v.push_back(std::exp(s * integral[i]));
        const auto sm = stats::summarize(v);
        if (stats::heavy_tail(v)) {
            heavy = true;
            r.warnings.push_back("s=" + detail::fmt_num(s) +
                                 ": top 0.1% of paths carry over half the mean; estimate unreliable, increase N");
        }
        auto row = mean_row("s=" + detail::fmt_num(s), sm);
        const double ph = std::pow(s, par.q) * base;
        row.extras = {{"s", s}, {"phi", ph}, {"log_estimate", std::log(sm.mean)}};
        phi.push_back(ph);
        logE.push_back(std::log(sm.mean));
        r.rows.push_back(std::move(row));
    }

    // best constant with c = 2: the smallest C with Ê <= 2 exp(C Φ) on the family
    double chat = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j)
        if (phi[j] > 0) chat = std::max(chat, (logE[j] - std::log(2.0)) / phi[j]);
    for (std::size_t j = 0; j < phi.size(); ++j) r.rows[j].extras.emplace_back("fitted_bound", 2.0 * std::exp(chat * phi[j]));

    // growth of log Ê in Φ: slope of log(log Ê) against log Φ
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < phi.size(); ++j)
        if (phi[j] > 0 && logE[j] > 1e-12) {
            lx.push_back(std::log(phi[j]));
            ly.push_back(std::log(logE[j]));
        }
    bool ok = true;
    if (lx.size() >= 2) {
        const auto fit = stats::fit_line(lx, ly);
        r.statistic = fit.slope;
        r.half_width = std::max(stats::kZ95 * fit.slope_se, stats::half_width_floor(fit.slope));
        ok = fit.slope <= par.slope_limit;
        if (!ok) r.warnings.push_back("log-estimate grows faster than linearly in the norm functional");
    } else {
        r.statistic = 0.0;
        r.half_width = stats::half_width_floor(0.0);
        bool infinite = false;
        for (std::size_t j = 0; j < phi.size(); ++j) infinite = infinite || (phi[j] == 0 && logE[j] > 1e-12);
        ok = !infinite;
        if (infinite) r.warnings.push_back("positive log-estimate with a zero norm functional");
    }
    r.verdict = ok ? verdict::shape_pass : verdict::fail;
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = "driftless";
    r.metadata["n_range"] = detail::index_list({par.n});
    r.metadata["T"] = T;
    r.metadata["norm_pq"] = np.pq;
    r.metadata["norm_inf_q"] = np.inf_q;
    r.metadata["mesh"] = dn;
    r.metadata["c_hat"] = chat;
    r.metadata["heavy_tail"] = heavy;
    r.metadata["statistic"] = "slope of log(log E) against log(phi)";
    return r;
}

struct GirsanovParams {
    std::vector<Index> ns;
    std::vector<double> rhos{-2.0, -1.0, 0.0, 1.0, 2.0};  // rho = 0 checks E gamma = 1
    double T = 0.0;
    double spread_limit = 5.0;
    double se_limit = 3.0;
};

/// Ẽγ_n^ρ(T) as E[γ_n^{ρ+1}] with γ_n built on the tamed chain, so that
/// γ dP turns the tamed chain into the driftless one.
inline DiagnosticReport girsanov_moment(const RunContext& ctx, const GirsanovParams& par) {
    const char* who = "girsanov_moment";
    detail::require_context(ctx, who);
    if (!ctx.schedule) throw ConfigError(std::string(who) + " needs a taming schedule");
    const auto& p = ctx.prob();
    const auto& part = ctx.part();
    if (par.ns.empty()) throw ConfigError(std::string(who) + ": n_list is empty");
    const auto ns = detail::sorted_unique(par.ns);
    for (Index n : ns) detail::require_index(part, n, who);
    const double T = detail::resolve_horizon(part, par.T, who);
    std::vector<double> rhos = par.rhos;
    if (std::find(rhos.begin(), rhos.end(), 0.0) == rhos.end()) rhos.push_back(0.0);
    std::sort(rhos.begin(), rhos.end());

    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(part, ns);
    std::vector<GridEmbedding> emb;
    for (Index n : ns) emb.push_back(embed(*fine, part.simulation_grid(n)));
    const std::size_t N = ctx.ensemble.paths, K = ns.size();
    std::vector<double> loggam(K * N, std::nan(""));
    std::vector<char> blown(N, 0);
    SimOptions opt;
    opt.variant = Variant::tamed;
    opt.schedule = ctx.schedule;
    opt.girsanov = true;
    const bool full = T == part.horizon();

    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        for (std::size_t k = 0; k < K; ++k) {
            const auto path = simulate_path(p, part, ns[k], plan, xi, opt, &emb[k]);
            if (path.blown_up) blown[i] = 1;
            loggam[k * N + i] =
                full ? path.log_gamma : std::log(girsanov_exponent(p, *ctx.schedule, path, plan, T));
        }
    });

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    detail::note_blowups(r, static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1)), N);
    bool ok = true;
    double worst_spread = 1.0;
    std::vector<std::vector<double>> by_rho(rhos.size());
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < rhos.size(); ++j) {
            std::vector<double> v;
            for (std::size_t i = 0; i < N; ++i)
                if (!fails.failed[i]) v.push_back(std::exp((rhos[j] + 1.0) * loggam[k * N + i]));
            const auto sm = stats::summarize(v);
            auto row = mean_row("n=" + std::to_string(ns[k]) + " rho=" + detail::fmt_num(rhos[j]), sm);
            row.extras = {{"n", static_cast<double>(ns[k])}, {"rho", rhos[j]}, {"cap", ctx.schedule->cap(ns[k])}};
            if (stats::heavy_tail(v))
                r.warnings.push_back(row.label + ": top 0.1% of paths carry over half the mean; increase N");
            if (rhos[j] == 0.0) {
                const double dev = std::fabs(sm.mean - 1.0);
                const bool fine_mean = dev <= std::max(par.se_limit * sm.std_error, 1e-12);
                row.extras.emplace_back("mean_deviation_se", sm.std_error > 0 ? dev / sm.std_error : 0.0);
                if (!fine_mean) {
                    ok = false;
                    r.warnings.push_back("n=" + std::to_string(ns[k]) + ": E gamma deviates from 1 by more than " +
                                         detail::fmt_num(par.se_limit) + " standard errors");
                }
            }
            by_rho[j].push_back(sm.mean);
            r.rows.push_back(std::move(row));
        }
    }
    for (std::size_t j = 0; j < rhos.size(); ++j) {
        const double s = spread(by_rho[j]);
        worst_spread = std::max(worst_spread, s);
        if (!(s < par.spread_limit)) {
            ok = false;
            r.warnings.push_back("rho=" + detail::fmt_num(rhos[j]) + ": spread across n is " + detail::fmt_num(s));
        }
    }
    r.statistic = worst_spread;
    r.half_width = stats::half_width_floor(worst_spread);
    r.verdict = ok ? verdict::shape_pass : verdict::fail;
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = "tamed";
    r.metadata["n_range"] = detail::index_list(ns);
    r.metadata["T"] = T;
    r.metadata["spread_limit"] = par.spread_limit;
    r.metadata["statistic"] = "largest max/min spread across n over rho";
    return r;
}

struct OccupationParams {
    std::vector<Index> ns;
    CoefficientField f;
    double p = 2.0;
    double q = 2.0;
    double gamma = 0.25;
    double T = 0.0;
    std::vector<double> scalings{1.0, 2.0};
    std::optional<QuadratureSpec> quad;
    double spread_limit = 5.0;
};

/// E ∫_0^T f(r, x_n(κ_n(r))) dr against ‖f‖_{p,q} + d_n^γ ‖f‖_{∞,q}.
inline DiagnosticReport occupation_integral(const RunContext& ctx, const OccupationParams& par) {
    const char* who = "occupation_integral";
    detail::require_context(ctx, who);
    const auto& p = ctx.prob();
    const auto& part = ctx.part();
    if (!(par.q > 1.0)) throw ConfigError(std::string(who) + ": q must exceed 1");
    if (!(par.gamma > 0.0 && par.gamma < (par.q - 1.0) / par.q))
        throw ConfigError(std::string(who) + ": gamma must lie in (0, (q-1)/q)");
    if (!(par.p >= 1)) throw ConfigError(std::string(who) + ": p must be >= 1");
    if (par.f.rows() != 1 || par.f.cols() != 1 || par.f.dim() != p.dim_state)
        throw ConfigError(std::string(who) + ": f must be a scalar field of the state");
    if (par.ns.empty()) throw ConfigError(std::string(who) + ": n_list is empty");
    for (double s : par.scalings)
        if (!(s > 0)) throw ConfigError(std::string(who) + ": scalings must be positive");
    const auto ns = detail::sorted_unique(par.ns);
    for (Index n : ns) detail::require_index(part, n, who);
    const double T = detail::resolve_horizon(part, par.T, who);
    const auto np = field_norms(par.f, par.p, par.q, T, detail::quad_or_default(par.quad, p));

    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(part, ns);
    std::vector<GridEmbedding> emb;
    for (Index n : ns) emb.push_back(embed(*fine, part.simulation_grid(n)));
    const std::size_t N = ctx.ensemble.paths, K = ns.size();
    std::vector<double> sums(K * N, 0.0);
    std::vector<char> blown(N, 0);
    const SimOptions opt = ctx.sim();
    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        Eigen::MatrixXd buf;
        for (std::size_t k = 0; k < K; ++k) {
            const auto path = simulate_path(p, part, ns[k], plan, xi, opt, &emb[k]);
            if (path.blown_up) blown[i] = 1;
            sums[k * N + i] = detail::left_sum(par.f, path, T, buf);
        }
    });

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    detail::note_blowups(r, static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1)), N);
    detail::note_norms(r, np);
    std::vector<double> ratios;
    for (std::size_t k = 0; k < K; ++k) {
        const double dn = part.mesh(ns[k], T);
        for (double s : par.scalings) {
            std::vector<double> v;
            for (std::size_t i = 0; i < N; ++i)
                if (!fails.failed[i]) v.push_back(s * sums[k * N + i]);
            const auto sm = stats::summarize(v);
            const double functional = s * (np.pq + std::pow(dn, par.gamma) * np.inf_q);
            const double ratio = functional > 0 ? sm.mean / functional : (sm.mean == 0 ? 0.0 : HUGE_VAL);
            auto row = mean_row("n=" + std::to_string(ns[k]) + " s=" + detail::fmt_num(s), sm);
            row.extras = {{"n", static_cast<double>(ns[k])}, {"s", s}, {"norm_functional", functional}, {"ratio", ratio}};
            ratios.push_back(ratio);
            r.rows.push_back(std::move(row));
        }
    }
    const double spr = spread(ratios);
    r.statistic = spr;
    r.half_width = stats::half_width_floor(spr);
    r.verdict = spr < par.spread_limit ? verdict::shape_pass : verdict::fail;
    if (!(spr < par.spread_limit)) r.warnings.push_back("ratio spread " + detail::fmt_num(spr) + " not below " +
                                                         detail::fmt_num(par.spread_limit));
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = variant_name(ctx.variant);
    r.metadata["n_range"] = detail::index_list(ns);
    r.metadata["T"] = T;
    r.metadata["norm_pq"] = np.pq;
    r.metadata["norm_inf_q"] = np.inf_q;
    r.metadata["gamma"] = par.gamma;
    r.metadata["statistic"] = "max/min spread of estimate over norm functional";
    return r;
}

struct TightnessParams {
    Index n = 0;
    std::vector<std::pair<double, double>> pairs;
    double slope_min = 1.75;
};

/// Pairs (0.25, 0.25 + 2^-j) for j = 6..2.
inline std::vector<std::pair<double, double>> default_tightness_pairs() {
    std::vector<std::pair<double, double>> out;
    for (int j = 6; j >= 2; --j) out.emplace_back(0.25, 0.25 + std::ldexp(1.0, -j));
    return out;
}

/// E|x_n(t) - x_n(s)|^4 per pair of the continuous-time scheme; fits the
/// log-moment against log|t - s|.
inline DiagnosticReport tightness_moment(const RunContext& ctx, const TightnessParams& par) {
    const char* who = "tightness_moment";
    detail::require_context(ctx, who);
    const auto& p = ctx.prob();
    const auto& part = ctx.part();
    detail::require_index(part, par.n, who);
    const auto pairs = par.pairs.empty() ? default_tightness_pairs() : par.pairs;
    std::vector<double> times, gaps;
    for (auto [s, t] : pairs) {
        if (!(s >= 0 && t >= 0 && s <= part.horizon() && t <= part.horizon()))
            throw ConfigError(std::string(who) + ": pair times must lie in [0, horizon]");
        times.push_back(s);
        times.push_back(t);
        if (s != t) gaps.push_back(std::fabs(t - s));
    }
    std::sort(gaps.begin(), gaps.end());
    gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
    if (gaps.size() < 4) throw ConfigError(std::string(who) + ": needs at least 4 distinct gaps for the fit");

    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(part, {par.n}, {detail::points_grid(times)});
    const auto emb = embed(*fine, part.simulation_grid(par.n));
    const std::size_t N = ctx.ensemble.paths, P = pairs.size();
    const int d = p.dim_state;
    std::vector<double> m4(P * N, std::nan(""));
    std::vector<char> blown(N, 0);
    SimOptions opt = ctx.sim();
    opt.fine_trajectory = true;
    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        const auto path = simulate_path(p, part, par.n, plan, xi, opt, &emb);
        blown[i] = path.blown_up;
        if (path.blown_up) return;
        for (std::size_t k = 0; k < P; ++k) {
            const auto js = *fine->find(pairs[k].first), jt = *fine->find(pairs[k].second);
            double s2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double diff = path.fine_states[jt * d + c] - path.fine_states[js * d + c];
                s2 += diff * diff;
            }
            m4[k * N + i] = s2 * s2;
        }
    });

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    const std::size_t nb = static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1));
    detail::note_blowups(r, nb, N);
    if (nb) r.warnings.push_back("blown-up paths are excluded from the moments");
    std::vector<double> lx, ly;
    bool any_zero = false, all_zero = true;
    for (std::size_t k = 0; k < P; ++k) {
        std::vector<double> v;
        for (std::size_t i = 0; i < N; ++i)
            if (!fails.failed[i] && !blown[i]) v.push_back(m4[k * N + i]);
        const auto sm = stats::summarize(v);
        const double gap = std::fabs(pairs[k].second - pairs[k].first);
        auto row = mean_row("s=" + detail::fmt_num(pairs[k].first) + " t=" + detail::fmt_num(pairs[k].second), sm);
        row.extras = {{"s", pairs[k].first}, {"t", pairs[k].second}, {"gap", gap}};
        if (gap > 0) {
            if (sm.mean > 0) {
                lx.push_back(std::log(gap));
                ly.push_back(std::log(sm.mean));
                all_zero = false;
            } else {
                any_zero = true;
            }
        }
        r.rows.push_back(std::move(row));
    }
    bool ok;
    if (all_zero) {
        r.statistic = 0.0;
        r.half_width = stats::half_width_floor(0.0);
        ok = true;
        r.warnings.push_back("all increments vanish: the path does not move");
    } else {
        const auto fit = stats::fit_line(lx, ly);
        r.statistic = fit.slope;
        r.half_width = std::max(stats::kZ95 * fit.slope_se, stats::half_width_floor(fit.slope));
        ok = !any_zero && fit.slope >= par.slope_min;
        if (fit.slope < par.slope_min)
            r.warnings.push_back("fitted slope " + detail::fmt_num(fit.slope) + " below " + detail::fmt_num(par.slope_min));
    }
    r.verdict = ok ? verdict::shape_pass : verdict::fail;
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = variant_name(ctx.variant);
    r.metadata["n_range"] = detail::index_list({par.n});
    r.metadata["slope_min"] = par.slope_min;
    r.metadata["statistic"] = "slope of log E|dx|^4 against log|t-s|";
    return r;
}

}  // namespace eulerlab
