#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "eulerlab/diagnostics/common.hpp"
#include "eulerlab/diagnostics/convergence.hpp"

namespace eulerlab {

struct ExitParams {
    Index n = 0;
    std::vector<int> ks;
    double T = 0.0;  // 0: horizon
    double delta = 0.0;
    Index reference_n = kReferenceN;  // exits are detected on this grid too; 0 disables
};

/// P(τ^k <= T) against P(ξ ∉ D_k) + P(V(0,ξ) >= log(1/δ)) + exp(∫_0^T M) / (δ V_k(T)).
/// The left side is the fraction of paths leaving D_k by T on the fine grid.
inline DiagnosticReport exit_time_bound(const RunContext& ctx, const ExitParams& par) {
    const char* who = "exit_time_bound";
    detail::require_context(ctx, who);
    const auto& p = ctx.prob();
    if (!p.lyapunov) throw ConfigError(std::string(who) + " needs a Lyapunov function");
    if (!p.domain) throw ConfigError(std::string(who) + " needs a domain chain");
    if (!(par.delta > 0.0 && par.delta < 1.0)) throw ConfigError(std::string(who) + ": delta must lie in (0, 1)");
    if (par.ks.empty()) throw ConfigError(std::string(who) + ": needs at least one k");
    for (int k : par.ks)
        if (k < 1) throw ConfigError(std::string(who) + ": k must be >= 1");
    const auto& part = ctx.part();
    detail::require_index(part, par.n, who);
    const double T = detail::resolve_horizon(part, par.T, who);
    const int kmax = *std::max_element(par.ks.begin(), par.ks.end());

    std::vector<Grid> extra;
    if (par.reference_n > 0) extra.push_back(uniform_grid(par.reference_n, part.horizon()));
    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(part, {par.n}, extra);
    const auto emb = embed(*fine, part.simulation_grid(par.n));
    const double level = std::log(1.0 / par.delta);

    const std::size_t N = ctx.ensemble.paths, K = static_cast<std::size_t>(kmax);
    std::vector<char> fine_exit(K * N, 0), grid_exit(K * N, 0), outside(K * N, 0), high_v(N, 0), blown(N, 0);
    SimOptions opt = ctx.sim();
    opt.max_k = kmax;
    opt.fine_trajectory = true;

    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        high_v[i] = p.lyapunov_value(0.0, xi) >= level;
        for (int k = 1; k <= kmax; ++k) outside[(k - 1) * N + i] = !p.domain->contains(k, xi);
        const auto path = simulate_path(p, part, par.n, plan, xi, opt, &emb);
        blown[i] = path.blown_up;
        for (int k = 1; k <= kmax; ++k) {
            auto ft = path.fine_exit_time(k);
            auto gt = path.exit_time(k);
            // a frozen path is counted as having left every D_k
            fine_exit[(k - 1) * N + i] = path.blown_up || (ft && *ft <= T);
            grid_exit[(k - 1) * N + i] = path.blown_up || (gt && *gt <= T);
        }
    });

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    detail::note_blowups(r, static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1)), N);
    const std::size_t valid = N - fails.count();
    auto frac = [&](const std::vector<char>& v, std::size_t offset) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < N; ++i) c += !fails.failed[i] && v[offset + i];
        return c;
    };
    const double p_high = valid ? static_cast<double>(frac(high_v, 0)) / static_cast<double>(valid) : 0.0;
    const double growth = std::exp(p.integrated_rate(T));

    bool all_ok = true;
    double worst_margin = HUGE_VAL;
    std::size_t worst = 0;
    auto ks = par.ks;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (int k : ks) {
        const std::size_t off = static_cast<std::size_t>(k - 1) * N;
        const double vk = p.boundary_inf(k, T);
        const double p_out = valid ? static_cast<double>(frac(outside, off)) / static_cast<double>(valid) : 0.0;
        double bound;
        if (!(vk > 0.0)) {
            bound = HUGE_VAL;
            r.warnings.push_back("V_k(T) = 0 for k = " + std::to_string(k) + ": bound is vacuous");
        } else {
            bound = p_out + p_high + growth / (par.delta * vk);
        }
        const auto prop = stats::proportion(frac(fine_exit, off), valid);
        auto row = proportion_row("k=" + std::to_string(k), prop);
        row.bound = bound;
        row.extras = {{"k", static_cast<double>(k)},
                      {"V_k", vk},
                      {"grid_exit_fraction", stats::proportion(frac(grid_exit, off), valid).estimate},
                      {"p_outside", p_out},
                      {"p_high_V", p_high},
                      {"lyapunov_term", vk > 0 ? growth / (par.delta * vk) : HUGE_VAL}};
        const double margin = bound - (prop.estimate - prop.half_width);
        all_ok = all_ok && margin >= 0.0;
        if (margin < worst_margin) {
            worst_margin = margin;
            worst = r.rows.size();
        }
        r.rows.push_back(std::move(row));
    }
    r.statistic = r.rows[worst].statistic;
    r.half_width = r.rows[worst].half_width;
    r.bound = r.rows[worst].bound;
    r.verdict = all_ok ? verdict::pass : verdict::fail;
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = variant_name(ctx.variant);
    r.metadata["n_range"] = detail::index_list({par.n});
    r.metadata["T"] = T;
    r.metadata["delta"] = par.delta;
    r.metadata["integrated_rate"] = std::log(growth);
    r.metadata["statistic"] = "exit fraction for the k with the smallest margin";
    return r;
}

}  // namespace eulerlab
