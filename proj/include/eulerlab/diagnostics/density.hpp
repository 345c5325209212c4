#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eulerlab/diagnostics/common.hpp"
#include "eulerlab/stats/histogram.hpp"

namespace eulerlab {

struct DensityParams {
    Index n = 0;
    std::vector<double> times;          // elapsed times after the start point
    double q = 1.0;
    std::optional<std::size_t> bins;    // per axis; Freedman-Diaconis when empty
    std::size_t start_step = 0;         // conditional estimate from t_start = grid(n)[start_step]
    double min_average = 10.0;
    double slope_tol = 0.2;
    double spread_limit = 3.0;
};

/// Histogram estimates of the driftless chain's density at each time: the
/// sup m̂(t), the L_q norm and the truncated mass. The shape test fits
/// log m̂ against log(t^{-d/2} + 1).
inline DiagnosticReport density_bounds(const RunContext& ctx, const DensityParams& par) {
    const char* who = "density_bounds";
    detail::require_context(ctx, who);
    const auto& p = ctx.prob();
    const int d = p.dim_state;
    if (d > 3) throw ConfigError(std::string(who) + " supports d <= 3 only");
    const auto& part = ctx.part();
    detail::require_index(part, par.n, who);
    if (par.times.empty()) throw ConfigError(std::string(who) + ": needs at least one time");
    if (!(par.q >= 1.0)) throw ConfigError(std::string(who) + ": q must be >= 1");
    const double alpha = p.holder_alpha;
    if (d > alpha && !(par.q < d / (d - alpha)))
        throw ConfigError(std::string(who) + ": q must be below d/(d - alpha)");
    const Grid g = part.simulation_grid(par.n);
    if (par.start_step + 1 >= g.size()) throw ConfigError(std::string(who) + ": start_step leaves no step");
    const double t0 = g.times[par.start_step];
    std::vector<double> abs_times;
    for (double s : par.times) {
        if (!(s > 0.0) || !(t0 + s <= part.horizon()))
            throw ConfigError(std::string(who) + ": times must be positive and end by the horizon");
        abs_times.push_back(t0 + s);
    }

    if (ctx.validate_only) return {};
    const auto fine = make_fine_grid(part, {par.n}, {detail::points_grid(abs_times)});
    const auto emb = embed(*fine, g);
    std::vector<std::size_t> at;
    for (double t : abs_times) at.push_back(*fine->find(t));

    const std::size_t N = ctx.ensemble.paths, M = par.times.size();
    std::vector<double> samples(M * N * static_cast<std::size_t>(d), std::nan(""));
    std::vector<char> blown(N, 0);
    SimOptions opt;
    opt.variant = Variant::driftless;
    opt.fine_trajectory = true;
    opt.start_step = par.start_step;

    auto fails = detail::for_each_path(ctx, fine, [&](std::size_t i, const NoisePlan& plan, const std::vector<double>& xi) {
        const auto path = simulate_path(p, part, par.n, plan, xi, opt, &emb);
        blown[i] = path.blown_up;
        if (path.blown_up) return;
        for (std::size_t m = 0; m < M; ++m)
            for (int c = 0; c < d; ++c) samples[(m * N + i) * d + c] = path.fine_states[at[m] * d + c];
    });

    DiagnosticReport r;
    r.name = who;
    detail::note_failures(r, fails);
    detail::note_blowups(r, static_cast<std::size_t>(std::count(blown.begin(), blown.end(), 1)), N);

    std::vector<double> lx, ly, ratios;
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<double> v(samples.begin() + static_cast<std::ptrdiff_t>(m * N * d),
                              samples.begin() + static_cast<std::ptrdiff_t>((m + 1) * N * d));
        const auto h = stats::build_histogram(v, d, par.bins, par.min_average);
        const double s = par.times[m];
        const double scale = std::pow(s, -d / 2.0) + 1.0;
        const double mhat = h.max_density();
        std::size_t top = 0;
        for (std::size_t c : h.counts) top = std::max(top, c);
        const auto pr = stats::proportion(top, h.total);
        ReportRow row;
        row.label = "t=" + detail::fmt_num(s);
        row.statistic = mhat;
        row.half_width = pr.half_width / h.cell_volume();
        row.extras = {{"t", s},
                      {"lq_norm", h.lq_norm(par.q)},
                      {"integral", h.integral()},
                      {"truncated_mass", h.truncated_mass()},
                      {"ratio", mhat / scale},
                      {"cells", static_cast<double>(h.cells())}};
        if (h.truncated_mass() > 0)
            r.warnings.push_back("t=" + detail::fmt_num(s) + ": truncated mass " + detail::fmt_num(h.truncated_mass()));
        lx.push_back(std::log(scale));
        ly.push_back(std::log(mhat));
        ratios.push_back(mhat / scale);
        r.rows.push_back(std::move(row));
    }

    const double spr = spread(ratios);
    bool ok = spr < par.spread_limit;
    if (M >= 2) {
        const auto fit = stats::fit_line(lx, ly);
        r.statistic = fit.slope;
        r.half_width = std::max(stats::kZ95 * fit.slope_se, stats::half_width_floor(fit.slope));
        ok = ok && std::fabs(fit.slope - 1.0) <= par.slope_tol;
        if (std::fabs(fit.slope - 1.0) > par.slope_tol)
            r.warnings.push_back("fitted slope " + detail::fmt_num(fit.slope) + " outside [" +
                                 detail::fmt_num(1 - par.slope_tol) + ", " + detail::fmt_num(1 + par.slope_tol) + "]");
    } else {
        r.statistic = r.rows.front().statistic;
        r.half_width = r.rows.front().half_width;
        r.warnings.push_back("one time only: slope not fitted");
    }
    if (!(spr < par.spread_limit)) r.warnings.push_back("ratio spread " + detail::fmt_num(spr) + " not below " +
                                                         detail::fmt_num(par.spread_limit));
    r.verdict = ok ? verdict::shape_pass : verdict::fail;
    r.metadata = ensemble_metadata(ctx.ensemble);
    r.metadata["variant"] = "driftless";
    r.metadata["n_range"] = detail::index_list({par.n});
    r.metadata["start_time"] = t0;
    r.metadata["q"] = par.q;
    r.metadata["ratio_spread"] = spr;
    r.metadata["statistic"] = M >= 2 ? "slope of log m(t) against log(t^{-d/2}+1)" : "m(t)";
    return r;
}

}  // namespace eulerlab
