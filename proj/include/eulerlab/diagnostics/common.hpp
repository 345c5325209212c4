#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eulerlab/diagnostics/report.hpp"
#include "eulerlab/engine/ensemble.hpp"
#include "eulerlab/engine/euler.hpp"
#include "eulerlab/error.hpp"
#include "eulerlab/model/mixed_norm.hpp"
#include "eulerlab/rng/noise.hpp"

namespace eulerlab {

/// Problem, partition and ensemble shared by one diagnostic run.
struct RunContext {
    const ProblemSpec* problem = nullptr;
    const PartitionFamily* partition = nullptr;
    EnsembleSpec ensemble;
    Variant variant = Variant::polygonal;
    const TamingSchedule* schedule = nullptr;
    bool validate_only = false;  // check preconditions, simulate nothing

    const ProblemSpec& prob() const { return *problem; }
    const PartitionFamily& part() const { return *partition; }
    SimOptions sim() const {
        SimOptions o;
        o.variant = variant;
        o.schedule = schedule;
        return o;
    }
};

namespace detail {

inline void require_context(const RunContext& ctx, const char* who) {
    if (!ctx.problem || !ctx.partition) throw ConfigError(std::string(who) + " needs a problem and a partition");
    if (ctx.variant == Variant::tamed && !ctx.schedule)
        throw ConfigError(std::string(who) + ": tamed variant needs a taming schedule");
}

inline void require_index(const PartitionFamily& part, Index n, const char* who) {
    if (!part.has(n))
        throw ConfigError(std::string(who) + ": index " + std::to_string(n) + " is not in the partition family");
}

inline double resolve_horizon(const PartitionFamily& part, double T, const char* who) {
    if (T == 0.0) return part.horizon();
    if (!(T > 0.0 && T <= part.horizon()))
        throw ConfigError(std::string(who) + ": T must lie in (0, horizon]");
    return T;
}

/// Grid holding 0 and the given times; used to put evaluation times on the fine grid.
inline Grid points_grid(std::vector<double> times) {
    times.push_back(0.0);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return Grid{std::move(times), std::nullopt};
}

/// Per-path failures that are not configuration errors (singular σσ*,
/// evaluation errors outside the scheme loop) are recorded, not thrown.
struct PathFailures {
    std::vector<char> failed;
    std::vector<std::string> reason;

    explicit PathFailures(std::size_t n) : failed(n, 0), reason(n) {}
    std::size_t count() const { return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1)); }
    std::string first() const {
        for (std::size_t i = 0; i < failed.size(); ++i)
            if (failed[i]) return reason[i];
        return {};
    }
};

/// body(i, plan, xi) for every path, isolated per path.
template <class F>
PathFailures for_each_path(const RunContext& ctx, const std::shared_ptr<const Grid>& fine, F&& body) {
    const auto& p = ctx.prob();
    validate_initial_law(p.initial, p.domain);
    PathFailures fails(ctx.ensemble.paths);
    parallel_for(ctx.ensemble.paths, ctx.ensemble.workers, [&](std::size_t i) {
        try {
            NoisePlan plan(ctx.ensemble.seed, i, fine, p.dim_noise);
            const auto xi = sample_initial(p.initial, ctx.ensemble.seed, i, p.domain);
            body(i, plan, xi);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            fails.failed[i] = 1;
            fails.reason[i] = e.what();
        }
    });
    return fails;
}

inline void note_failures(DiagnosticReport& r, const PathFailures& f) {
    const std::size_t c = f.count();
    if (c == 0) return;
    r.blowups += c;
    r.warnings.push_back(std::to_string(c) + " path(s) failed and were excluded; first: " + f.first());
}

inline void note_blowups(DiagnosticReport& r, std::size_t blown, std::size_t total) {
    if (blown == 0) return;
    r.blowups += blown;
    r.warnings.push_back(std::to_string(blown) + " of " + std::to_string(total) +
                         " path(s) blew up and were frozen");
}

/// ∫_0^T f(κ(r), x(κ(r))) dr as the left-endpoint sum over the path's grid.
inline double left_sum(const CoefficientField& f, const DiscretePath& path, double T, Eigen::MatrixXd& buf) {
    double s = 0.0;
    for (std::size_t i = path.start_step; i + 1 < path.grid.size() && path.grid.times[i + 1] <= T; ++i) {
        f.eval(path.grid.times[i], path.state(i), buf);
        s += buf.norm() * path.grid.step(i);
    }
    return s;
}

inline std::vector<Index> sorted_unique(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline ordered_json index_list(const std::vector<Index>& ns) {
    ordered_json a = ordered_json::array();
    for (Index n : ns) a.push_back(n);
    return a;
}

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

/// Spatial norms ‖f‖_{p,q,T} and ‖f‖_{∞,q,T} of a coefficient field.
struct NormPair {
    double pq = 0.0;
    double inf_q = 0.0;
    bool lower_bound = false;
    std::string note;
};

inline NormPair field_norms(const CoefficientField& f, double p, double q, double T, const QuadratureSpec& quad) {
    NormPair out;
    auto a = mixed_norm(f, MixedNorm{p, q, T}, quad);
    auto b = mixed_norm(f, MixedNorm{kInf, q, T}, quad);
    out.pq = a.value;
    out.inf_q = b.value;
    out.lower_bound = a.lower_bound || b.lower_bound;
    out.note = !a.note.empty() ? a.note : b.note;
    return out;
}

}  // namespace eulerlab
