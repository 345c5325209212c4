#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulerlab/error.hpp"
#include "eulerlab/model/partition.hpp"
#include "eulerlab/model/problem.hpp"
#include "eulerlab/model/taming.hpp"
#include "eulerlab/rng/noise.hpp"

namespace eulerlab {

inline constexpr double kBlowUp = 1e12;

/// x_prev + b dt + σ dw, with b and σ already frozen at the left endpoint.
inline Vec euler_step(const Vec& x_prev, double dt, const Vec& dw, const Vec& drift, const Mat& diffusion) {
    if (!(dt > 0)) throw DomainError("euler_step needs dt > 0");
    return x_prev + drift * dt + diffusion * dw;
}

enum class Variant { polygonal, driftless, tamed };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::polygonal: return "polygonal";
        case Variant::driftless: return "driftless";
        case Variant::tamed: return "tamed";
    }
    return "?";
}

struct SimOptions {
    Variant variant = Variant::polygonal;
    const TamingSchedule* schedule = nullptr;  // required for tamed
    int max_k = 0;                 // track exits from D_1..D_max_k
    bool fine_trajectory = false;  // continuous-time values at every fine point
    bool girsanov = false;         // accumulate log γ_n(T) along the path
    std::size_t start_step = 0;    // begin at grid point t_start (conditional runs)
};

/// One trajectory of a discrete scheme.
struct DiscretePath {
    Index n = 0;
    Grid grid;                          // simulated grid: grid(n) on [0, horizon]
    int dim = 1;
    std::vector<double> states;         // row-major, grid.size() x dim
    std::vector<std::optional<std::size_t>> exit_step;  // per k = 1..max_k, first grid index outside D_k
    std::vector<std::optional<std::size_t>> fine_exit;  // same on the fine grid (fine index)
    bool blown_up = false;
    std::optional<std::size_t> blowup_step;
    std::string blowup_reason;
    double log_gamma = 0.0;             // log γ_n(T) when requested
    std::size_t start_step = 0;

    // continuous-time scheme at fine points, when requested
    std::shared_ptr<const Grid> fine;
    std::vector<double> fine_states;    // fine.size() x dim; NaN before the start

    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    Vec state_vec(std::size_t i) const { return Eigen::Map<const Vec>(states.data() + i * dim, dim); }
    std::span<const double> fine_state(std::size_t j) const {
        return {fine_states.data() + j * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    double horizon() const { return grid.back(); }

    std::optional<double> exit_time(int k) const {
        const auto& e = exit_step[static_cast<std::size_t>(k - 1)];
        if (!e) return std::nullopt;
        return grid.times[*e];
    }
    std::optional<double> fine_exit_time(int k) const {
        const auto& e = fine_exit[static_cast<std::size_t>(k - 1)];
        if (!e) return std::nullopt;
        return fine->times[*e];
    }
};

namespace detail {

inline bool all_finite(const Vec& v) { return v.allFinite(); }

[[noreturn]] inline void singular_at(std::span<const double> x) {
    std::string where = "(";
    for (std::size_t i = 0; i < x.size(); ++i) where += (i ? ", " : "") + std::to_string(x[i]);
    throw DomainError("sigma sigma* is singular at state " + where + ")");
}

/// σ^{-1} b with σ^{-1} = σ*(σσ*)^{-1}; throws when σσ* is singular.
inline void right_inverse_apply(const Mat& sigma, const Vec& b, std::span<const double> x, Vec& out) {
    if (sigma.rows() == 1 && sigma.cols() == 1) {
        const double s = sigma(0, 0);
        if (!(s * s > 1e-14)) singular_at(x);
        out.resize(1);
        out(0) = b(0) / s;
        return;
    }
    const Mat a = sigma * sigma.transpose();
    Eigen::FullPivLU<Mat> lu(a);
    lu.setThreshold(1e-14);
    if (!lu.isInvertible()) singular_at(x);
    out = sigma.transpose() * lu.solve(b);
}

}  // namespace detail

/// Runs the scheme for index n on noise from `plan`. Coefficients are
/// evaluated once per step at (t_i, x_n(t_i)).
inline DiscretePath simulate_path(const ProblemSpec& problem, const PartitionFamily& partition, Index n,
                                  const NoisePlan& plan, std::span<const double> xi, const SimOptions& opt = {},
                                  const GridEmbedding* embedding = nullptr) {
    if (opt.variant == Variant::tamed && !opt.schedule)
        throw ConfigError("tamed variant needs a taming schedule");
    if (opt.girsanov && opt.variant == Variant::driftless && !opt.schedule)
        throw ConfigError("Girsanov exponent needs a taming schedule");
    if (opt.max_k > 0 && !problem.domain) throw ConfigError("exit tracking needs a domain chain");
    if (static_cast<int>(xi.size()) != problem.dim_state) throw ConfigError("initial point has the wrong dimension");

    const int d = problem.dim_state;
    const int d1 = problem.dim_noise;
    if (plan.dim_noise() != d1) throw ConfigError("noise plan dimension does not match d1");

    DiscretePath path;
    path.n = n;
    path.grid = partition.simulation_grid(n);
    path.dim = d;
    path.start_step = opt.start_step;
    const Grid& g = path.grid;
    if (opt.start_step + 1 >= g.size()) throw ConfigError("start step leaves no step to simulate");
    const GridEmbedding local = embedding ? GridEmbedding{} : embed(plan.fine_grid(), g);
    const GridEmbedding& emb = embedding ? *embedding : local;
    const Mat dW = plan.increments(emb);

    path.states.assign(g.size() * static_cast<std::size_t>(d), 0.0);
    path.exit_step.assign(static_cast<std::size_t>(opt.max_k), std::nullopt);
    path.fine_exit.assign(static_cast<std::size_t>(opt.max_k), std::nullopt);

    const Grid& fine = plan.fine_grid();
    if (opt.fine_trajectory) {
        path.fine = plan.fine_grid_ptr();
        path.fine_states.assign(fine.size() * static_cast<std::size_t>(d), std::nan(""));
    }

    Vec x = Eigen::Map<const Vec>(xi.data(), d);
    Vec b(d), dw(d1), acc(d1), bn(d), h(d1), next(d);
    Mat s(d, d1);
    bool frozen = false;

    auto store = [&](std::size_t i) {
        for (int c = 0; c < d; ++c) path.states[i * d + c] = x(c);
    };
    auto check_exit = [&](std::span<const double> y, std::size_t idx, bool on_fine) {
        auto& target = on_fine ? path.fine_exit : path.exit_step;
        for (int k = 1; k <= opt.max_k; ++k)
            if (!target[k - 1] && !problem.domain->contains(k, y)) target[k - 1] = idx;
    };
    auto freeze = [&](std::size_t step, std::string why) {
        frozen = true;
        path.blown_up = true;
        path.blowup_step = step;
        path.blowup_reason = std::move(why);
    };

    for (std::size_t i = 0; i < opt.start_step; ++i) store(i);
    store(opt.start_step);
    check_exit(path.state(opt.start_step), opt.start_step, false);
    if (opt.fine_trajectory) {
        const std::size_t j0 = emb.positions[opt.start_step];
        for (int c = 0; c < d; ++c) path.fine_states[j0 * d + c] = x(c);
        check_exit(path.fine_state(j0), j0, true);
    }

    for (std::size_t i = opt.start_step; i + 1 < g.size(); ++i) {
        const double t = g.times[i];
        const double dt = g.step(i);
        dw = dW.col(static_cast<Eigen::Index>(i));
        if (!frozen) {
            try {
                const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
                if (opt.variant == Variant::driftless) {
                    b.setZero(d);
                } else if (opt.variant == Variant::tamed) {
                    opt.schedule->tamed_drift(n, t, xs, b);
                } else {
                    problem.drift_at(t, xs, b);
                }
                problem.diffusion_at(t, xs, s);
                if (opt.girsanov) {
                    if (opt.variant == Variant::tamed)
                        bn = b;
                    else
                        opt.schedule->tamed_drift(n, t, xs, bn);
                    detail::right_inverse_apply(s, bn, xs, h);
                    path.log_gamma += -h.dot(dw) - 0.5 * h.squaredNorm() * dt;
                }
                if (!detail::all_finite(b) || !s.allFinite()) {
                    freeze(i, "non-finite coefficient");
                } else {
                    if (opt.fine_trajectory) {
                        // x_n(r) = x_i + b (r - t_i) + σ (w(r) - w(t_i)) on fine points inside the step
                        acc.setZero(d1);
                        for (std::size_t j = emb.positions[i]; j + 1 < emb.positions[i + 1]; ++j) {
                            for (int c = 0; c < d1; ++c) acc(c) += plan.fine_increment(j, c);
                            const double r = fine.times[j + 1] - t;
                            double* y = path.fine_states.data() + (j + 1) * d;
                            for (int a = 0; a < d; ++a) {
                                double v = x(a) + b(a) * r;
                                for (int c = 0; c < d1; ++c) v += s(a, c) * acc(c);
                                y[a] = v;
                            }
                            if (opt.max_k > 0) check_exit(path.fine_state(j + 1), j + 1, true);
                        }
                    }
                    next.noalias() = x + b * dt;
                    next.noalias() += s * dw;
                    if (!next.allFinite() || next.norm() > kBlowUp)
                        freeze(i, "state norm above 1e12");
                    else
                        x = next;
                }
            } catch (const EvalError& e) {
                freeze(i, e.what());
            }
        }
        if (frozen && opt.fine_trajectory) {
            for (std::size_t j = emb.positions[i] + 1; j < emb.positions[i + 1]; ++j)
                for (int c = 0; c < d; ++c) path.fine_states[j * d + c] = x(c);
        }
        store(i + 1);
        check_exit(path.state(i + 1), i + 1, false);
        if (opt.fine_trajectory) {
            const std::size_t j = emb.positions[i + 1];
            for (int c = 0; c < d; ++c) path.fine_states[j * d + c] = x(c);
            check_exit(path.fine_state(j), j, true);
        }
    }
    return path;
}

/// Piecewise-linear interpolation between grid states; exact at grid points.
inline Vec interpolate(const DiscretePath& path, double t) {
    if (!(t >= 0.0 && t <= path.horizon())) throw DomainError("interpolation time outside [0, horizon]");
    const std::size_t i = path.grid.floor_index(t);
    if (path.grid.times[i] == t || i + 1 >= path.grid.size()) return path.state_vec(i);
    const double t0 = path.grid.times[i], t1 = path.grid.times[i + 1];
    const double w = (t - t0) / (t1 - t0);
    const Vec a = path.state_vec(i), b = path.state_vec(i + 1);
    if (a == b) return a;
    return a + w * (b - a);
}

/// Value of the continuous-time scheme at fine point j (requires the fine trajectory).
inline Vec continuous_state(const DiscretePath& path, std::size_t fine_index) {
    if (path.fine_states.empty()) throw ConfigError("path was simulated without its fine trajectory");
    return Eigen::Map<const Vec>(path.fine_states.data() + fine_index * path.dim, path.dim);
}

/// γ_n(T) of a path simulated with SimOptions::girsanov.
inline double girsanov_exponent(const DiscretePath& path) { return std::exp(path.log_gamma); }

/// γ_n(T) recomputed from a stored path: left-endpoint values of σ^{-1}b_n,
/// the plan's increments and the step lengths, over steps ending by T.
inline double girsanov_exponent(const ProblemSpec& problem, const TamingSchedule& schedule, const DiscretePath& path,
                                const NoisePlan& plan, double T) {
    const Mat dW = plan.wiener_increments(path.grid);
    Vec bn, h;
    Mat s;
    double lg = 0.0;
    for (std::size_t i = path.start_step; i + 1 < path.grid.size() && path.grid.times[i + 1] <= T; ++i) {
        const double t = path.grid.times[i];
        const auto xs = path.state(i);
        schedule.tamed_drift(path.n, t, xs, bn);
        problem.diffusion_at(t, xs, s);
        detail::right_inverse_apply(s, bn, xs, h);
        lg += -h.dot(dW.col(static_cast<Eigen::Index>(i))) - 0.5 * h.squaredNorm() * (path.grid.times[i + 1] - t);
    }
    return std::exp(lg);
}

}  // namespace eulerlab
