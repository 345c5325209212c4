#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulerlab/dsl/field.hpp"
#include "eulerlab/error.hpp"
#include "eulerlab/model/problem.hpp"
#include "eulerlab/model/quadrature.hpp"

namespace eulerlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// ‖·‖_{p,q,T}; p or q may be infinite.
struct MixedNorm {
    double p = 2.0;
    double q = 2.0;
    double horizon = 1.0;
};

/// Spatial truncation box and node counts for mixed-norm quadrature.
struct QuadratureSpec {
    std::vector<double> lo, hi;
    int cells = 2000;                     // per axis
    int order = 4;                        // Gauss points per cell
    int time_cells = 16;
    int time_order = 4;
    std::vector<std::vector<double>> singular_points;
    int grading_levels = 160;
    bool check_truncation = true;
};

struct MixedNormResult {
    double value = 0.0;
    bool lower_bound = false;  // truncation or unresolved singularity
    std::string note;
};

/// Truncation box: bounding box of D_K for the largest configured K, or
/// [-10,10]^d without a domain.
inline QuadratureSpec default_quadrature(const ProblemSpec& problem, int largest_k) {
    QuadratureSpec q;
    if (problem.domain) {
        auto [a, b] = problem.domain->bounding_box(largest_k);
        q.lo = a;
        q.hi = b;
    } else {
        q.lo.assign(static_cast<std::size_t>(problem.dim_state), -10.0);
        q.hi.assign(static_cast<std::size_t>(problem.dim_state), 10.0);
    }
    q.singular_points = problem.singular_points;
    if (problem.dim_state == 2) q.cells = 96;
    if (problem.dim_state >= 3) q.cells = 16;
    return q;
}

namespace detail {

template <class F>
double mixed_norm_raw(F&& abs_f, const MixedNorm& norm, const QuadratureSpec& quad, const std::vector<double>& lo,
                      const std::vector<double>& hi, int grading, bool& saw_infinite) {
    const int d = static_cast<int>(lo.size());
    std::vector<QuadratureAxis> axes;
    for (int i = 0; i < d; ++i) {
        std::vector<double> sing;
        for (const auto& s : quad.singular_points)
            if (static_cast<int>(s.size()) == d) sing.push_back(s[i]);
        axes.push_back(build_axis(lo[i], hi[i], quad.cells, quad.order, sing, grading));
    }
    const auto tax = build_axis(0.0, norm.horizon, quad.time_cells, quad.time_order);

    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<std::size_t> idx(static_cast<std::size_t>(d));
    double outer = 0.0;
    for (std::size_t j = 0; j < tax.nodes.size(); ++j) {
        const double t = tax.nodes[j];
        double inner = 0.0;
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            double w = 1.0;
            for (int i = 0; i < d; ++i) {
                x[i] = axes[i].nodes[idx[i]];
                w *= axes[i].weights[idx[i]];
            }
            const double v = std::fabs(abs_f(t, std::span<const double>(x)));
            if (!std::isfinite(v)) {
                saw_infinite = true;
            } else if (std::isinf(norm.p)) {
                inner = std::max(inner, v);
            } else {
                inner += w * std::pow(v, norm.p);
            }
            int i = 0;
            while (i < d && ++idx[i] == axes[i].nodes.size()) idx[i++] = 0;
            if (i == d) break;
        }
        const double spatial = std::isinf(norm.p) ? inner : std::pow(inner, 1.0 / norm.p);
        if (std::isinf(norm.q))
            outer = std::max(outer, spatial);
        else
            outer += tax.weights[j] * std::pow(spatial, norm.q);
    }
    return std::isinf(norm.q) ? outer : std::pow(outer, 1.0 / norm.q);
}

}  // namespace detail

/// Numeric ‖f‖_{p,q,T} of |f| for a callable f(t, x) -> |f(t,x)|.
template <class F>
MixedNormResult mixed_norm_of(F&& abs_f, const MixedNorm& norm, const QuadratureSpec& quad) {
    if (!(norm.p >= 1.0) || !(norm.q >= 1.0)) throw ConfigError("mixed norm exponents must be >= 1");
    if (!(norm.horizon > 0.0)) throw ConfigError("mixed norm horizon must be positive");
    if (quad.lo.size() != quad.hi.size() || quad.lo.empty())
        throw ConfigError("quadrature box must be declared");

    MixedNormResult res;
    bool infinite = false;
    res.value = detail::mixed_norm_raw(abs_f, norm, quad, quad.lo, quad.hi, quad.grading_levels, infinite);
    if (infinite) {
        res.lower_bound = true;
        res.note = "non-finite integrand at quadrature nodes";
    }
    if (!quad.check_truncation) return res;

    // coarser singular grading: a large change means the singularity is not integrable
    if (!quad.singular_points.empty() && !std::isinf(norm.p)) {
        bool inf2 = false;
        const double coarse =
            detail::mixed_norm_raw(abs_f, norm, quad, quad.lo, quad.hi, quad.grading_levels / 2, inf2);
        if (std::fabs(res.value - coarse) > 1e-2 * std::max(res.value, 1e-300)) {
            res.lower_bound = true;
            res.note = "integrand not resolved at singular points (divergent?)";
        }
    }
    // doubled box: growth means mass beyond the truncation
    std::vector<double> lo2(quad.lo.size()), hi2(quad.hi.size());
    for (std::size_t i = 0; i < lo2.size(); ++i) {
        const double c = 0.5 * (quad.lo[i] + quad.hi[i]), h = quad.hi[i] - quad.lo[i];
        lo2[i] = c - h;
        hi2[i] = c + h;
    }
    QuadratureSpec wide = quad;
    wide.cells = quad.cells * 2;
    bool inf3 = false;
    const double widened = detail::mixed_norm_raw(abs_f, norm, wide, lo2, hi2, quad.grading_levels, inf3);
    if (widened > res.value * (1.0 + 1e-6) + 1e-300) {
        res.lower_bound = true;
        if (!res.note.empty()) res.note += "; ";
        res.note += "integrand has mass beyond the truncation box";
    }
    return res;
}

/// ‖f‖_{p,q,T} of a coefficient field; vector-valued fields use the
/// Euclidean (Frobenius) norm pointwise.
inline MixedNormResult mixed_norm(const CoefficientField& f, const MixedNorm& norm, const QuadratureSpec& quad) {
    Eigen::MatrixXd buf;
    return mixed_norm_of(
        [&](double t, std::span<const double> x) {
            f.eval(t, x, buf);
            return buf.norm();
        },
        norm, quad);
}

}  // namespace eulerlab
