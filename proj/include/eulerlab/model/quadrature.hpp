#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "eulerlab/error.hpp"

namespace eulerlab {

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
    if (order < 1) throw ConfigError("Gauss-Legendre order must be >= 1");
    std::vector<double> x(static_cast<std::size_t>(order)), w(static_cast<std::size_t>(order));
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = order * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / dp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = w[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// One axis of a tensor quadrature: nodes and weights covering [lo, hi].
struct QuadratureAxis {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Composite Gauss-Legendre on `cells` equal cells, with extra geometric
/// breakpoints s ± h 2^-j (j = 1..grading_levels) around each singular point
/// s, h being the cell width. Integrable algebraic singularities at s are
/// then resolved to roughly h 2^-grading_levels.
inline QuadratureAxis build_axis(double lo, double hi, int cells, int order,
                                 const std::vector<double>& singular = {}, int grading_levels = 160) {
    if (!(lo < hi) || cells < 1) throw ConfigError("quadrature axis needs lo < hi and cells >= 1");
    std::vector<double> brk;
    const double h = (hi - lo) / cells;
    for (int i = 0; i <= cells; ++i) brk.push_back(lo + h * i);
    for (double s : singular) {
        if (!(s > lo && s < hi)) continue;
        brk.push_back(s);
        for (int j = 1; j <= grading_levels; ++j) {
            const double off = h * std::ldexp(1.0, -j);
            if (s - off > lo) brk.push_back(s - off);
            if (s + off < hi) brk.push_back(s + off);
        }
    }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    auto [gx, gw] = gauss_legendre(order);
    QuadratureAxis ax;
    for (std::size_t c = 0; c + 1 < brk.size(); ++c) {
        const double a = brk[c], b = brk[c + 1];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < gx.size(); ++q) {
            ax.nodes.push_back(mid + half * gx[q]);
            ax.weights.push_back(half * gw[q]);
        }
    }
    return ax;
}

template <class F>
double integrate_1d(F&& f, double a, double b, int cells, int order) {
    if (!(b > a)) return 0.0;
    auto ax = build_axis(a, b, cells, order);
    double s = 0.0;
    for (std::size_t i = 0; i < ax.nodes.size(); ++i) s += ax.weights[i] * f(ax.nodes[i]);
    return s;
}

}  // namespace eulerlab
