#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "eulerlab/error.hpp"

namespace eulerlab::stats {

inline constexpr double kZ95 = 1.959963984540054;

/// Sample mean with a 95% normal-approximation half-width. Sums run in
/// index order, so equal inputs give bit-equal outputs.
struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double std_error = 0.0;
    double half_width = 0.0;
};

/// Smallest half-width reported for N > 1 when the sample has no spread.
inline double half_width_floor(double mean) { return 1e-12 * std::max(1.0, std::fabs(mean)); }

inline Summary summarize(std::span<const double> xs) {
    Summary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.variance = ss / static_cast<double>(xs.size() - 1);
        s.std_error = std::sqrt(s.variance / static_cast<double>(xs.size()));
        s.half_width = std::max(kZ95 * s.std_error, half_width_floor(s.mean));
    }
    return s;
}

/// Fraction of successes with a Wilson-score half-width: the larger distance
/// from the point estimate to either end of the 95% Wilson interval.
struct Proportion {
    std::size_t successes = 0;
    std::size_t count = 0;
    double estimate = 0.0;
    double half_width = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

inline Proportion proportion(std::size_t successes, std::size_t count) {
    Proportion p;
    p.successes = successes;
    p.count = count;
    if (count == 0) return p;
    const double n = static_cast<double>(count);
    const double ph = static_cast<double>(successes) / n;
    const double z2 = kZ95 * kZ95;
    const double centre = (ph + z2 / (2 * n)) / (1 + z2 / n);
    const double rad = kZ95 * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    p.estimate = ph;
    p.lower = std::max(0.0, centre - rad);
    p.upper = std::min(1.0, centre + rad);
    p.half_width = count > 1 ? std::max(ph - p.lower, p.upper - ph) : 0.0;
    return p;
}

/// True when the largest 0.1% of the values (at least one) carry more than
/// half of the total. Values are expected nonnegative.
inline bool heavy_tail(std::span<const double> xs) {
    if (xs.empty()) return false;
    std::vector<double> v(xs.begin(), xs.end());
    const std::size_t top = std::max<std::size_t>(1, (v.size() + 999) / 1000);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(top - 1), v.end(), std::greater<>());
    double total = 0.0, head = 0.0;
    for (double x : xs) total += x;
    for (std::size_t i = 0; i < top; ++i) head += v[i];
    return total > 0 && head > 0.5 * total;
}

/// Ordinary least squares y = a + b x.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    std::size_t points = 0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ResolutionError("a line fit needs at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw ResolutionError("a line fit needs distinct abscissae");
    LinearFit f;
    f.points = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / (n - 2) / sxx);
    }
    return f;
}

/// Empirical quantile with linear interpolation (type 7).
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace eulerlab::stats
