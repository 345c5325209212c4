#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eulerlab/error.hpp"
#include "eulerlab/stats/summary.hpp"

namespace eulerlab::stats {

/// Tensor-product histogram density estimate for d <= 3.
struct Histogram {
    int dim = 1;
    std::vector<double> lo;
    std::vector<double> width;
    std::vector<std::size_t> bins;  // per axis
    std::vector<std::size_t> counts;
    std::size_t total = 0;     // all samples, including excluded ones
    std::size_t excluded = 0;  // non-finite samples

    double cell_volume() const {
        double v = 1.0;
        for (double w : width) v *= w;
        return v;
    }
    double density(std::size_t cell) const {
        return static_cast<double>(counts[cell]) / (static_cast<double>(total) * cell_volume());
    }
    double max_density() const {
        std::size_t m = 0;
        for (std::size_t c : counts) m = std::max(m, c);
        return static_cast<double>(m) / (static_cast<double>(total) * cell_volume());
    }
    /// ∫ p̂ dx = 1 minus the excluded mass.
    double integral() const {
        std::size_t s = 0;
        for (std::size_t c : counts) s += c;
        return static_cast<double>(s) / static_cast<double>(total);
    }
    double truncated_mass() const { return static_cast<double>(excluded) / static_cast<double>(total); }
    /// (∫ p̂^q dx)^{1/q}.
    double lq_norm(double q) const {
        double s = 0.0;
        const double v = cell_volume();
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c]) s += std::pow(density(c), q) * v;
        return std::pow(s, 1.0 / q);
    }
    std::size_t cells() const { return counts.size(); }
};

/// Freedman-Diaconis width 2 IQR N^{-1/3} per marginal, unless `bins_per_axis`
/// is given. `samples` is row-major N x d. Throws ResolutionError when the
/// average count per cell falls below `min_average`.
inline Histogram build_histogram(const std::vector<double>& samples, int d,
                                 std::optional<std::size_t> bins_per_axis = std::nullopt, double min_average = 10.0) {
    if (d < 1 || d > 3) throw ConfigError("density histograms support 1 <= d <= 3");
    const std::size_t n_all = samples.size() / static_cast<std::size_t>(d);
    if (n_all < 2) throw ResolutionError("a histogram needs at least two samples");
    Histogram h;
    h.dim = d;
    h.total = n_all;

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n_all; ++i) {
        bool ok = true;
        for (int c = 0; c < d; ++c) ok = ok && std::isfinite(samples[i * d + c]);
        if (ok)
            keep.push_back(i);
        else
            ++h.excluded;
    }
    if (keep.size() < 2) throw ResolutionError("fewer than two finite samples for the histogram");

    std::size_t cells = 1;
    for (int c = 0; c < d; ++c) {
        std::vector<double> m;
        m.reserve(keep.size());
        for (std::size_t i : keep) m.push_back(samples[i * d + c]);
        const auto [mn_it, mx_it] = std::minmax_element(m.begin(), m.end());
        const double mn = *mn_it, mx = *mx_it;
        std::size_t b;
        if (bins_per_axis) {
            b = *bins_per_axis;
        } else {
            const double iqr = quantile(m, 0.75) - quantile(m, 0.25);
            if (!(iqr > 0)) throw ResolutionError("sample has zero interquartile range; use fixed bins");
            const double w = 2.0 * iqr * std::pow(static_cast<double>(keep.size()), -1.0 / 3.0);
            b = static_cast<std::size_t>(std::max(1.0, std::ceil((mx - mn) / w)));
        }
        if (b == 0) throw ConfigError("histogram needs at least one bin per axis");
        double span = mx - mn;
        if (!(span > 0)) span = 1.0;
        h.lo.push_back(mn);
        h.width.push_back(span / static_cast<double>(b));
        h.bins.push_back(b);
        cells *= b;
        if (cells > (std::size_t{1} << 26)) throw ResolutionError("histogram would need too many cells");
    }
    if (static_cast<double>(keep.size()) / static_cast<double>(cells) < min_average)
        throw ResolutionError("only " + std::to_string(static_cast<double>(keep.size()) / static_cast<double>(cells)) +
                              " samples per bin on average; increase the path count or use coarser bins");

    h.counts.assign(cells, 0);
    for (std::size_t i : keep) {
        std::size_t cell = 0, stride = 1;
        for (int c = 0; c < d; ++c) {
            const double u = (samples[i * d + c] - h.lo[c]) / h.width[c];
            auto k = static_cast<std::size_t>(std::max(0.0, std::floor(u)));
            k = std::min(k, h.bins[c] - 1);
            cell += k * stride;
            stride *= h.bins[c];
        }
        ++h.counts[cell];
    }
    return h;
}

}  // namespace eulerlab::stats
