#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eulerlab/error.hpp"

namespace eulerlab {

using Index = std::int64_t;

/// Sorted time grid starting at 0. Uniform grids carry their step count per
/// unit time; their points are the correctly rounded values of i/n, so two
/// uniform grids agree bit-for-bit wherever their rationals coincide.
struct Grid {
    std::vector<double> times;
    std::optional<Index> uniform_n;

    std::size_t size() const { return times.size(); }
    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    double back() const { return times.back(); }

    /// Length of step i. Steps between two points i/n of a uniform grid are
    /// exactly 1/n rather than the rounded difference.
    double step(std::size_t i) const {
        if (uniform_n) {
            const double n = static_cast<double>(*uniform_n);
            if (times[i + 1] == static_cast<double>(i + 1) / n) return 1.0 / n;
        }
        return times[i + 1] - times[i];
    }

    /// Index of the largest grid point <= t. Exact at grid points.
    std::size_t floor_index(double t) const {
        if (uniform_n) {
            const double n = static_cast<double>(*uniform_n);
            auto i = static_cast<std::int64_t>(std::floor(t * n));
            i = std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(times.size()) - 1);
            while (i + 1 < static_cast<std::int64_t>(times.size()) && times[static_cast<std::size_t>(i + 1)] <= t) ++i;
            while (i > 0 && times[static_cast<std::size_t>(i)] > t) --i;
            return static_cast<std::size_t>(i);
        }
        auto it = std::upper_bound(times.begin(), times.end(), t);
        return it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin() - 1);
    }

    /// Position of t on the grid, if t is exactly a grid point.
    std::optional<std::size_t> find(double t) const {
        auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it == times.end() || *it != t) return std::nullopt;
        return static_cast<std::size_t>(it - times.begin());
    }

    /// FNV-1a over the bit patterns of the points.
    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (double t : times) {
            auto bits = std::bit_cast<std::uint64_t>(t);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xFFu;
                h *= 0x100000001b3ull;
            }
        }
        return h;
    }
};

inline Grid uniform_grid(Index n, double horizon) {
    if (n <= 0) throw ConfigError("uniform grid needs n >= 1");
    if (!(horizon > 0)) throw ConfigError("horizon must be positive");
    Grid g;
    g.uniform_n = n;
    const double nd = static_cast<double>(n);
    for (Index i = 0;; ++i) {
        const double t = static_cast<double>(i) / nd;
        if (t > horizon) break;
        g.times.push_back(t);
    }
    if (g.times.back() < horizon) g.times.push_back(horizon);
    return g;
}

/// Sorted union of grids, duplicates removed.
inline Grid grid_union(const std::vector<const Grid*>& grids) {
    Grid out;
    for (const Grid* g : grids) out.times.insert(out.times.end(), g->times.begin(), g->times.end());
    std::sort(out.times.begin(), out.times.end());
    out.times.erase(std::unique(out.times.begin(), out.times.end()), out.times.end());
    if (grids.size() == 1) out.uniform_n = grids.front()->uniform_n;
    return out;
}

inline Grid restrict_grid(const Grid& g, double horizon) {
    Grid out;
    out.uniform_n = g.uniform_n;
    for (double t : g.times)
        if (t <= horizon) out.times.push_back(t);
    return out;
}

/// Indexed family of partitions 0 = t_0^n < t_1^n < ... covering [0, horizon].
class PartitionFamily {
public:
    enum class Kind { uniform, explicit_grids };

    static PartitionFamily uniform(std::vector<Index> ns, double horizon) {
        if (ns.empty()) throw ConfigError("partition needs at least one index");
        PartitionFamily p;
        p.kind_ = Kind::uniform;
        p.horizon_ = horizon;
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        for (Index n : ns) p.grids_.emplace(n, uniform_grid(n, horizon));
        return p;
    }

    static PartitionFamily explicit_grids(const std::map<Index, std::vector<double>>& grids, double horizon) {
        if (grids.empty()) throw ConfigError("partition needs at least one index");
        if (!(horizon > 0)) throw ConfigError("horizon must be positive");
        PartitionFamily p;
        p.kind_ = Kind::explicit_grids;
        p.horizon_ = horizon;
        for (const auto& [n, pts] : grids) {
            if (pts.size() < 2 || pts.front() != 0.0)
                throw ConfigError("explicit grid " + std::to_string(n) + " must start at 0 and have a step");
            for (std::size_t i = 1; i < pts.size(); ++i)
                if (!(pts[i] > pts[i - 1]))
                    throw ConfigError("explicit grid " + std::to_string(n) + " must be strictly increasing");
            if (pts.back() < horizon)
                throw ConfigError("explicit grid " + std::to_string(n) + " does not cover the horizon");
            p.grids_.emplace(n, Grid{pts, std::nullopt});
        }
        return p;
    }

    Kind kind() const { return kind_; }
    double horizon() const { return horizon_; }

    std::vector<Index> indices() const {
        std::vector<Index> out;
        for (const auto& [n, g] : grids_) out.push_back(n);
        return out;
    }

    bool has(Index n) const { return grids_.count(n) != 0; }

    /// Full grid for index n (may extend past the horizon for explicit grids).
    const Grid& grid(Index n) const {
        auto it = grids_.find(n);
        if (it == grids_.end()) throw IndexError("partition index " + std::to_string(n) + " is not configured");
        return it->second;
    }

    /// Grid for index n restricted to [0, horizon].
    Grid simulation_grid(Index n) const { return restrict_grid(grid(n), horizon_); }

    /// kappa_n(t): the largest grid point <= t.
    double kappa(Index n, double t) const {
        const Grid& g = grid(n);
        if (!(t >= 0.0 && t <= horizon_))
            throw DomainError("time " + std::to_string(t) + " outside [0, horizon]");
        return g.times[g.floor_index(t)];
    }

    /// d_n(T): the largest step among steps ending at or before T.
    double mesh(Index n, double T) const {
        const Grid& g = grid(n);
        double m = 0.0;
        bool any = false;
        for (std::size_t i = 0; i + 1 < g.size() && g.times[i + 1] <= T; ++i) {
            m = std::max(m, g.step(i));
            any = true;
        }
        if (!any) throw DomainError("no partition step ends at or before T");
        return m;
    }

    /// min step / d_n(T) over steps ending at or before T.
    double regularity(Index n, double T) const {
        const Grid& g = grid(n);
        const double d = mesh(n, T);
        double m = d;
        for (std::size_t i = 0; i + 1 < g.size() && g.times[i + 1] <= T; ++i)
            m = std::min(m, g.step(i));
        return m / d;
    }

    /// delta(T) over the configured range: the smallest regularity ratio.
    double delta(double T) const {
        double out = 1.0;
        for (const auto& [n, g] : grids_) out = std::min(out, regularity(n, T));
        return out;
    }

private:
    Kind kind_ = Kind::uniform;
    double horizon_ = 1.0;
    std::map<Index, Grid> grids_;
};

}  // namespace eulerlab
