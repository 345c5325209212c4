#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <tuple>
#include <vector>

#include "eulerlab/checkers/verdict.hpp"
#include "eulerlab/model/problem.hpp"
#include "eulerlab/rng/normal.hpp"
#include "eulerlab/rng/philox.hpp"

namespace eulerlab {

/// Closed sampling region in [0, t_end] x R^d with a bounding box.
struct Region {
    std::vector<double> lo, hi;
    std::function<bool(std::span<const double>)> member;
    double t_end = 0.0;

    int dim() const { return static_cast<int>(lo.size()); }
    double diameter() const {
        double s = 0.0;
        for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
        return std::sqrt(s);
    }
};

/// Closure of D_k over [0, min(k, T)]. Without a declared domain D_k is the
/// ball of radius k about the origin.
inline Region domain_region(const ProblemSpec& p, int k, double T) {
    if (k < 1) throw ConfigError("domain index k must be >= 1");
    if (!(T >= 0.0)) throw ConfigError("check horizon T must be >= 0");
    auto chain = p.domain ? *p.domain : DomainChain::whole_space(p.dim_state);
    Region r;
    std::tie(r.lo, r.hi) = chain.bounding_box(k);
    r.member = [chain, k](std::span<const double> x) {
        return chain.contains(k, x) || chain.boundary_distance(k, x) <= 1e-12;
    };
    r.t_end = std::min(static_cast<double>(k), T);
    return r;
}

inline Region box_region(std::vector<double> lo, std::vector<double> hi, double T) {
    Region r;
    r.lo = std::move(lo);
    r.hi = std::move(hi);
    r.member = [](std::span<const double>) { return true; };
    r.t_end = T;
    return r;
}

struct SamplePoint {
    double t = 0.0;
    std::vector<double> x;
};

struct SamplePair {
    double t = 0.0;
    std::vector<double> x, y;
};

/// Lattice over [0, t_end] x box, kept where it meets the region. Per-axis
/// counts are odd so both endpoints and the box centre are nodes.
inline std::vector<SamplePoint> mesh_points(const Region& r, std::size_t budget) {
    std::vector<SamplePoint> out;
    const int d = r.dim();
    if (budget == 0 || d == 0) return out;
    const std::size_t mt = r.t_end > 0.0 ? 5 : 1;
    const double per = std::pow(static_cast<double>(std::max<std::size_t>(budget / mt, 1)), 1.0 / d);
    std::size_t m = static_cast<std::size_t>(std::floor(per + 1e-9));
    if (m % 2 == 0) --m;
    m = std::max<std::size_t>(m, 3);
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t j = 0; j < mt; ++j) {
        const double t = mt == 1 ? 0.0 : r.t_end * static_cast<double>(j) / static_cast<double>(mt - 1);
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            for (int i = 0; i < d; ++i)
                x[i] = r.lo[i] + (r.hi[i] - r.lo[i]) * static_cast<double>(idx[i]) / static_cast<double>(m - 1);
            if (r.member(x)) out.push_back({t, x});
            int i = 0;
            while (i < d && ++idx[i] == m) idx[i++] = 0;
            if (i == d) break;
        }
    }
    return out;
}

namespace detail {

inline constexpr int kMaxRejections = 1000;

/// Uniform draw for sample `i` under `salt`; component 0 is time.
inline double sample_uniform(std::uint64_t seed, std::uint64_t salt, std::uint64_t i, std::uint64_t attempt,
                             std::uint32_t comp) {
    return rng::uniform(seed, rng::Stream::sampling, (salt << 40) ^ i, attempt, comp);
}

/// Uniform point of the region for sample `i`, by rejection from the box.
inline bool random_point(const Region& r, std::uint64_t seed, std::uint64_t salt, std::uint64_t i, SamplePoint& out,
                         std::uint32_t comp0 = 0) {
    const int d = r.dim();
    out.x.resize(static_cast<std::size_t>(d));
    for (int a = 0; a < kMaxRejections; ++a) {
        out.t = r.t_end * sample_uniform(seed, salt, i, static_cast<std::uint64_t>(a), comp0);
        for (int c = 0; c < d; ++c)
            out.x[c] = r.lo[c] + (r.hi[c] - r.lo[c]) *
                                     sample_uniform(seed, salt, i, static_cast<std::uint64_t>(a),
                                                    comp0 + 1 + static_cast<std::uint32_t>(c));
        if (r.member(out.x)) return true;
    }
    return false;
}

}  // namespace detail

inline std::vector<SamplePoint> random_points(const Region& r, std::size_t count, std::uint64_t seed,
                                              std::uint64_t salt) {
    std::vector<SamplePoint> out;
    out.reserve(count);
    SamplePoint p;
    for (std::size_t i = 0; i < count; ++i)
        if (detail::random_point(r, seed, salt, i, p)) out.push_back(p);
    return out;
}

/// Mesh plus uniform random points.
inline std::vector<SamplePoint> sample_points(const Region& r, const CheckOptions& opt, std::uint64_t salt) {
    auto pts = mesh_points(r, opt.mesh);
    auto rnd = random_points(r, opt.random, opt.seed, salt);
    pts.insert(pts.end(), rnd.begin(), rnd.end());
    return pts;
}

/// Pairs at equal times: every mesh point with a near partner at a
/// log-uniform distance in [1e-6, 0.1 diam], plus independent random pairs.
inline std::vector<SamplePair> sample_pairs(const Region& r, const CheckOptions& opt, std::uint64_t salt) {
    std::vector<SamplePair> out;
    const int d = r.dim();
    const double lmin = std::log(1e-6), lmax = std::log(std::max(0.1 * r.diameter(), 2e-6));
    const auto mesh = mesh_points(r, opt.mesh);
    std::vector<double> y(static_cast<std::size_t>(d)), dir(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        auto u = [&](std::uint32_t c) { return detail::sample_uniform(opt.seed, salt + 1, i, 0, c); };
        const double rad = std::exp(lmin + u(0) * (lmax - lmin));
        if (d == 1) {
            dir[0] = u(1) < 0.5 ? -1.0 : 1.0;
        } else {
            double n = 0.0;
            for (int c = 0; c < d; ++c) {
                dir[c] = rng::normal_quantile(u(1 + static_cast<std::uint32_t>(c)));
                n += dir[c] * dir[c];
            }
            n = std::sqrt(n);
            for (int c = 0; c < d; ++c) dir[c] /= n;
        }
        const auto& x = mesh[i].x;
        for (double s : {1.0, -1.0}) {
            for (int c = 0; c < d; ++c) y[c] = x[c] + s * rad * dir[c];
            if (r.member(y)) {
                out.push_back({mesh[i].t, x, y});
                break;
            }
        }
    }
    SamplePoint a, b;
    for (std::size_t i = 0; i < opt.random; ++i) {
        if (!detail::random_point(r, opt.seed, salt + 2, i, a)) continue;
        if (!detail::random_point(r, opt.seed, salt + 3, i, b)) continue;
        out.push_back({a.t, a.x, b.x});
    }
    return out;
}

}  // namespace eulerlab
