#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eulerlab/error.hpp"
#include "eulerlab/rng/normal.hpp"
#include "eulerlab/rng/philox.hpp"

namespace eulerlab {

/// Increasing chain of bounded domains D_1 ⊆ D_2 ⊆ ... exhausting D.
///
///  - interval (1-d) and box: D = (lo, hi) per axis, D_k shrinks each side by
///    h * 2^-k with h the half-width, so (-1,1) gives (-1+2^-k, 1-2^-k).
///  - ball: D = {|x-c| < R}, D_k = {|x-c| < R(1-2^-k)}.
///  - whole_space: D = R^d, D_k = {|x-c| < k}.
class DomainChain {
public:
    enum class Kind { whole_space, interval, box, ball };

    static DomainChain whole_space(int dim, std::vector<double> center = {}) {
        DomainChain d(Kind::whole_space, dim);
        d.center_ = center.empty() ? std::vector<double>(static_cast<std::size_t>(dim), 0.0) : std::move(center);
        return d;
    }

    static DomainChain interval(double lo, double hi) {
        if (!(lo < hi)) throw ConfigError("interval domain needs lo < hi");
        DomainChain d(Kind::interval, 1);
        d.lo_ = {lo};
        d.hi_ = {hi};
        return d;
    }

    static DomainChain box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size() || lo.empty()) throw ConfigError("box domain bounds must match and be nonempty");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw ConfigError("box domain needs lo < hi on every axis");
        DomainChain d(Kind::box, static_cast<int>(lo.size()));
        d.lo_ = std::move(lo);
        d.hi_ = std::move(hi);
        return d;
    }

    static DomainChain ball(std::vector<double> center, double radius) {
        if (!(radius > 0)) throw ConfigError("ball domain needs a positive radius");
        DomainChain d(Kind::ball, static_cast<int>(center.size()));
        d.center_ = std::move(center);
        d.radius_ = radius;
        return d;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }
    const std::vector<double>& center() const { return center_; }
    double radius() const { return radius_; }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::whole_space: return "whole_space";
            case Kind::interval: return "interval";
            case Kind::box: return "box";
            case Kind::ball: return "ball";
        }
        return "?";
    }

    /// Membership in D.
    bool contains(std::span<const double> x) const {
        switch (kind_) {
            case Kind::whole_space: return true;
            case Kind::interval:
            case Kind::box:
                for (int i = 0; i < dim_; ++i)
                    if (!(x[i] > lo_[i] && x[i] < hi_[i])) return false;
                return true;
            case Kind::ball: return dist_to_center(x) < radius_;
        }
        return false;
    }

    /// Membership in D_k (k >= 1).
    bool contains(int k, std::span<const double> x) const {
        check_k(k);
        switch (kind_) {
            case Kind::whole_space: return dist_to_center(x) < static_cast<double>(k);
            case Kind::interval:
            case Kind::box:
                for (int i = 0; i < dim_; ++i) {
                    const auto [a, b] = axis_k(k, i);
                    if (!(x[i] > a && x[i] < b)) return false;
                }
                return true;
            case Kind::ball: return dist_to_center(x) < radius_k(k);
        }
        return false;
    }

    /// Distance from x to ∂D_k; exact for all supported shapes at points
    /// inside D_k, and 0 on the boundary.
    double boundary_distance(int k, std::span<const double> x) const {
        check_k(k);
        switch (kind_) {
            case Kind::whole_space: return std::fabs(static_cast<double>(k) - dist_to_center(x));
            case Kind::ball: return std::fabs(radius_k(k) - dist_to_center(x));
            case Kind::interval:
            case Kind::box: {
                if (contains(k, x)) {
                    double m = HUGE_VAL;
                    for (int i = 0; i < dim_; ++i) {
                        const auto [a, b] = axis_k(k, i);
                        m = std::min({m, x[i] - a, b - x[i]});
                    }
                    return m;
                }
                double s = 0.0;
                for (int i = 0; i < dim_; ++i) {
                    const auto [a, b] = axis_k(k, i);
                    const double e = x[i] < a ? a - x[i] : (x[i] > b ? x[i] - b : 0.0);
                    s += e * e;
                }
                return std::sqrt(s);
            }
        }
        return 0.0;
    }

    /// Axis-aligned bounding box of D_k; membership fails outside it.
    std::pair<std::vector<double>, std::vector<double>> bounding_box(int k) const {
        check_k(k);
        std::vector<double> a(static_cast<std::size_t>(dim_)), b(static_cast<std::size_t>(dim_));
        for (int i = 0; i < dim_; ++i) {
            switch (kind_) {
                case Kind::whole_space:
                    a[i] = center_[i] - k;
                    b[i] = center_[i] + k;
                    break;
                case Kind::ball:
                    a[i] = center_[i] - radius_k(k);
                    b[i] = center_[i] + radius_k(k);
                    break;
                case Kind::interval:
                case Kind::box: std::tie(a[i], b[i]) = axis_k(k, i); break;
            }
        }
        return {a, b};
    }

    /// Diameter of D_1.
    double diameter_1() const {
        auto [a, b] = bounding_box(1);
        if (kind_ == Kind::ball || kind_ == Kind::whole_space) return b[0] - a[0];
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += (b[i] - a[i]) * (b[i] - a[i]);
        return std::sqrt(s);
    }

    /// Deterministic point set on ∂D_k with at least `count` points when the
    /// boundary is not finite (d = 1 boundaries have exactly two points).
    std::vector<std::vector<double>> boundary_points(int k, std::size_t count) const {
        check_k(k);
        std::vector<std::vector<double>> pts;
        if (dim_ == 1) {
            auto [a, b] = bounding_box(k);
            pts.push_back({a[0]});
            pts.push_back({b[0]});
            return pts;
        }
        if (kind_ == Kind::box || kind_ == Kind::interval) {
            auto [a, b] = bounding_box(k);
            const std::size_t per_face = std::max<std::size_t>(1, count / static_cast<std::size_t>(2 * dim_));
            for (int axis = 0; axis < dim_; ++axis)
                for (int side = 0; side < 2; ++side)
                    for (std::size_t j = 0; j < per_face; ++j) {
                        std::vector<double> p(static_cast<std::size_t>(dim_));
                        for (int i = 0; i < dim_; ++i) {
                            const double u = rng::uniform(0, rng::Stream::sampling, 0x0b0d, j,
                                                          static_cast<std::uint32_t>(i + 8 * axis));
                            p[i] = a[i] + u * (b[i] - a[i]);
                        }
                        p[axis] = side == 0 ? a[axis] : b[axis];
                        pts.push_back(std::move(p));
                    }
            return pts;
        }
        const double r = kind_ == Kind::ball ? radius_k(k) : static_cast<double>(k);
        for (std::size_t j = 0; j < count; ++j) {
            std::vector<double> dir(static_cast<std::size_t>(dim_));
            double norm = 0.0;
            if (dim_ == 2) {
                const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(count);
                dir = {std::cos(th), std::sin(th)};
                norm = 1.0;
            } else {
                for (int i = 0; i < dim_; ++i) {
                    dir[i] = rng::normal_quantile(
                        rng::uniform(0, rng::Stream::sampling, 0x0ba11, j, static_cast<std::uint32_t>(i)));
                    norm += dir[i] * dir[i];
                }
                norm = std::sqrt(norm);
            }
            for (int i = 0; i < dim_; ++i) dir[i] = center_[i] + r * dir[i] / norm;
            pts.push_back(std::move(dir));
        }
        return pts;
    }

private:
    DomainChain(Kind kind, int dim) : kind_(kind), dim_(dim) {
        if (dim <= 0) throw ConfigError("domain dimension must be positive");
    }

    Kind kind_;
    int dim_;
    std::vector<double> lo_, hi_, center_;
    double radius_ = 0.0;

    static void check_k(int k) {
        if (k < 1) throw IndexError("domain chain index must be >= 1");
    }

    std::pair<double, double> axis_k(int k, int i) const {
        const double h = 0.5 * (hi_[i] - lo_[i]);
        const double shrink = h * std::ldexp(1.0, -k);
        return {lo_[i] + shrink, hi_[i] - shrink};
    }

    double radius_k(int k) const { return radius_ * (1.0 - std::ldexp(1.0, -k)); }

    double dist_to_center(std::span<const double> x) const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
            const double c = center_.empty() ? 0.0 : center_[i];
            s += (x[i] - c) * (x[i] - c);
        }
        return std::sqrt(s);
    }
};

}  // namespace eulerlab
