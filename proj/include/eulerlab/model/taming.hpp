#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "eulerlab/error.hpp"
#include "eulerlab/model/mixed_norm.hpp"
#include "eulerlab/model/partition.hpp"
#include "eulerlab/model/problem.hpp"

namespace eulerlab {

/// (p, q, α, γ) entering Assumption 7.5.1.
struct NormParams {
    double p = 2.0;
    double q = 2.0;
    double alpha = 1.0;
    double gamma = 0.25;

    /// Throws ConfigError naming the first violated requirement.
    void validate(int dim) const {
        if (!(q > 1.0) || std::isinf(q)) throw ConfigError("taming exponent q must lie in (1, inf)");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("taming alpha must lie in (0, 1]");
        if (!(p > dim / alpha) || std::isinf(p)) throw ConfigError("taming exponent p must lie in (d/alpha, inf)");
        if (!(gamma > 0.0 && gamma < (q - 1.0) / q)) throw ConfigError("taming gamma must lie in (0, (q-1)/q)");
        if (!(dim / p + 2.0 / q < 2.0)) throw ConfigError("taming exponents violate d/p + 2/q < 2");
    }
};

/// Truncated drifts b_n = b min(1, λ_n/|b|) with caps λ_n.
///
/// Default caps: λ_n = c d_n(T)^{-γ/2}. Then d_n^{γ/2} sup|b_n| <= c, so B(T)
/// stays bounded by c T^{1/(2q)} for every n.
class TamingSchedule {
public:
    TamingSchedule(const ProblemSpec& problem, const PartitionFamily& partition, NormParams params,
                   double c = 4.0, std::map<Index, double> explicit_caps = {})
        : problem_(&problem), partition_(&partition), params_(params), c_(c), caps_(std::move(explicit_caps)) {
        params_.validate(problem.dim_state);
        if (!(c_ > 0)) throw ConfigError("taming constant c must be positive");
        double prev = 0.0;
        for (Index n : partition.indices()) {
            const double l = cap(n);
            if (!(l > 0)) throw ConfigError("taming cap must be positive");
            if (l < prev) throw ConfigError("taming caps must be nondecreasing in n");
            prev = l;
        }
    }

    const NormParams& params() const { return params_; }
    double constant() const { return c_; }
    const std::map<Index, double>& explicit_caps() const { return caps_; }
    const ProblemSpec& problem() const { return *problem_; }
    const PartitionFamily& partition() const { return *partition_; }

    double cap(Index n) const {
        auto it = caps_.find(n);
        if (it != caps_.end()) return it->second;
        return c_ * std::pow(partition_->mesh(n, partition_->horizon()), -params_.gamma / 2.0);
    }

    /// b_n(t, x) written into out; |out| <= λ_n always.
    void tamed_drift(Index n, double t, std::span<const double> x, Vec& out) const {
        problem_->drift_at(t, x, out);
        apply_cap(cap(n), out);
    }

    static void apply_cap(double lambda, Vec& b) {
        bool any_inf = false;
        for (Eigen::Index i = 0; i < b.size(); ++i) any_inf = any_inf || std::isinf(b(i));
        if (any_inf) {
            // direction of the infinite components, length λ
            Vec dir = Vec::Zero(b.size());
            for (Eigen::Index i = 0; i < b.size(); ++i)
                if (std::isinf(b(i))) dir(i) = b(i) > 0 ? 1.0 : -1.0;
            b = dir * (lambda / dir.norm());
            return;
        }
        const double nb = b.norm();
        if (nb > lambda) b *= lambda / nb;
        // rounding can leave |b| a hair above λ
        while (b.norm() > lambda) b *= 1.0 - 0x1.0p-52;
    }

    /// B(T) = max over configured n of d_n^{γ/2}(T) ‖b_n‖_{∞,2q,T}.
    MixedNormResult bound_B(double T, const QuadratureSpec& quad) const {
        MixedNormResult out;
        for (Index n : partition_->indices()) {
            auto r = tamed_norm(n, T, kInf, 2.0 * params_.q, quad);
            const double v = std::pow(partition_->mesh(n, T), params_.gamma / 2.0) * r.value;
            out.value = std::max(out.value, v);
            if (r.lower_bound) {
                out.lower_bound = true;
                out.note = r.note;
            }
        }
        return out;
    }

    /// ‖b_n‖_{p,q,T}.
    MixedNormResult tamed_norm(Index n, double T, double p, double q, const QuadratureSpec& quad) const {
        Vec buf;
        const double lam = cap(n);
        return mixed_norm_of(
            [&](double t, std::span<const double> x) {
                problem_->drift_at(t, x, buf);
                apply_cap(lam, buf);
                return buf.norm();
            },
            MixedNorm{p, q, T}, quad);
    }

    /// ‖b_n - b‖_{p,q,T}; b may be singular, the difference is not (it
    /// vanishes wherever |b| <= λ_n).
    MixedNormResult difference_norm(Index n, double T, double p, double q, const QuadratureSpec& quad) const {
        Vec b, bn;
        const double lam = cap(n);
        return mixed_norm_of(
            [&](double t, std::span<const double> x) {
                problem_->drift_at(t, x, b);
                bn = b;
                apply_cap(lam, bn);
                for (Eigen::Index i = 0; i < b.size(); ++i)
                    if (std::isinf(b(i))) return HUGE_VAL;
                return (b - bn).norm();
            },
            MixedNorm{p, q, T}, quad);
    }

private:
    const ProblemSpec* problem_;
    const PartitionFamily* partition_;
    NormParams params_;
    double c_;
    std::map<Index, double> caps_;
};

}  // namespace eulerlab
