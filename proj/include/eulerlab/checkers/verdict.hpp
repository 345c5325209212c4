#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eulerlab/diagnostics/report.hpp"
#include "eulerlab/error.hpp"

namespace eulerlab {

namespace assumption {
inline constexpr const char* holds = "holds-on-sample";
inline constexpr const char* violated = "violated";
inline constexpr const char* inconclusive = "inconclusive";
}  // namespace assumption

/// A sample point (t, x), or a pair (t, x, y) for two-point conditions.
struct Witness {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> y;
};

struct AssumptionVerdict {
    std::string id;
    std::string label;
    std::size_t samples = 0;
    double worst_value = -HUGE_VAL;  // largest lhs - rhs seen
    std::optional<Witness> location;
    double margin = HUGE_VAL;
    std::string verdict = assumption::holds;
    std::vector<std::string> notes;
    ordered_json details = ordered_json::object();

    bool is_violated() const { return verdict == assumption::violated; }
    bool holds() const { return verdict == assumption::holds; }
};

/// Sample budget and seed for every check.
struct CheckOptions {
    std::uint64_t seed = 0;
    std::size_t mesh = 10000;
    std::size_t random = 10000;
    double tolerance = 1e-9;  // on (lhs - rhs) / max(1, |rhs|)
};

namespace detail {

/// Normalized excess of lhs over rhs; NaN or +inf on the left is a violation.
inline double excess(double lhs, double rhs) {
    const double raw = lhs - rhs;
    if (std::isnan(raw) || raw == HUGE_VAL) return HUGE_VAL;
    return raw / std::max(1.0, std::fabs(rhs));
}

/// Running maximum of the normalized excess with its location.
struct Worst {
    double score = -HUGE_VAL;
    double raw = -HUGE_VAL;
    Witness at;
    bool seen = false;
    std::size_t count = 0;

    void offer(double lhs, double rhs, double t, std::span<const double> x, std::span<const double> y = {}) {
        ++count;
        const double s = excess(lhs, rhs);
        if (seen && !(s > score)) return;
        seen = true;
        score = s;
        raw = std::isnan(lhs - rhs) ? HUGE_VAL : lhs - rhs;
        at.t = t;
        at.x.assign(x.begin(), x.end());
        at.y.assign(y.begin(), y.end());
    }

    void merge(const Worst& o) {
        count += o.count;
        if (o.seen && (!seen || o.score > score)) {
            score = o.score;
            raw = o.raw;
            at = o.at;
            seen = true;
        }
    }
};

/// Fills samples, worst value, margin and the verdict from a tracker.
inline void settle(AssumptionVerdict& v, const Worst& w, double tol) {
    v.samples = w.count;
    if (!w.seen) {
        v.notes.push_back("no sample points");
        v.verdict = assumption::inconclusive;
        return;
    }
    v.worst_value = w.raw;
    v.margin = -w.raw;
    if (w.score > tol) {
        v.verdict = assumption::violated;
        v.location = w.at;
    } else {
        v.verdict = assumption::holds;
    }
}

}  // namespace detail

/// The most severe of several verdicts for one condition (violated, then
/// inconclusive, then the smallest margin).
inline AssumptionVerdict worst_of(const std::vector<AssumptionVerdict>& vs) {
    if (vs.empty()) throw ConfigError("worst_of needs at least one verdict");
    auto rank = [](const AssumptionVerdict& v) {
        return v.verdict == assumption::violated ? 2 : (v.verdict == assumption::inconclusive ? 1 : 0);
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < vs.size(); ++i) {
        const int a = rank(vs[i]), b = rank(vs[best]);
        if (a > b || (a == b && vs[i].margin < vs[best].margin)) best = i;
    }
    AssumptionVerdict out = vs[best];
    out.samples = 0;
    for (const auto& v : vs) out.samples += v.samples;
    return out;
}

}  // namespace eulerlab
