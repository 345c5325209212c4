#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "eulerlab/stats/summary.hpp"

namespace eulerlab {

using ordered_json = nlohmann::ordered_json;

namespace verdict {
inline constexpr const char* pass = "pass";
inline constexpr const char* fail = "fail";
inline constexpr const char* shape_pass = "shape-pass";
}  // namespace verdict

/// One line of a diagnostic: a per-n, per-pair or per-time estimate.
struct ReportRow {
    std::string label;
    double statistic = 0.0;
    double half_width = 0.0;
    std::optional<double> bound;
    std::vector<std::pair<std::string, double>> extras;

    double extra(const std::string& key) const {
        for (const auto& [k, v] : extras)
            if (k == key) return v;
        return std::nan("");
    }
};

struct DiagnosticReport {
    std::string name;
    double statistic = 0.0;
    double half_width = 0.0;
    std::optional<double> bound;  // empty: shape-only
    std::string verdict = verdict::fail;
    std::vector<ReportRow> rows;
    std::vector<std::string> warnings;
    ordered_json metadata = ordered_json::object();
    std::size_t blowups = 0;

    bool ok() const { return verdict != verdict::fail; }
};

/// Monte Carlo ensemble parameters shared by every estimator.
struct EnsembleSpec {
    std::uint64_t seed = 0;
    std::size_t paths = 10000;
    int workers = 1;
};

/// A row from a mean estimate.
inline ReportRow mean_row(std::string label, const stats::Summary& s) {
    ReportRow r;
    r.label = std::move(label);
    r.statistic = s.mean;
    r.half_width = s.half_width;
    return r;
}

/// A row from a proportion estimate.
inline ReportRow proportion_row(std::string label, const stats::Proportion& p) {
    ReportRow r;
    r.label = std::move(label);
    r.statistic = p.estimate;
    r.half_width = p.half_width;
    return r;
}

/// Nonincreasing within half-widths: a_{j+1} - hw_{j+1} <= a_j + hw_j.
inline bool nonincreasing_within(const std::vector<ReportRow>& rows) {
    for (std::size_t j = 1; j < rows.size(); ++j)
        if (rows[j].statistic - rows[j].half_width > rows[j - 1].statistic + rows[j - 1].half_width) return false;
    return true;
}

/// max/min of positive values; 1 for an all-zero list, +inf if only some are zero.
inline double spread(const std::vector<double>& v) {
    double lo = HUGE_VAL, hi = 0.0;
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (v.empty() || hi == 0.0) return 1.0;
    if (!(lo > 0.0)) return HUGE_VAL;
    return hi / lo;
}

inline ordered_json ensemble_metadata(const EnsembleSpec& e) {
    ordered_json m;
    m["paths"] = e.paths;
    m["seed"] = e.seed;
    return m;
}

}  // namespace eulerlab
