#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulerlab/dsl/parser.hpp"
#include "eulerlab/dsl/program.hpp"
#include "eulerlab/error.hpp"

namespace eulerlab::dsl {

/// Override applied at declared singular points of a field, e.g. the tan
/// drift that is set to 0 at odd integers.
struct PoleRule {
    enum class Kind { none, odd_integers, integers, points };
    Kind kind = Kind::none;
    double value = 0.0;
    std::vector<std::vector<double>> points;

    bool matches(std::span<const double> x) const {
        switch (kind) {
            case Kind::none: return false;
            case Kind::odd_integers:
                for (double v : x)
                    if (std::floor(v) == v && std::fmod(std::fabs(v), 2.0) == 1.0) return true;
                return false;
            case Kind::integers:
                for (double v : x)
                    if (std::floor(v) == v) return true;
                return false;
            case Kind::points:
                for (const auto& p : points) {
                    bool eq = p.size() == x.size();
                    for (std::size_t i = 0; eq && i < p.size(); ++i) eq = p[i] == x[i];
                    if (eq) return true;
                }
                return false;
        }
        return false;
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::none: return "none";
            case Kind::odd_integers: return "odd-integers";
            case Kind::integers: return "integers";
            case Kind::points: return "points";
        }
        return "none";
    }
};

/// Matrix of expressions in (t, x): d x 1 for drift, d x d1 for diffusion,
/// 1 x 1 for scalar fields such as V or M(t).
class CoefficientField {
public:
    CoefficientField() = default;

    CoefficientField(int rows, int cols, int dim, std::vector<Program> entries, PoleRule poles = {})
        : rows_(rows), cols_(cols), dim_(dim), entries_(std::move(entries)), poles_(std::move(poles)) {
        if (static_cast<int>(entries_.size()) != rows_ * cols_)
            throw ConfigError("coefficient field entry count does not match its shape");
        for (const auto& e : entries_)
            if (e.dim() != dim_) throw ConfigError("coefficient entry parsed with mismatched dimension");
    }

    /// Parses a row-major matrix of expression strings.
    static CoefficientField parse(const std::vector<std::vector<std::string>>& rows, int dim,
                                  std::vector<std::string> extras = {}, PoleRule poles = {}) {
        if (rows.empty() || rows.front().empty()) throw ConfigError("coefficient field must be nonempty");
        const int r = static_cast<int>(rows.size());
        const int c = static_cast<int>(rows.front().size());
        std::vector<Program> entries;
        entries.reserve(static_cast<std::size_t>(r * c));
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != c) throw ConfigError("coefficient field rows have unequal length");
            for (const auto& src : row) entries.emplace_back(dsl::parse(src, dim, extras));
        }
        return CoefficientField(r, c, dim, std::move(entries), std::move(poles));
    }

    static CoefficientField scalar(const std::string& src, int dim, std::vector<std::string> extras = {}) {
        return parse({{src}}, dim, std::move(extras));
    }

    static CoefficientField vector(const std::vector<std::string>& comps, int dim) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& c : comps) rows.push_back({c});
        return parse(rows, dim);
    }

    static CoefficientField constant(int rows, int cols, int dim, double value) {
        std::vector<Program> entries;
        for (int i = 0; i < rows * cols; ++i) entries.emplace_back(Expr(make_number(value), dim));
        return CoefficientField(rows, cols, dim, std::move(entries));
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int dim() const { return dim_; }
    bool empty() const { return entries_.empty(); }
    const PoleRule& poles() const { return poles_; }
    const Program& entry(int r, int c) const { return entries_[static_cast<std::size_t>(r * cols_ + c)]; }

    /// True when every entry is the literal 0.
    bool is_zero() const {
        for (const auto& e : entries_) {
            const auto& n = e.expr().root();
            if (n.kind != Node::Kind::number || n.value != 0.0) return false;
        }
        return true;
    }

    /// Writes the field into `out` (resized to rows x cols).
    void eval(double t, std::span<const double> x, Eigen::MatrixXd& out, std::span<const double> extras = {}) const {
        if (out.rows() != rows_ || out.cols() != cols_) out.resize(rows_, cols_);
        if (poles_.matches(x)) {
            out.setConstant(poles_.value);
            return;
        }
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) out(r, c) = entry(r, c)(t, x, extras);
    }

    void eval_vector(double t, std::span<const double> x, Eigen::VectorXd& out,
                     std::span<const double> extras = {}) const {
        if (out.size() != rows_) out.resize(rows_);
        if (poles_.matches(x)) {
            out.setConstant(poles_.value);
            return;
        }
        for (int r = 0; r < rows_; ++r) out(r) = entry(r, 0)(t, x, extras);
    }

    double eval_scalar(double t, std::span<const double> x, std::span<const double> extras = {}) const {
        if (poles_.matches(x)) return poles_.value;
        return entries_.front()(t, x, extras);
    }

    std::vector<std::vector<std::string>> sources() const {
        std::vector<std::vector<std::string>> out(static_cast<std::size_t>(rows_));
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) out[static_cast<std::size_t>(r)].push_back(entry(r, c).expr().print());
        return out;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    int dim_ = 0;
    std::vector<Program> entries_;
    PoleRule poles_;
};

}  // namespace eulerlab::dsl
