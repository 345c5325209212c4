#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulerlab/dsl/field.hpp"
#include "eulerlab/error.hpp"
#include "eulerlab/model/domain.hpp"
#include "eulerlab/model/quadrature.hpp"

namespace eulerlab {

using dsl::CoefficientField;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Law of the initial value ξ.
struct InitialLaw {
    enum class Kind { point, uniform_box, gaussian, discrete };
    Kind kind = Kind::point;
    std::vector<double> point;                 // point
    std::vector<double> lo, hi;                // uniform_box
    std::vector<double> mean;                  // gaussian
    std::vector<std::vector<double>> cov;      // gaussian
    std::vector<std::vector<double>> atoms;    // discrete
    std::vector<double> weights;               // discrete

    static InitialLaw point_mass(std::vector<double> x) {
        InitialLaw l;
        l.point = std::move(x);
        return l;
    }
    static InitialLaw uniform(std::vector<double> lo, std::vector<double> hi) {
        InitialLaw l;
        l.kind = Kind::uniform_box;
        l.lo = std::move(lo);
        l.hi = std::move(hi);
        return l;
    }

    int dim() const {
        switch (kind) {
            case Kind::point: return static_cast<int>(point.size());
            case Kind::uniform_box: return static_cast<int>(lo.size());
            case Kind::gaussian: return static_cast<int>(mean.size());
            case Kind::discrete: return atoms.empty() ? 0 : static_cast<int>(atoms.front().size());
        }
        return 0;
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::point: return "point";
            case Kind::uniform_box: return "uniform";
            case Kind::gaussian: return "gaussian";
            case Kind::discrete: return "discrete";
        }
        return "?";
    }
};

/// Lyapunov witness for condition (ii): V >= 0, LV <= M(t) V, V_k(T) -> ∞.
struct LyapunovSpec {
    CoefficientField value;                    // V(t,x), 1x1
    std::optional<CoefficientField> generator; // LV(t,x) in closed form
    CoefficientField rate;                     // M(t), parsed with dim 0
    double fd_scale = 1e-4;                    // h = fd_scale * (1 + |x|)
};

struct ProblemSpec {
    std::string name = "inline";
    int dim_state = 1;
    int dim_noise = 1;
    CoefficientField drift;       // d x 1
    CoefficientField diffusion;   // d x d1
    InitialLaw initial;
    std::optional<DomainChain> domain;
    std::optional<LyapunovSpec> lyapunov;
    std::optional<CoefficientField> envelope;  // M_k(t): variables t and k
    double holder_alpha = 1.0;                 // declared Hölder exponent of σ
    std::vector<std::vector<double>> singular_points;  // where b may blow up; used by quadrature

    void validate() const {
        if (dim_state <= 0 || dim_noise <= 0) throw ConfigError("problem dimensions must be positive");
        if (drift.rows() != dim_state || drift.cols() != 1)
            throw ConfigError("drift must be a " + std::to_string(dim_state) + "x1 field");
        if (diffusion.rows() != dim_state || diffusion.cols() != dim_noise)
            throw ConfigError("diffusion must be a " + std::to_string(dim_state) + "x" +
                              std::to_string(dim_noise) + " field");
        if (drift.dim() != dim_state || diffusion.dim() != dim_state)
            throw ConfigError("coefficient expressions parsed with the wrong dimension");
        if (initial.dim() != dim_state) throw ConfigError("initial law dimension does not match the state");
        if (domain && domain->dim() != dim_state) throw ConfigError("domain dimension does not match the state");
        if (!(holder_alpha > 0.0 && holder_alpha <= 1.0)) throw ConfigError("holder_alpha must lie in (0, 1]");
        if (lyapunov && (lyapunov->value.rows() != 1 || lyapunov->value.cols() != 1))
            throw ConfigError("Lyapunov value must be scalar");
    }

    bool in_domain(std::span<const double> x) const { return !domain || domain->contains(x); }

    /// b(t,x), zero outside D.
    void drift_at(double t, std::span<const double> x, Vec& out) const {
        if (!in_domain(x)) {
            out.setZero(dim_state);
            return;
        }
        drift.eval_vector(t, x, out);
    }

    /// σ(t,x), zero outside D.
    void diffusion_at(double t, std::span<const double> x, Mat& out) const {
        if (!in_domain(x)) {
            out.setZero(dim_state, dim_noise);
            return;
        }
        diffusion.eval(t, x, out);
    }

    /// M_k(t): the declared envelope, or the sampled sup of max(|b|, |σ|²)
    /// over D_k at time t on a 10^3-point grid when none is declared.
    double envelope_at(int k, double t) const {
        if (envelope) {
            const double kk = static_cast<double>(k);
            return envelope->eval_scalar(t, {}, std::span<const double>(&kk, 1));
        }
        if (!domain) throw ConfigError("an envelope M_k needs a domain chain or a declared expression");
        return sampled_envelope(k, t);
    }

    double sampled_envelope(int k, double t) const {
        auto [a, b] = domain->bounding_box(k);
        const int per_axis = std::max(2, static_cast<int>(std::lround(std::pow(1000.0, 1.0 / dim_state))));
        std::vector<int> idx(static_cast<std::size_t>(dim_state), 0);
        std::vector<double> x(static_cast<std::size_t>(dim_state));
        Vec bv;
        Mat sv;
        double sup = 0.0;
        for (;;) {
            for (int i = 0; i < dim_state; ++i)
                x[i] = a[i] + (idx[i] + 0.5) * (b[i] - a[i]) / per_axis;
            if (domain->contains(k, x)) {
                drift_at(t, x, bv);
                diffusion_at(t, x, sv);
                sup = std::max({sup, bv.norm(), sv.squaredNorm()});
            }
            int i = 0;
            while (i < dim_state && ++idx[i] == per_axis) idx[i++] = 0;
            if (i == dim_state) break;
        }
        return sup;
    }

    double lyapunov_value(double t, std::span<const double> x) const {
        return lyapunov->value.eval_scalar(t, x);
    }

    double lyapunov_rate(double t) const { return lyapunov->rate.eval_scalar(t, {}); }

    /// LV(t,x) = ∂_t V + b·∇V + ½ tr(σσ* ∇²V). Uses the closed form when
    /// declared, otherwise second-order central differences with step
    /// h = fd_scale (1 + |x|) (one-sided in t near t = 0).
    double generator_applied(double t, std::span<const double> x, double scale_multiplier = 1.0) const {
        const auto& ly = *lyapunov;
        if (ly.generator && scale_multiplier == 1.0) return ly.generator->eval_scalar(t, x);
        const int d = dim_state;
        double xnorm = 0.0;
        for (int i = 0; i < d; ++i) xnorm += x[i] * x[i];
        const double h = ly.fd_scale * scale_multiplier * (1.0 + std::sqrt(xnorm));
        std::vector<double> y(x.begin(), x.end());
        auto V = [&](double tt, const std::vector<double>& p) { return ly.value.eval_scalar(tt, p); };

        const double v0 = V(t, y);
        double dt;
        if (t >= h)
            dt = (V(t + h, y) - V(t - h, y)) / (2 * h);
        else
            dt = (-3 * v0 + 4 * V(t + h, y) - V(t + 2 * h, y)) / (2 * h);

        Vec grad(d);
        Mat hess(d, d);
        for (int i = 0; i < d; ++i) {
            y[i] = x[i] + h;
            const double vp = V(t, y);
            y[i] = x[i] - h;
            const double vm = V(t, y);
            y[i] = x[i];
            grad(i) = (vp - vm) / (2 * h);
            hess(i, i) = (vp - 2 * v0 + vm) / (h * h);
            for (int j = 0; j < i; ++j) {
                auto at = [&](double si, double sj) {
                    y[i] = x[i] + si * h;
                    y[j] = x[j] + sj * h;
                    const double v = V(t, y);
                    y[i] = x[i];
                    y[j] = x[j];
                    return v;
                };
                hess(i, j) = hess(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
            }
        }
        Vec bv;
        Mat sv;
        drift_at(t, x, bv);
        diffusion_at(t, x, sv);
        const Mat a = sv * sv.transpose();
        return dt + bv.dot(grad) + 0.5 * (a.cwiseProduct(hess)).sum();
    }

    /// V_k(T) = inf of V over ∂D_k × [0,T], evaluated on at least 10^3
    /// boundary-time points.
    double boundary_inf(int k, double T) const {
        if (!lyapunov || !domain) throw ConfigError("V_k(T) needs a Lyapunov function and a domain chain");
        auto pts = domain->boundary_points(k, 200);
        const std::size_t time_nodes = std::max<std::size_t>(5, (1000 + pts.size() - 1) / pts.size());
        double inf = HUGE_VAL;
        for (std::size_t j = 0; j < time_nodes; ++j) {
            const double t = T * static_cast<double>(j) / static_cast<double>(time_nodes - 1);
            for (const auto& p : pts) inf = std::min(inf, lyapunov->value.eval_scalar(t, p));
        }
        return inf;
    }

    /// ∫_0^T M(t) dt by composite Gauss-Legendre.
    double integrated_rate(double T) const {
        return integrate_1d([&](double t) { return lyapunov_rate(t); }, 0.0, T, 64, 8);
    }
};

}  // namespace eulerlab
