#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulerlab/checkers/sampling.hpp"
#include "eulerlab/checkers/verdict.hpp"
#include "eulerlab/model/mixed_norm.hpp"
#include "eulerlab/model/problem.hpp"
#include "eulerlab/model/quadrature.hpp"
#include "eulerlab/model/taming.hpp"
#include "eulerlab/rng/noise.hpp"

namespace eulerlab {

namespace detail {

// salts keep the random streams of different checks apart
inline std::uint64_t check_salt(std::uint64_t check, int k) { return (check << 12) + 8 * static_cast<std::uint64_t>(k); }

inline bool eval_coeffs(const ProblemSpec& p, double t, std::span<const double> x, Vec& b, Mat& s) {
    try {
        p.drift_at(t, x, b);
        p.diffusion_at(t, x, s);
    } catch (const Error&) {
        return false;
    }
    return b.allFinite() && s.allFinite();
}

inline bool eval_diffusion(const ProblemSpec& p, double t, std::span<const double> x, Mat& s) {
    try {
        p.diffusion_at(t, x, s);
    } catch (const Error&) {
        return false;
    }
    return s.allFinite();
}

inline double sq_dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
}

inline ordered_json witness_json(const Witness& w) {
    ordered_json j;
    j["t"] = w.t;
    j["x"] = w.x;
    if (!w.y.empty()) j["y"] = w.y;
    return j;
}

/// Smallest and largest eigenvalue of σσ*.
inline std::pair<double, double> gram_range(const Mat& s) {
    const Mat a = s * s.transpose();
    if (a.rows() == 1) return {a(0, 0), a(0, 0)};
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// V's infimum over ∂D_k x [0,T] with the point attaining it; the same
/// nodes as ProblemSpec::boundary_inf.
struct BoundaryMin {
    double value = HUGE_VAL;
    Witness at;
};

inline BoundaryMin boundary_min(const ProblemSpec& p, int k, double T) {
    const auto chain = p.domain ? *p.domain : DomainChain::whole_space(p.dim_state);
    auto pts = chain.boundary_points(k, 200);
    const std::size_t time_nodes = std::max<std::size_t>(5, (1000 + pts.size() - 1) / pts.size());
    BoundaryMin out;
    for (std::size_t j = 0; j < time_nodes; ++j) {
        const double t = T * static_cast<double>(j) / static_cast<double>(time_nodes - 1);
        for (const auto& x : pts) {
            const double v = p.lyapunov->value.eval_scalar(t, x);
            if (v < out.value || std::isnan(v)) {
                out.value = v;
                out.at = {t, x, {}};
                if (std::isnan(v)) return out;
            }
        }
    }
    return out;
}

struct HolderFit {
    bool smooth = false;  // σ constant near every base point
    double alpha_hat = HUGE_VAL;
    std::vector<double> radii, envelope;
    Witness at;  // pair attaining the envelope at the smallest radius
};

/// Log-log slope of r -> max over base points of |σ(x + r e) - σ(x)| for
/// r in [1e-6, 1e-3] and coordinate directions ±e.
inline HolderFit fit_holder(const ProblemSpec& p, const Region& region) {
    constexpr int kRadii = 13;
    constexpr std::size_t kBase = 2000;
    HolderFit f;
    const int d = region.dim();
    const auto base = mesh_points(region, kBase);
    for (int j = 0; j < kRadii; ++j) f.radii.push_back(std::pow(10.0, -6.0 + 3.0 * j / (kRadii - 1)));
    f.envelope.assign(kRadii, 0.0);
    std::vector<Witness> arg(kRadii);
    Mat s0, s1;
    std::vector<double> y(static_cast<std::size_t>(d));
    for (const auto& pt : base) {
        if (!eval_diffusion(p, pt.t, pt.x, s0)) continue;
        for (int c = 0; c < d; ++c)
            for (double sgn : {1.0, -1.0})
                for (int j = 0; j < kRadii; ++j) {
                    y = pt.x;
                    y[c] += sgn * f.radii[j];
                    if (!region.member(y) || !eval_diffusion(p, pt.t, y, s1)) continue;
                    const double e = (s1 - s0).norm();
                    if (e > f.envelope[j]) {
                        f.envelope[j] = e;
                        arg[j] = {pt.t, pt.x, y};
                    }
                }
    }
    std::vector<double> lx, ly;
    for (int j = 0; j < kRadii; ++j)
        if (f.envelope[j] > 0.0) {
            if (lx.empty()) f.at = arg[j];
            lx.push_back(std::log(f.radii[j]));
            ly.push_back(std::log(f.envelope[j]));
        }
    if (lx.size() < 3) {
        f.smooth = true;
        return f;
    }
    f.alpha_hat = stats::fit_line(lx, ly).slope;
    return f;
}

/// Heuristic check that ∫_0 1/g diverges: ∫_δ^{0.1} 1/g for δ = 10^-2..10^-8
/// by log substitution; "divergent" when the last decade contributes at least
/// 0.2 of the first.
template <class G>
ordered_json divergence_probe(G&& g, const std::string& label, bool& divergent) {
    std::vector<double> deltas, values, decades;
    double acc = 0.0;
    for (int j = 1; j <= 7; ++j) {
        const double a = std::pow(10.0, -j - 1), b = std::pow(10.0, -j);
        const double inc = integrate_1d(
            [&](double s) {
                const double r = std::exp(s);
                return r / g(r);
            },
            std::log(a), std::log(b), 8, 8);
        acc += inc;
        if (j >= 2) decades.push_back(inc);
        deltas.push_back(a);
        values.push_back(acc);
    }
    const double ratio = decades.back() / decades.front();
    divergent = std::isinf(acc) || !(ratio < 0.2);
    ordered_json j;
    j["label"] = label;
    j["heuristic"] = true;
    j["delta"] = deltas;
    j["integral"] = values;
    j["last_to_first_decade"] = ratio;
    j["appears_divergent"] = divergent;
    return j;
}

}  // namespace detail

/// Condition (i) on [0, min(k,T)] x closure(D_k): |b| <= M_k(t) and
/// |σ|^2 <= M_k(t). On R^d with a Lyapunov rate M(t) also
/// 2(x,b) + |σ|^2 <= M(t)(|x|^2 + 1).
inline AssumptionVerdict check_growth(const ProblemSpec& p, int k, double T, const CheckOptions& opt = {}) {
    AssumptionVerdict v;
    v.id = "growth";
    v.label = "coefficients bounded by M_k on D_k";
    const Region r = domain_region(p, k, T);
    const auto pts = sample_points(r, opt, detail::check_salt(1, k));
    const bool whole = !p.domain || p.domain->kind() == DomainChain::Kind::whole_space;
    const bool linear = whole && p.lyapunov.has_value();
    detail::Worst wb, ws, wl;
    Vec b;
    Mat s;
    for (const auto& pt : pts) {
        const double M = p.envelope_at(k, pt.t);
        const bool ok = detail::eval_coeffs(p, pt.t, pt.x, b, s);
        const double nb = ok ? b.norm() : std::nan("");
        const double ns = ok ? s.squaredNorm() : std::nan("");
        wb.offer(nb, M, pt.t, pt.x);
        ws.offer(ns, M, pt.t, pt.x);
        if (linear) {
            double xx = 0.0, xb = 0.0;
            for (int i = 0; i < p.dim_state; ++i) {
                xx += pt.x[i] * pt.x[i];
                xb += ok ? pt.x[i] * b(i) : std::nan("");
            }
            wl.offer(2.0 * xb + ns, p.lyapunov_rate(pt.t) * (xx + 1.0), pt.t, pt.x);
        }
    }
    detail::Worst all = wb;
    all.merge(ws);
    if (linear) all.merge(wl);
    detail::settle(v, all, opt.tolerance);
    v.samples = pts.size();
    v.details["k"] = k;
    v.details["t_range"] = {0.0, r.t_end};
    v.details["drift_excess"] = wb.raw;
    v.details["diffusion_excess"] = ws.raw;
    if (linear) v.details["linear_growth_excess"] = wl.raw;
    if (r.t_end < T) v.notes.push_back("bounds are required for t in [0, k] only; checked on [0, min(k, T)]");
    return v;
}

/// Condition (ii): LV <= M V and V >= 0 sampled over [0,T] x closure(D_K),
/// and V_k(T) strictly increasing for k = 1..K.
inline AssumptionVerdict check_lyapunov(const ProblemSpec& p, double T, int K = 4, const CheckOptions& opt = {}) {
    if (!p.lyapunov) throw ConfigError("check_lyapunov needs a Lyapunov function");
    if (K < 2) throw ConfigError("check_lyapunov needs K >= 2 to test growth of V_k");
    AssumptionVerdict v;
    v.id = "lyapunov";
    v.label = "LV <= M V with V_k(T) increasing";
    Region r = domain_region(p, K, T);
    r.t_end = T;
    const auto pts = sample_points(r, opt, detail::check_salt(2, K));
    detail::Worst wl, wv;
    for (const auto& pt : pts) {
        double V = std::nan(""), LV = std::nan("");
        try {
            V = p.lyapunov_value(pt.t, pt.x);
            LV = p.generator_applied(pt.t, pt.x);
        } catch (const Error&) {
        }
        wl.offer(LV, p.lyapunov_rate(pt.t) * V, pt.t, pt.x);
        wv.offer(-V, 0.0, pt.t, pt.x);
    }
    detail::Worst all = wl;
    all.merge(wv);
    detail::settle(v, all, opt.tolerance);
    v.samples = pts.size();
    v.details["K"] = K;
    v.details["generator"] = p.lyapunov->generator ? "closed form" : "finite differences";
    v.details["max_LV_minus_MV"] = wl.raw;

    bool fd_unstable = false;
    if (!p.lyapunov->generator && wl.seen && std::isfinite(wl.raw)) {
        const double a = p.generator_applied(wl.at.t, wl.at.x);
        const double b = p.generator_applied(wl.at.t, wl.at.x, 0.5);
        fd_unstable = !(std::fabs(a - b) <= 1e-3 * std::max(1.0, std::fabs(a)));
        v.details["fd_change_at_half_step"] = std::fabs(a - b);
    }

    std::vector<double> vk;
    std::optional<detail::BoundaryMin> drop;
    double prev = -HUGE_VAL;
    for (int k = 1; k <= K; ++k) {
        const auto m = detail::boundary_min(p, k, T);
        vk.push_back(m.value);
        if (!drop && !(m.value > prev)) {
            drop = m;
            drop->value = prev - m.value;
        }
        prev = m.value;
    }
    v.details["V_k"] = vk;

    if (v.is_violated()) return v;
    if (drop) {
        v.verdict = assumption::violated;
        v.location = drop->at;
        v.worst_value = std::isnan(drop->value) ? HUGE_VAL : drop->value;
        v.margin = -v.worst_value;
        v.notes.push_back("V_k(T) does not increase in k at the witness boundary point");
        return v;
    }
    if (fd_unstable) {
        v.verdict = assumption::inconclusive;
        v.notes.push_back("finite-difference generator changes at half step: V may not be C^{1,2} here");
    }
    return v;
}

/// Condition (iii): the initial law is supported in D.
inline AssumptionVerdict check_initial_support(const ProblemSpec& p) {
    AssumptionVerdict v;
    v.id = "initial_support";
    v.label = "initial value lies in D";
    v.samples = 1;
    v.worst_value = 0.0;
    v.margin = 0.0;
    validate_initial_law(p.initial, std::nullopt);
    v.details["law"] = p.initial.kind_name();
    if (!p.domain || detail::law_support_in_domain(p.initial, *p.domain)) return v;

    const auto& dom = *p.domain;
    const auto& law = p.initial;
    Witness w;
    switch (law.kind) {
        case InitialLaw::Kind::point: w.x = law.point; break;
        case InitialLaw::Kind::discrete:
            for (const auto& a : law.atoms)
                if (!dom.contains(a)) {
                    w.x = a;
                    break;
                }
            break;
        case InitialLaw::Kind::uniform_box: {
            // the corner farthest out
            w.x = law.lo;
            double best = -HUGE_VAL;
            const int d = law.dim();
            for (int mask = 0; mask < (1 << d); ++mask) {
                std::vector<double> c(static_cast<std::size_t>(d));
                for (int i = 0; i < d; ++i) c[i] = (mask >> i) & 1 ? law.hi[i] : law.lo[i];
                double out = 0.0;
                if (dom.kind() == DomainChain::Kind::ball) {
                    out = std::sqrt(detail::sq_dist(c, dom.center())) - dom.radius();
                } else {
                    for (int i = 0; i < d; ++i) out = std::max({out, dom.lo()[i] - c[i], c[i] - dom.hi()[i]});
                }
                if (out > best) {
                    best = out;
                    w.x = c;
                }
            }
            break;
        }
        case InitialLaw::Kind::gaussian:
            // unbounded support: a point just past the edge of D
            w.x = law.mean;
            if (dom.kind() == DomainChain::Kind::ball)
                w.x[0] = dom.center()[0] + dom.radius();
            else
                w.x[0] = dom.hi()[0];
            break;
    }
    v.verdict = assumption::violated;
    v.location = w;
    v.worst_value = 1.0;
    v.margin = -1.0;
    v.notes.push_back("the witness lies in the support of the initial law but not in D");
    return v;
}

/// 2(x-y, b(x)-b(y)) + |σ(x)-σ(y)|^2 <= M_k(t)|x-y|^2 over sampled pairs.
inline AssumptionVerdict check_monotonicity(const ProblemSpec& p, int k, double T, const CheckOptions& opt = {}) {
    AssumptionVerdict v;
    v.id = "monotonicity";
    v.label = "one-sided Lipschitz condition on D_k";
    const Region r = domain_region(p, k, T);
    const auto pairs = sample_pairs(r, opt, detail::check_salt(3, k));
    detail::Worst w;
    Vec bx, by;
    Mat sx, sy;
    for (const auto& pr : pairs) {
        const double M = p.envelope_at(k, pr.t);
        double lhs = std::nan("");
        if (detail::eval_coeffs(p, pr.t, pr.x, bx, sx) && detail::eval_coeffs(p, pr.t, pr.y, by, sy)) {
            double dot = 0.0;
            for (int i = 0; i < p.dim_state; ++i) dot += (pr.x[i] - pr.y[i]) * (bx(i) - by(i));
            lhs = 2.0 * dot + (sx - sy).squaredNorm();
        }
        w.offer(lhs, M * detail::sq_dist(pr.x, pr.y), pr.t, pr.x, pr.y);
    }
    detail::settle(v, w, opt.tolerance);
    v.details["k"] = k;
    v.details["pairs"] = pairs.size();
    return v;
}

struct ModulusOptions {
    std::optional<std::string> variation;  // v_k(x): adds |v_k(x) - v_k(y)| to the modulus
};

/// One-dimensional pathwise-uniqueness conditions on D_k:
/// (x-y)(b(x)-b(y)) <= M_k|x-y|^2 and |σ(x)-σ(y)|^2 <= M_k(ρ(|x-y|) [+ |v(x)-v(y)|]),
/// plus a heuristic probe of ∫_0 1/ρ = ∞ (or ∫_0 1/(r ∨ ρ) with a variation term).
inline AssumptionVerdict check_yamada_watanabe(const ProblemSpec& p, int k, const std::string& rho_src, double T,
                                              const CheckOptions& opt = {}, const ModulusOptions& mod = {}) {
    if (p.dim_state != 1) throw ConfigError("check_yamada_watanabe applies to d = 1 only");
    const auto rho = CoefficientField::scalar(rho_src, 0, {"r"});
    auto rho_at = [&](double r) { return rho.eval_scalar(0.0, {}, std::span<const double>(&r, 1)); };
    std::optional<CoefficientField> var;
    if (mod.variation) var = CoefficientField::scalar(*mod.variation, 1);

    AssumptionVerdict v;
    v.id = "yamada_watanabe";
    v.label = "modulus condition for pathwise uniqueness (d = 1)";
    const Region r = domain_region(p, k, T);
    {
        const double hi = std::max(r.diameter(), 1e-7);
        double prev = 0.0;
        for (int j = 0; j <= 200; ++j) {
            const double x = std::exp(std::log(1e-8) + (std::log(hi) - std::log(1e-8)) * j / 200.0);
            const double g = rho_at(x);
            if (!(g > 0.0) || g < prev * (1.0 - 1e-12))
                throw ConfigError("modulus rho must be positive and nondecreasing on (0, diam D_k]; fails at r = " +
                                  std::to_string(x));
            prev = g;
        }
    }

    const auto pairs = sample_pairs(r, opt, detail::check_salt(4, k));
    detail::Worst wd, ws;
    Vec bx, by;
    Mat sx, sy;
    for (const auto& pr : pairs) {
        const double M = p.envelope_at(k, pr.t);
        const double dx = pr.x[0] - pr.y[0];
        double lhs_b = std::nan(""), lhs_s = std::nan("");
        if (detail::eval_coeffs(p, pr.t, pr.x, bx, sx) && detail::eval_coeffs(p, pr.t, pr.y, by, sy)) {
            lhs_b = dx * (bx(0) - by(0));
            lhs_s = (sx - sy).squaredNorm();
        }
        double mod_val = rho_at(std::fabs(dx));
        if (var) mod_val += std::fabs(var->eval_scalar(pr.t, pr.x) - var->eval_scalar(pr.t, pr.y));
        wd.offer(lhs_b, M * dx * dx, pr.t, pr.x, pr.y);
        ws.offer(lhs_s, M * mod_val, pr.t, pr.x, pr.y);
    }
    detail::Worst all = wd;
    all.merge(ws);
    detail::settle(v, all, opt.tolerance);
    v.samples = pairs.size();
    v.details["k"] = k;
    v.details["rho"] = rho_src;
    v.details["drift_excess"] = wd.raw;
    v.details["diffusion_excess"] = ws.raw;

    bool div_rho = false, div_max = false;
    v.details["probe_integral_of_1_over_rho"] =
        detail::divergence_probe(rho_at, "heuristic: integral of 1/rho(r) from delta to 0.1", div_rho);
    v.details["probe_integral_of_1_over_max_r_rho"] = detail::divergence_probe(
        [&](double x) { return std::max(x, rho_at(x)); },
        "heuristic: integral of 1/max(r, rho(r)) from delta to 0.1 (with a variation term)", div_max);

    bool tv_ok = true;
    if (var) {
        auto tv = [&](int m) {
            double s = 0.0, prev = var->eval_scalar(0.0, std::span<const double>(&r.lo[0], 1));
            for (int i = 1; i < m; ++i) {
                const double x = r.lo[0] + (r.hi[0] - r.lo[0]) * i / (m - 1);
                const double cur = var->eval_scalar(0.0, std::span<const double>(&x, 1));
                s += std::fabs(cur - prev);
                prev = cur;
            }
            return s;
        };
        const double a = tv(2001), b = tv(4001);
        tv_ok = std::isfinite(b) && b <= a * 1.01 + 1e-12;
        v.details["variation_mesh_sums"] = {a, b};
    }

    if (v.is_violated()) return v;
    const bool divergent = var ? div_max : div_rho;
    if (!divergent) {
        v.verdict = assumption::inconclusive;
        v.notes.push_back("heuristic probe suggests the modulus integral converges at 0");
    }
    if (!tv_ok) {
        v.verdict = assumption::inconclusive;
        v.notes.push_back("variation mesh sums keep growing under refinement");
    }
    return v;
}

/// Declared bounds checked in addition to the fitted ones.
struct NondegeneracyBounds {
    std::optional<double> eps_k;  // σσ* >= eps_k M_k I
    std::optional<double> eps;    // σσ* >= eps I
    std::optional<double> K;      // σσ* <= K I
};

/// Condition (iv): D_k bounded and convex, σσ* >= ε_k M_k I with ε_k fitted
/// from the sample (degenerate when the fit is not positive).
inline AssumptionVerdict check_nondegeneracy(const ProblemSpec& p, int k, double T, const CheckOptions& opt = {},
                                             const NondegeneracyBounds& bounds = {}) {
    AssumptionVerdict v;
    v.id = "nondegeneracy";
    v.label = "sigma sigma* uniformly positive on bounded convex D_k";
    const Region r = domain_region(p, k, T);
    const auto pts = sample_points(r, opt, detail::check_salt(5, k));
    detail::Worst w;
    double eps_k = HUGE_VAL, lmin_all = HUGE_VAL, lmax_all = -HUGE_VAL, at_lmin = 0.0;
    Witness at_eps;
    Mat s;
    for (const auto& pt : pts) {
        const double M = p.envelope_at(k, pt.t);
        double lo = std::nan(""), hi = std::nan("");
        if (detail::eval_diffusion(p, pt.t, pt.x, s)) std::tie(lo, hi) = detail::gram_range(s);
        const double ratio = lo / M;
        if (ratio < eps_k || std::isnan(ratio)) {
            if (!std::isnan(eps_k)) {
                eps_k = std::isnan(ratio) ? std::nan("") : ratio;
                at_eps = {pt.t, pt.x, {}};
                at_lmin = lo;
            }
        }
        lmin_all = std::min(lmin_all, lo);
        lmax_all = std::max(lmax_all, hi);
        if (bounds.eps_k) w.offer(*bounds.eps_k * M, lo, pt.t, pt.x);
        if (bounds.eps) w.offer(*bounds.eps, lo, pt.t, pt.x);
        if (bounds.K) w.offer(hi, *bounds.K, pt.t, pt.x);
    }

    // convexity probe on pair midpoints
    const auto pairs = sample_pairs(r, opt, detail::check_salt(5, k) + 4);
    std::optional<Witness> nonconvex;
    std::vector<double> mid(static_cast<std::size_t>(p.dim_state));
    for (const auto& pr : pairs) {
        for (int i = 0; i < p.dim_state; ++i) mid[i] = 0.5 * (pr.x[i] + pr.y[i]);
        if (!r.member(mid)) {
            nonconvex = Witness{pr.t, pr.x, pr.y};
            break;
        }
    }

    v.samples = pts.size();
    v.details["k"] = k;
    v.details["eps_k"] = eps_k;
    v.details["eps_abs"] = lmin_all;
    v.details["K_abs"] = lmax_all;
    v.details["bounded"] = true;
    v.details["convex"] = !nonconvex.has_value();

    if (w.seen) {
        detail::settle(v, w, opt.tolerance);
        v.samples = pts.size();
    }
    if (v.is_violated()) return v;
    if (!(eps_k > 1e-12)) {
        v.verdict = assumption::violated;
        v.location = at_eps;
        v.worst_value = std::isnan(at_lmin) ? HUGE_VAL : -at_lmin;
        v.margin = -v.worst_value;
        v.notes.push_back("sigma sigma* is degenerate at the witness (smallest eigenvalue " +
                          std::to_string(at_lmin) + ")");
        return v;
    }
    if (nonconvex) {
        v.verdict = assumption::violated;
        v.location = nonconvex;
        v.notes.push_back("midpoint of the witness pair lies outside D_k");
        return v;
    }
    if (!w.seen) {
        v.worst_value = -at_lmin;
        v.margin = at_lmin;
    }
    return v;
}

/// Local Hölder continuity of σ on D_k: |σ(x)-σ(y)|^2 <= M_k|x-y|^{2α} on
/// sampled pairs and a fitted exponent within 0.1 of α.
inline AssumptionVerdict check_holder(const ProblemSpec& p, int k, double alpha, double T,
                                      const CheckOptions& opt = {}) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("Hoelder exponent must lie in (0, 1]");
    AssumptionVerdict v;
    v.id = "holder";
    v.label = "sigma locally Hoelder with the declared exponent";
    const Region r = domain_region(p, k, T);
    const auto pairs = sample_pairs(r, opt, detail::check_salt(6, k));
    detail::Worst w;
    Mat sx, sy;
    for (const auto& pr : pairs) {
        const double M = p.envelope_at(k, pr.t);
        double lhs = std::nan("");
        if (detail::eval_diffusion(p, pr.t, pr.x, sx) && detail::eval_diffusion(p, pr.t, pr.y, sy))
            lhs = (sx - sy).squaredNorm();
        w.offer(lhs, M * std::pow(detail::sq_dist(pr.x, pr.y), alpha), pr.t, pr.x, pr.y);
    }
    detail::settle(v, w, opt.tolerance);
    const auto fit = detail::fit_holder(p, r);
    v.details["k"] = k;
    v.details["alpha"] = alpha;
    v.details["pairs"] = pairs.size();
    if (fit.smooth) {
        v.details["alpha_hat"] = "smooth";
        v.notes.push_back("sigma is constant at the zoom scales: any exponent holds");
    } else {
        v.details["alpha_hat"] = fit.alpha_hat;
    }
    v.details["radii"] = fit.radii;
    v.details["envelope"] = fit.envelope;
    if (v.is_violated() || fit.smooth) return v;
    if (fit.alpha_hat < alpha - 0.1) {
        v.verdict = assumption::violated;
        v.location = fit.at;
        v.worst_value = alpha - 0.1 - fit.alpha_hat;
        v.margin = -v.worst_value;
        v.notes.push_back("fitted exponent " + std::to_string(fit.alpha_hat) +
                          " is below the declared one; the witness pair attains the envelope at the smallest radius");
    }
    return v;
}

/// Standing assumptions of the tamed scheme: exponent inequalities, σ bounded,
/// nondegenerate and Hölder on the quadrature box, ‖b_n - b‖_{2p,2q,T}
/// nonincreasing in n, δ(T) > 0 and B(T) finite.
inline AssumptionVerdict check_assumption_751(const TamingSchedule& schedule, double T, const QuadratureSpec& quad,
                                              const CheckOptions& opt = {}) {
    const ProblemSpec& p = schedule.problem();
    const PartitionFamily& part = schedule.partition();
    const auto& np = schedule.params();
    const int d = p.dim_state;
    AssumptionVerdict v;
    v.id = "tamed_scheme";
    v.label = "conditions for tamed Euler convergence";
    v.worst_value = -HUGE_VAL;
    v.margin = HUGE_VAL;
    bool violated = false, inconclusive = false;
    auto fail = [&](const std::string& what) {
        violated = true;
        v.notes.push_back(what);
    };
    auto tighten = [&](double m) {
        v.margin = std::min(v.margin, m);
        v.worst_value = -v.margin;
    };

    // exponents
    const double lhs = d / np.p + 2.0 / np.q;
    v.details["exponent_sum"] = lhs;
    try {
        np.validate(d);
    } catch (const ConfigError& e) {
        fail(std::string("exponents: ") + e.what());
    }
    tighten(2.0 - lhs);

    // σ bounds and Hölder on the box
    const Region box = box_region(quad.lo, quad.hi, T);
    const auto pts = sample_points(box, opt, detail::check_salt(7, 0));
    double eps = HUGE_VAL, K = -HUGE_VAL;
    Witness at_eps;
    Mat s;
    for (const auto& pt : pts) {
        double lo = std::nan(""), hi = std::nan("");
        if (detail::eval_diffusion(p, pt.t, pt.x, s)) std::tie(lo, hi) = detail::gram_range(s);
        if (lo < eps || std::isnan(lo)) {
            if (!std::isnan(eps)) {
                eps = lo;
                at_eps = {pt.t, pt.x, {}};
            }
        }
        K = std::max(K, hi);
    }
    v.samples = pts.size();
    v.details["eps"] = eps;
    v.details["K"] = K;
    if (!(eps > 1e-12)) {
        fail("sigma sigma* is degenerate at the witness");
        v.location = at_eps;
    }
    if (!std::isfinite(K)) fail("sigma sigma* is unbounded on the sample");
    const auto fit = detail::fit_holder(p, box);
    v.details["alpha"] = np.alpha;
    if (fit.smooth) {
        v.details["alpha_hat"] = "smooth";
    } else {
        v.details["alpha_hat"] = fit.alpha_hat;
        if (fit.alpha_hat < np.alpha - 0.1) {
            fail("fitted Hoelder exponent of sigma is below alpha");
            if (!v.location) v.location = fit.at;
        }
    }

    // b_n -> b
    const double p2 = 2.0 * np.p, q2 = 2.0 * np.q;
    std::vector<double> diffs;
    ordered_json ns = ordered_json::array();
    for (Index n : part.indices()) {
        const auto r = schedule.difference_norm(n, T, p2, q2, quad);
        if (r.lower_bound) {
            inconclusive = true;
            v.notes.push_back("n=" + std::to_string(n) + ": " + r.note);
        }
        if (!diffs.empty() && r.value > diffs.back() * (1.0 + 1e-9) + 1e-300)
            fail("difference norm increases from n=" + std::to_string(ns.back().get<Index>()) +
                 " to n=" + std::to_string(n));
        diffs.push_back(r.value);
        ns.push_back(n);
    }
    if (diffs.size() >= 2 && diffs.front() > 0.0 && !(diffs.back() < diffs.front()))
        fail("difference norms do not decrease over the configured n");
    v.details["n"] = ns;
    v.details["difference_norms"] = diffs;

    // |b| on the box; mass outside is reported, not judged
    {
        QuadratureSpec local = quad;
        local.check_truncation = false;
        const auto nb = mixed_norm(p.drift, MixedNorm{p2, q2, T}, local);
        v.details["local_norm_b"] = nb.value;
        if (!std::isfinite(nb.value)) fail("|b| is not integrable on the quadrature box");
        const auto full = mixed_norm(p.drift, MixedNorm{p2, q2, T}, quad);
        if (full.lower_bound) v.notes.push_back("|b| on the quadrature box: " + full.note);
    }

    // step ratio and B(T)
    const double delta = part.delta(T);
    v.details["delta"] = delta;
    if (!(delta > 0.0)) fail("partition step ratio delta(T) is not positive");
    tighten(delta);
    const auto B = schedule.bound_B(T, quad);
    v.details["B"] = B.value;
    if (!std::isfinite(B.value)) fail("B(T) is not finite");
    if (B.lower_bound) {
        inconclusive = true;
        v.notes.push_back("B(T): " + B.note);
    }

    v.verdict = violated ? assumption::violated : (inconclusive ? assumption::inconclusive : assumption::holds);
    return v;
}

}  // namespace eulerlab
