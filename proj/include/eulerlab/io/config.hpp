#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "eulerlab/checkers/checkers.hpp"
#include "eulerlab/diagnostics/diagnostics.hpp"
#include "eulerlab/io/json_field.hpp"
#include "eulerlab/io/presets.hpp"
#include "eulerlab/model/mixed_norm.hpp"
#include "eulerlab/model/taming.hpp"
#include "eulerlab/rng/noise.hpp"

namespace eulerlab::io {

inline constexpr int kConfigSchema = 1;

struct AssumptionRequest {
    std::string id;
    std::string path;
    std::vector<int> ks;
    int K = 4;                                // lyapunov
    std::string rho = "r";                    // yamada_watanabe
    std::optional<std::string> variation;     // yamada_watanabe
    NondegeneracyBounds bounds;               // nondegeneracy
    std::optional<double> alpha;              // holder; default: problem's
    int quadrature_k = 4;                     // tamed_scheme truncation box
};

struct CheckSettings {
    bool enabled = true;
    CheckOptions options;
    double T = 0.0;  // 0: horizon
    std::vector<AssumptionRequest> assumptions;
};

using DiagnosticParams = std::variant<CauchyParams, ExitParams, DensityParams, ExpMomentParams, GirsanovParams,
                                      OccupationParams, TightnessParams, DriftIntegralParams>;

struct DiagnosticRequest {
    std::string type;
    std::string path;
    std::optional<std::size_t> paths;  // overrides the ensemble size
    DiagnosticParams params;
};

struct DumpSettings {
    std::size_t paths = 0;  // 0: no dump
    Index n = 0;            // 0: largest configured index
};

struct ScheduleSettings {
    NormParams norm;
    double c = 4.0;
    std::map<Index, double> caps;
};

struct ExperimentConfig {
    ordered_json source;  // resolved config echoed into the report
    std::string preset;
    ProblemSpec problem;
    PartitionFamily partition;
    Variant scheme = Variant::polygonal;
    std::optional<ScheduleSettings> schedule;
    CheckSettings checks;
    std::vector<DiagnosticRequest> diagnostics;
    EnsembleSpec ensemble;
    std::string out_dir = "eulerlab-out";
    bool write_csv = true;
    DumpSettings dump;
    bool expect_violation = false;

    /// The taming schedule bound to this config's problem and partition.
    std::unique_ptr<TamingSchedule> make_schedule() const {
        if (!schedule) return nullptr;
        return std::make_unique<TamingSchedule>(problem, partition, schedule->norm, schedule->c, schedule->caps);
    }

    RunContext context(const TamingSchedule* sched, std::optional<std::size_t> paths = std::nullopt) const {
        RunContext c;
        c.problem = &problem;
        c.partition = &partition;
        c.ensemble = ensemble;
        if (paths) c.ensemble.paths = *paths;
        c.variant = scheme;
        c.schedule = sched;
        return c;
    }

    double check_horizon() const { return checks.T == 0.0 ? partition.horizon() : checks.T; }
};

inline std::vector<Index> default_indices() { return {8, 16, 32, 64, 128, 256}; }

inline const char* kDiagnosticTypes[] = {"cauchy_in_probability", "exit_time_bound",   "density_bounds",
                                         "exponential_moment",    "girsanov_moment",   "occupation_integral",
                                         "tightness_moment",      "drift_integral_convergence"};

inline const char* kAssumptionIds[] = {"growth",          "lyapunov",      "initial_support", "monotonicity",
                                       "yamada_watanabe", "nondegeneracy", "holder",          "tamed_scheme"};

namespace detail {

/// Replaces named constants by their values in a parsed tree.
inline dsl::NodePtr fold_constants(const dsl::NodePtr& n, int first_slot, const std::vector<double>& values) {
    using dsl::Node;
    if (n->kind == Node::Kind::variable) {
        if (n->slot >= first_slot) return dsl::make_number(values[static_cast<std::size_t>(n->slot - first_slot)]);
        return n;
    }
    if (n->children.empty()) return n;
    auto copy = std::make_shared<Node>(*n);
    for (auto& c : copy->children) c = fold_constants(c, first_slot, values);
    return copy;
}

struct Constants {
    std::vector<std::string> names;
    std::vector<double> values;
};

inline Constants read_constants(const std::optional<Field>& f, int dim) {
    Constants out;
    if (!f) return out;
    f->require_object();
    for (auto it = f->json().begin(); it != f->json().end(); ++it) {
        const Field v(it.value(), f->path() + "." + it.key());
        const std::string& name = it.key();
        bool ident = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
        for (char ch : name) ident = ident && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
        if (!ident) v.fail("constant names must be identifiers");
        if (name == "t" || name == "k" || name == "r" || dsl::lookup_function(name)) v.fail("name is reserved");
        if (name.size() > 1 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i) digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (digits) v.fail("name clashes with a state variable");
        }
        (void)dim;
        out.names.push_back(name);
        out.values.push_back(v.finite());
    }
    return out;
}

/// Parses one expression; ParseError keeps its byte offset and gains the field path.
inline dsl::Program parse_program(const Field& f, int dim, const std::vector<std::string>& extras,
                                  const Constants& consts) {
    const std::string src = f.string();
    std::vector<std::string> all = extras;
    all.insert(all.end(), consts.names.begin(), consts.names.end());
    dsl::Expr e;
    try {
        e = dsl::parse(src, dim, all);
    } catch (const ParseError& err) {
        throw ParseError(f.path() + ": " + std::string(err.what()).substr(0, std::string(err.what()).rfind(" at byte")),
                         err.offset());
    } catch (const ConfigError& err) {
        f.fail(err.what());
    }
    const int first = 1 + dim + static_cast<int>(extras.size());
    return dsl::Program(dsl::Expr(fold_constants(e.root_ptr(), first, consts.values), dim, extras));
}

inline CoefficientField parse_matrix(const Field& f, int rows, int cols, int dim, const Constants& consts,
                                     dsl::PoleRule poles = {}, const std::vector<std::string>& extras = {}) {
    std::vector<dsl::Program> entries;
    if (f.is_string()) {
        if (rows != 1 || cols != 1) f.fail("a single expression needs a 1x1 shape; use nested arrays");
        entries.push_back(parse_program(f, dim, extras, consts));
    } else {
        f.require_array();
        if (static_cast<int>(f.size()) != rows) f.fail("expected " + std::to_string(rows) + " rows");
        for (std::size_t r = 0; r < f.size(); ++r) {
            const Field row = f.item(r);
            if (cols == 1 && row.is_string()) {
                entries.push_back(parse_program(row, dim, extras, consts));
                continue;
            }
            row.require_array();
            if (static_cast<int>(row.size()) != cols) row.fail("expected " + std::to_string(cols) + " columns");
            for (std::size_t c = 0; c < row.size(); ++c) entries.push_back(parse_program(row.item(c), dim, extras, consts));
        }
    }
    return CoefficientField(rows, cols, dim, std::move(entries), std::move(poles));
}

inline dsl::PoleRule read_poles(const std::optional<Field>& f, int dim) {
    dsl::PoleRule r;
    if (!f) return r;
    f->only({"rule", "value", "points"});
    const auto rule = f->at("rule").string();
    if (rule == "none") r.kind = dsl::PoleRule::Kind::none;
    else if (rule == "odd_integers") r.kind = dsl::PoleRule::Kind::odd_integers;
    else if (rule == "integers") r.kind = dsl::PoleRule::Kind::integers;
    else if (rule == "points") r.kind = dsl::PoleRule::Kind::points;
    else f->at("rule").fail("must be one of none, odd_integers, integers, points");
    r.value = f->number_or("value", 0.0);
    if (auto pts = f->find("points")) {
        r.points = pts->number_rows();
        for (std::size_t i = 0; i < r.points.size(); ++i)
            if (static_cast<int>(r.points[i].size()) != dim) pts->item(i).fail("point has the wrong dimension");
    }
    if (r.kind == dsl::PoleRule::Kind::points && r.points.empty()) f->fail("rule 'points' needs a points list");
    return r;
}

inline DomainChain read_domain(const Field& f, int dim) {
    f.only({"kind", "lo", "hi", "center", "radius"});
    const auto kind = f.at("kind").string();
    try {
        if (kind == "whole_space") {
            f.only({"kind", "center"});
            auto c = f.find("center");
            return DomainChain::whole_space(dim, c ? c->numbers() : std::vector<double>{});
        }
        if (kind == "interval") {
            f.only({"kind", "lo", "hi"});
            if (dim != 1) f.fail("an interval domain needs dim 1");
            return DomainChain::interval(f.at("lo").finite(), f.at("hi").finite());
        }
        if (kind == "box") {
            f.only({"kind", "lo", "hi"});
            return DomainChain::box(f.at("lo").numbers(), f.at("hi").numbers());
        }
        if (kind == "ball") {
            f.only({"kind", "center", "radius"});
            return DomainChain::ball(f.at("center").numbers(), f.at("radius").finite());
        }
    } catch (const ConfigError& e) {
        if (std::string(e.what()).rfind(f.path(), 0) == 0) throw;
        f.fail(e.what());
    }
    f.at("kind").fail("must be one of whole_space, interval, box, ball");
}

inline InitialLaw read_initial(const Field& f) {
    const auto kind = f.at("kind").string();
    InitialLaw l;
    if (kind == "point") {
        f.only({"kind", "x"});
        l = InitialLaw::point_mass(f.at("x").numbers());
    } else if (kind == "uniform") {
        f.only({"kind", "lo", "hi"});
        l = InitialLaw::uniform(f.at("lo").numbers(), f.at("hi").numbers());
    } else if (kind == "gaussian") {
        f.only({"kind", "mean", "cov"});
        l.kind = InitialLaw::Kind::gaussian;
        l.mean = f.at("mean").numbers();
        l.cov = f.at("cov").number_rows();
    } else if (kind == "discrete") {
        f.only({"kind", "atoms", "weights"});
        l.kind = InitialLaw::Kind::discrete;
        l.atoms = f.at("atoms").number_rows();
        l.weights = f.at("weights").numbers();
    } else {
        f.at("kind").fail("must be one of point, uniform, gaussian, discrete");
    }
    try {
        validate_initial_law(l, std::nullopt);
    } catch (const ConfigError& e) {
        f.fail(e.what());
    }
    return l;
}

inline ProblemSpec read_problem(const Field& f) {
    f.only({"name", "dim", "noise_dim", "constants", "drift", "diffusion", "poles", "initial", "domain", "lyapunov",
            "envelope", "holder_alpha", "singular_points"});
    ProblemSpec p;
    p.name = f.string_or("name", "inline");
    p.dim_state = static_cast<int>(f.integer_or("dim", 1));
    if (p.dim_state < 1 || p.dim_state > 16) f.at("dim").fail("must lie in [1, 16]");
    p.dim_noise = static_cast<int>(f.integer_or("noise_dim", p.dim_state));
    if (p.dim_noise < 1 || p.dim_noise > 16) f.at("noise_dim").fail("must lie in [1, 16]");
    const int d = p.dim_state;
    const auto consts = read_constants(f.find("constants"), d);
    const auto poles = read_poles(f.find("poles"), d);
    p.drift = parse_matrix(f.at("drift"), d, 1, d, consts, poles);
    p.diffusion = parse_matrix(f.at("diffusion"), d, p.dim_noise, d, consts, poles);
    p.initial = read_initial(f.at("initial"));
    if (p.initial.dim() != d) f.at("initial").fail("dimension does not match dim");
    if (auto dom = f.find("domain")) p.domain = read_domain(*dom, d);
    if (auto ly = f.find("lyapunov")) {
        ly->only({"value", "generator", "rate", "fd_scale"});
        LyapunovSpec s{parse_matrix(ly->at("value"), 1, 1, d, consts), std::nullopt,
                       parse_matrix(ly->at("rate"), 1, 1, 0, consts)};
        if (auto g = ly->find("generator")) s.generator = parse_matrix(*g, 1, 1, d, consts);
        s.fd_scale = ly->number_or("fd_scale", s.fd_scale);
        if (!(s.fd_scale > 0)) ly->at("fd_scale").fail("must be positive");
        p.lyapunov = std::move(s);
    }
    if (auto env = f.find("envelope")) p.envelope = parse_matrix(*env, 1, 1, 0, consts, {}, {"k"});
    p.holder_alpha = f.number_or("holder_alpha", 1.0);
    if (auto sp = f.find("singular_points")) {
        p.singular_points = sp->number_rows();
        for (std::size_t i = 0; i < p.singular_points.size(); ++i)
            if (static_cast<int>(p.singular_points[i].size()) != d) sp->item(i).fail("point has the wrong dimension");
    }
    try {
        p.validate();
    } catch (const ConfigError& e) {
        f.fail(e.what());
    }
    return p;
}

inline PartitionFamily read_partition(const std::optional<Field>& f) {
    if (!f) return PartitionFamily::uniform(default_indices(), 1.0);
    f->only({"kind", "n", "horizon", "grids"});
    const double horizon = f->number_or("horizon", 1.0);
    if (!(horizon > 0)) f->at("horizon").fail("must be positive");
    const auto kind = f->string_or("kind", "uniform");
    try {
        if (kind == "uniform") {
            f->only({"kind", "n", "horizon"});
            std::vector<Index> ns = default_indices();
            if (auto n = f->find("n")) {
                ns = n->integers();
                if (ns.empty()) n->fail("needs at least one index");
                for (std::size_t i = 0; i < ns.size(); ++i)
                    if (ns[i] < 1 || ns[i] > (Index{1} << 24)) n->item(i).fail("must lie in [1, 2^24]");
            }
            return PartitionFamily::uniform(ns, horizon);
        }
        if (kind == "explicit") {
            f->only({"kind", "grids", "horizon"});
            const auto g = f->at("grids");
            g.require_object();
            std::map<Index, std::vector<double>> grids;
            for (auto it = g.json().begin(); it != g.json().end(); ++it) {
                const Field pts(it.value(), g.path() + "." + it.key());
                Index n = 0;
                try {
                    std::size_t used = 0;
                    n = std::stoll(it.key(), &used);
                    if (used != it.key().size()) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    pts.fail("grid keys must be integer indices");
                }
                grids[n] = pts.numbers();
            }
            return PartitionFamily::explicit_grids(grids, horizon);
        }
    } catch (const ConfigError& e) {
        if (std::string(e.what()).rfind(f->path(), 0) == 0) throw;
        f->fail(e.what());
    }
    f->at("kind").fail("must be uniform or explicit");
}

inline Variant read_scheme(const Field& f) {
    const auto s = f.string();
    if (s == "polygonal") return Variant::polygonal;
    if (s == "tamed") return Variant::tamed;
    if (s == "driftless") return Variant::driftless;
    f.fail("must be polygonal, tamed or driftless");
}

inline ScheduleSettings read_schedule(const Field& f, double holder_alpha) {
    f.only({"p", "q", "alpha", "gamma", "c", "caps"});
    ScheduleSettings s;
    s.norm.alpha = holder_alpha;
    s.norm.p = f.number_or("p", s.norm.p);
    s.norm.q = f.number_or("q", s.norm.q);
    s.norm.alpha = f.number_or("alpha", s.norm.alpha);
    s.norm.gamma = f.number_or("gamma", s.norm.gamma);
    s.c = f.number_or("c", s.c);
    if (auto caps = f.find("caps")) {
        caps->require_object();
        for (auto it = caps->json().begin(); it != caps->json().end(); ++it) {
            const Field v(it.value(), caps->path() + "." + it.key());
            Index n = 0;
            try {
                std::size_t used = 0;
                n = std::stoll(it.key(), &used);
                if (used != it.key().size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                v.fail("cap keys must be integer indices");
            }
            s.caps[n] = v.finite();
        }
    }
    return s;
}

inline std::vector<int> read_ks(const Field& f, const char* key, std::vector<int> dflt) {
    auto k = f.find(key);
    if (!k) return dflt;
    std::vector<int> out;
    if (!k->is_array()) {
        const auto v = k->integer();
        if (v < 1 || v > 64) k->fail("must lie in [1, 64]");
        return {static_cast<int>(v)};
    }
    for (std::size_t i = 0; i < k->size(); ++i) {
        const auto v = k->item(i).integer();
        if (v < 1 || v > 64) k->item(i).fail("must lie in [1, 64]");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) k->fail("needs at least one k");
    return out;
}

inline AssumptionRequest read_assumption(const Field& f, const ProblemSpec& p, Variant scheme,
                                         bool has_schedule) {
    AssumptionRequest a;
    a.path = f.path();
    if (f.is_string()) {
        a.id = f.string();
    } else {
        a.id = f.at("id").string();
    }
    bool known = false;
    for (const char* id : kAssumptionIds) known = known || a.id == id;
    if (!known) (f.is_string() ? f : f.at("id")).fail("unknown assumption '" + a.id + "'");
    static const ordered_json empty = ordered_json::object();
    const Field g = f.is_string() ? Field(empty, f.path()) : f;
    const std::vector<int> ks{1, 2, 3, 4};
    if (a.id == "growth" || a.id == "monotonicity") {
        g.only({"id", "k"});
        a.ks = read_ks(g, "k", ks);
    } else if (a.id == "lyapunov") {
        g.only({"id", "K"});
        a.K = static_cast<int>(g.integer_or("K", 4));
        if (a.K < 2 || a.K > 64) g.at("K").fail("must lie in [2, 64]");
        if (!p.lyapunov) g.fail("the problem declares no Lyapunov function");
    } else if (a.id == "initial_support") {
        g.only({"id"});
    } else if (a.id == "yamada_watanabe") {
        g.only({"id", "k", "rho", "variation"});
        a.ks = read_ks(g, "k", ks);
        if (p.dim_state != 1) g.fail("the Yamada-Watanabe condition is checked for d = 1 only");
        if (auto r = g.find("rho")) {
            a.rho = r->string();
            parse_program(*r, 0, {"r"}, {});
        }
        if (auto v = g.find("variation")) {
            a.variation = v->string();
            parse_program(*v, 1, {}, {});
        }
    } else if (a.id == "nondegeneracy") {
        g.only({"id", "k", "eps_k", "eps", "K"});
        a.ks = read_ks(g, "k", ks);
        if (auto v = g.find("eps_k")) a.bounds.eps_k = v->finite();
        if (auto v = g.find("eps")) a.bounds.eps = v->finite();
        if (auto v = g.find("K")) a.bounds.K = v->finite();
    } else if (a.id == "holder") {
        g.only({"id", "k", "alpha"});
        a.ks = read_ks(g, "k", ks);
        if (auto v = g.find("alpha")) {
            a.alpha = v->finite();
            if (!(*a.alpha > 0.0 && *a.alpha <= 1.0)) v->fail("must lie in (0, 1]");
        }
    } else if (a.id == "tamed_scheme") {
        g.only({"id", "quadrature_k"});
        a.quadrature_k = static_cast<int>(g.integer_or("quadrature_k", 4));
        if (a.quadrature_k < 1) g.at("quadrature_k").fail("must be >= 1");
        if (!has_schedule) g.fail("needs a taming schedule (scheme 'tamed' or a 'schedule' block)");
        (void)scheme;
    }
    return a;
}

inline std::vector<Index> index_list(const Field& f) {
    std::vector<Index> out;
    for (auto v : f.integers()) out.push_back(v);
    if (out.empty()) f.fail("needs at least one index");
    return out;
}

inline std::vector<std::pair<Index, Index>> consecutive_pairs(const std::vector<Index>& ns) {
    std::vector<std::pair<Index, Index>> out;
    for (std::size_t i = 1; i < ns.size(); ++i) out.emplace_back(ns[i - 1], ns[i]);
    return out;
}

inline std::optional<QuadratureSpec> read_quadrature(const std::optional<Field>& f, const ProblemSpec& p) {
    if (!f) return std::nullopt;
    f->only({"k", "lo", "hi", "cells", "order", "time_cells", "time_order"});
    auto q = default_quadrature(p, static_cast<int>(f->integer_or("k", 4)));
    if (auto lo = f->find("lo")) q.lo = lo->numbers();
    if (auto hi = f->find("hi")) q.hi = hi->numbers();
    if (static_cast<int>(q.lo.size()) != p.dim_state || static_cast<int>(q.hi.size()) != p.dim_state)
        f->fail("quadrature box has the wrong dimension");
    q.cells = static_cast<int>(f->integer_or("cells", q.cells));
    q.order = static_cast<int>(f->integer_or("order", q.order));
    q.time_cells = static_cast<int>(f->integer_or("time_cells", q.time_cells));
    q.time_order = static_cast<int>(f->integer_or("time_order", q.time_order));
    if (q.cells < 1 || q.order < 1 || q.time_cells < 1 || q.time_order < 1) f->fail("counts must be positive");
    return q;
}

inline DiagnosticRequest read_diagnostic(const Field& f, const ProblemSpec& p, const PartitionFamily& part) {
    DiagnosticRequest r;
    r.path = f.path();
    r.type = f.at("type").string();
    if (auto n = f.find("paths")) r.paths = static_cast<std::size_t>(n->unsigned_integer());
    const auto ns = part.indices();
    const Index largest = ns.back();
    auto n_or = [&](const char* key, Index d) { return static_cast<Index>(f.integer_or(key, d)); };
    auto f_field = [&](const char* key) { return parse_matrix(f.at(key), 1, 1, p.dim_state, {}); };

    if (r.type == "cauchy_in_probability") {
        f.only({"type", "paths", "pairs", "eps", "T", "threshold", "reference_n"});
        CauchyParams c;
        c.pairs = consecutive_pairs(ns);
        if (auto pr = f.find("pairs")) {
            c.pairs.clear();
            for (const auto& row : pr->number_rows()) {
                if (row.size() != 2) pr->fail("pairs must be [l, m] entries");
                c.pairs.emplace_back(static_cast<Index>(row[0]), static_cast<Index>(row[1]));
            }
        }
        c.eps = f.number_or("eps", 0.0);
        c.T = f.number_or("T", 0.0);
        c.threshold = f.number_or("threshold", c.threshold);
        c.reference_n = n_or("reference_n", c.reference_n);
        r.params = c;
    } else if (r.type == "exit_time_bound") {
        f.only({"type", "paths", "n", "k", "T", "delta", "reference_n"});
        ExitParams e;
        e.n = n_or("n", largest);
        e.ks = read_ks(f, "k", {1, 2, 3, 4});
        e.T = f.number_or("T", 0.0);
        e.delta = f.number_or("delta", std::exp(-3.0));
        e.reference_n = n_or("reference_n", e.reference_n);
        r.params = e;
    } else if (r.type == "density_bounds") {
        f.only({"type", "paths", "n", "times", "q", "bins", "start_step", "min_average", "slope_tol", "spread_limit"});
        DensityParams d;
        d.n = n_or("n", largest);
        d.times = f.find("times") ? f.at("times").numbers() : std::vector<double>{0.01, 0.1, 1.0};
        d.q = f.number_or("q", d.q);
        if (auto b = f.find("bins")) d.bins = static_cast<std::size_t>(b->unsigned_integer());
        d.start_step = static_cast<std::size_t>(f.integer_or("start_step", 0));
        d.min_average = f.number_or("min_average", d.min_average);
        d.slope_tol = f.number_or("slope_tol", d.slope_tol);
        d.spread_limit = f.number_or("spread_limit", d.spread_limit);
        r.params = d;
    } else if (r.type == "exponential_moment") {
        f.only({"type", "paths", "n", "f", "p", "q", "T", "scalings", "quadrature", "slope_limit"});
        ExpMomentParams e;
        e.n = n_or("n", largest);
        e.f = f_field("f");
        e.p = f.number_or("p", e.p);
        e.q = f.number_or("q", e.q);
        e.T = f.number_or("T", 0.0);
        if (auto s = f.find("scalings")) e.scalings = s->numbers();
        e.quad = read_quadrature(f.find("quadrature"), p);
        e.slope_limit = f.number_or("slope_limit", e.slope_limit);
        r.params = e;
    } else if (r.type == "girsanov_moment") {
        f.only({"type", "paths", "n_list", "rho", "T", "spread_limit", "se_limit"});
        GirsanovParams g;
        g.ns = f.find("n_list") ? index_list(f.at("n_list")) : ns;
        if (auto rho = f.find("rho")) g.rhos = rho->numbers();
        g.T = f.number_or("T", 0.0);
        g.spread_limit = f.number_or("spread_limit", g.spread_limit);
        g.se_limit = f.number_or("se_limit", g.se_limit);
        r.params = g;
    } else if (r.type == "occupation_integral") {
        f.only({"type", "paths", "n_list", "f", "p", "q", "gamma", "T", "scalings", "quadrature", "spread_limit"});
        OccupationParams o;
        o.ns = f.find("n_list") ? index_list(f.at("n_list")) : ns;
        o.f = f_field("f");
        o.p = f.number_or("p", o.p);
        o.q = f.number_or("q", o.q);
        o.gamma = f.number_or("gamma", o.gamma);
        o.T = f.number_or("T", 0.0);
        if (auto s = f.find("scalings")) o.scalings = s->numbers();
        o.quad = read_quadrature(f.find("quadrature"), p);
        o.spread_limit = f.number_or("spread_limit", o.spread_limit);
        r.params = o;
    } else if (r.type == "tightness_moment") {
        f.only({"type", "paths", "n", "pairs", "slope_min"});
        TightnessParams t;
        t.n = n_or("n", largest);
        if (auto pr = f.find("pairs")) {
            for (const auto& row : pr->number_rows()) {
                if (row.size() != 2) pr->fail("pairs must be [s, t] entries");
                t.pairs.emplace_back(row[0], row[1]);
            }
        }
        t.slope_min = f.number_or("slope_min", t.slope_min);
        r.params = t;
    } else if (r.type == "drift_integral_convergence") {
        f.only({"type", "paths", "n_list", "reference_n", "T", "max_reference_blowup"});
        DriftIntegralParams d;
        d.ns = f.find("n_list") ? index_list(f.at("n_list")) : ns;
        d.reference_n = n_or("reference_n", d.reference_n);
        d.T = f.number_or("T", 0.0);
        d.max_reference_blowup = f.number_or("max_reference_blowup", d.max_reference_blowup);
        r.params = d;
    } else {
        std::string list;
        for (const char* t : kDiagnosticTypes) list += (list.empty() ? "" : ", ") + std::string(t);
        f.at("type").fail("unknown diagnostic '" + r.type + "' (known: " + list + ")");
    }
    return r;
}

}  // namespace detail

/// Runs one diagnostic; with ctx.validate_only set it only checks preconditions.
inline DiagnosticReport dispatch_diagnostic(const RunContext& ctx, const DiagnosticParams& params) {
    return std::visit(
        [&](const auto& par) -> DiagnosticReport {
            using T = std::decay_t<decltype(par)>;
            if constexpr (std::is_same_v<T, CauchyParams>) return cauchy_in_probability(ctx, par);
            else if constexpr (std::is_same_v<T, ExitParams>) return exit_time_bound(ctx, par);
            else if constexpr (std::is_same_v<T, DensityParams>) return density_bounds(ctx, par);
            else if constexpr (std::is_same_v<T, ExpMomentParams>) return exponential_moment(ctx, par);
            else if constexpr (std::is_same_v<T, GirsanovParams>) return girsanov_moment(ctx, par);
            else if constexpr (std::is_same_v<T, OccupationParams>) return occupation_integral(ctx, par);
            else if constexpr (std::is_same_v<T, TightnessParams>) return tightness_moment(ctx, par);
            else return drift_integral_convergence(ctx, par);
        },
        params);
}

/// Checks every diagnostic block against its operation's preconditions
/// without simulating anything.
inline void validate_experiment(const ExperimentConfig& cfg) {
    std::unique_ptr<TamingSchedule> sched;
    try {
        sched = cfg.make_schedule();
    } catch (const ConfigError& e) {
        throw ConfigError("schedule: " + std::string(e.what()));
    }
    if (cfg.scheme == Variant::tamed && !sched) throw ConfigError("scheme: 'tamed' needs a taming schedule");
    const double T = cfg.check_horizon();
    if (!(T > 0.0 && T <= cfg.partition.horizon())) throw ConfigError("checks.T: must lie in (0, horizon]");
    for (const auto& d : cfg.diagnostics) {
        auto ctx = cfg.context(sched.get(), d.paths);
        ctx.validate_only = true;
        try {
            dispatch_diagnostic(ctx, d.params);
        } catch (const ConfigError& e) {
            throw ConfigError(d.path + ": " + e.what());
        } catch (const IndexError& e) {
            throw ConfigError(d.path + ": " + e.what());
        } catch (const DomainError& e) {
            throw ConfigError(d.path + ": " + e.what());
        }
    }
    if (cfg.dump.paths > 0 && cfg.dump.n != 0 && !cfg.partition.has(cfg.dump.n))
        throw ConfigError("output.dump_paths.n: index " + std::to_string(cfg.dump.n) + " is not in the partition");
}

/// Builds and validates a config from a parsed JSON tree.
inline ExperimentConfig parse_config(const ordered_json& j) {
    const Field root(j, "");
    root.require_object();
    root.only({"schema_version", "problem", "partition", "scheme", "schedule", "checks", "diagnostics", "ensemble",
               "output"});
    if (auto v = root.find("schema_version"))
        if (v->integer() != kConfigSchema) v->fail("unsupported schema version (expected 1)");

    ExperimentConfig cfg;
    ordered_json problem_json;
    const Preset* preset = nullptr;
    {
        const Field pf = root.at("problem");
        std::optional<std::string> name;
        ordered_json params;
        if (pf.is_string()) {
            name = pf.string();
        } else if (pf.has("preset")) {
            pf.only({"preset", "params"});
            name = pf.at("preset").string();
            if (auto pr = pf.find("params")) {
                pr->require_object();
                params = pr->json();
            }
        }
        if (name) {
            preset = find_preset(*name);
            if (!preset) {
                std::string list;
                for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
                (pf.is_string() ? pf : pf.at("preset")).fail("unknown preset '" + *name + "' (known: " + list + ")");
            }
            ordered_json merged = preset->params;
            if (params.is_object()) {
                for (auto it = params.begin(); it != params.end(); ++it) {
                    if (!merged.contains(it.key()))
                        Field(it.value(), "problem.params." + it.key()).fail("preset '" + *name + "' has no such parameter");
                    merged[it.key()] = it.value();
                }
            }
            problem_json = preset->problem(merged);
            cfg.preset = *name;
            cfg.expect_violation = preset->expect_violation;
            cfg.source["problem"] = {{"preset", *name}, {"params", merged}, {"resolved", problem_json}};
        } else {
            problem_json = pf.json();
            cfg.source["problem"] = problem_json;
        }
    }
    const std::string problem_path = preset ? "problem(" + cfg.preset + ")" : "problem";
    cfg.problem = detail::read_problem(Field(problem_json, problem_path));

    cfg.partition = detail::read_partition(root.find("partition"));
    cfg.source["partition"] = {{"kind", cfg.partition.kind() == PartitionFamily::Kind::uniform ? "uniform" : "explicit"},
                               {"n", cfg.partition.indices()},
                               {"horizon", cfg.partition.horizon()}};

    cfg.scheme = preset && preset->scheme == "tamed" ? Variant::tamed : Variant::polygonal;
    if (auto s = root.find("scheme")) cfg.scheme = detail::read_scheme(*s);
    cfg.source["scheme"] = variant_name(cfg.scheme);

    if (auto s = root.find("schedule")) {
        cfg.schedule = detail::read_schedule(*s, cfg.problem.holder_alpha);
    } else if (preset && !preset->schedule.is_null()) {
        cfg.schedule = detail::read_schedule(Field(preset->schedule, "schedule"), cfg.problem.holder_alpha);
    } else if (cfg.scheme == Variant::tamed) {
        cfg.schedule = detail::read_schedule(Field(ordered_json::object(), "schedule"), cfg.problem.holder_alpha);
    }
    if (cfg.schedule) {
        ordered_json caps = ordered_json::object();
        for (const auto& [n, c] : cfg.schedule->caps) caps[std::to_string(n)] = c;
        cfg.source["schedule"] = {{"p", cfg.schedule->norm.p},         {"q", cfg.schedule->norm.q},
                                  {"alpha", cfg.schedule->norm.alpha}, {"gamma", cfg.schedule->norm.gamma},
                                  {"c", cfg.schedule->c},              {"caps", caps}};
    }

    {
        auto cf = root.find("checks");
        static const ordered_json empty = ordered_json::object();
        const Field c = cf ? *cf : Field(empty, "checks");
        c.only({"enabled", "T", "seed", "mesh", "random", "tolerance", "assumptions"});
        cfg.checks.enabled = c.boolean_or("enabled", true);
        cfg.checks.T = c.number_or("T", 0.0);
        auto& o = cfg.checks.options;
        if (auto s = c.find("seed")) o.seed = s->unsigned_integer();
        o.mesh = static_cast<std::size_t>(c.integer_or("mesh", static_cast<std::int64_t>(o.mesh)));
        o.random = static_cast<std::size_t>(c.integer_or("random", static_cast<std::int64_t>(o.random)));
        o.tolerance = c.number_or("tolerance", o.tolerance);
        if (!(o.tolerance >= 0)) c.at("tolerance").fail("must be nonnegative");
        const ordered_json list = c.has("assumptions") ? c.json().at("assumptions")
                                  : preset                  ? preset->assumptions
                                                            : ordered_json::array();
        const Field lf(list, "checks.assumptions");
        lf.require_array();
        for (std::size_t i = 0; i < lf.size(); ++i)
            cfg.checks.assumptions.push_back(
                detail::read_assumption(lf.item(i), cfg.problem, cfg.scheme, cfg.schedule.has_value()));
        cfg.source["checks"] = {{"enabled", cfg.checks.enabled}, {"T", cfg.checks.T},
                                {"seed", o.seed},                {"mesh", o.mesh},
                                {"random", o.random},            {"tolerance", o.tolerance},
                                {"assumptions", list}};
    }

    {
        cfg.source["diagnostics"] = ordered_json::array();
        if (auto df = root.find("diagnostics")) {
            df->require_array();
            for (std::size_t i = 0; i < df->size(); ++i) {
                cfg.diagnostics.push_back(detail::read_diagnostic(df->item(i), cfg.problem, cfg.partition));
                cfg.source["diagnostics"].push_back(df->item(i).json());
            }
        }
    }

    if (auto e = root.find("ensemble")) {
        e->only({"paths", "seed", "workers"});
        if (auto v = e->find("paths")) cfg.ensemble.paths = static_cast<std::size_t>(v->unsigned_integer());
        if (auto v = e->find("seed")) cfg.ensemble.seed = v->unsigned_integer();
        if (auto v = e->find("workers")) {
            const auto w = v->integer();
            if (w < 1 || w > 1024) v->fail("must lie in [1, 1024]");
            cfg.ensemble.workers = static_cast<int>(w);
        }
    }

    if (auto o = root.find("output")) {
        o->only({"dir", "csv", "dump_paths"});
        cfg.out_dir = o->string_or("dir", cfg.out_dir);
        cfg.write_csv = o->boolean_or("csv", cfg.write_csv);
        if (auto d = o->find("dump_paths")) {
            d->only({"paths", "n"});
            cfg.dump.paths = static_cast<std::size_t>(d->at("paths").unsigned_integer());
            cfg.dump.n = static_cast<Index>(d->integer_or("n", 0));
        }
    }

    validate_experiment(cfg);
    return cfg;
}

/// Reads a JSON config file. Missing or unreadable files raise IoError;
/// malformed JSON and schema violations raise ConfigError with a field path.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading config file '" + path.string() + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace eulerlab::io
