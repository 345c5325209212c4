#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "eulerlab/engine/ensemble.hpp"
#include "eulerlab/io/config.hpp"
#include "eulerlab/io/report_io.hpp"

namespace eulerlab::io {

struct RunOptions {
    bool checks_only = false;
    bool write_files = true;
};

struct ExperimentResult {
    ordered_json report;  // {"schema", "body", "run"}
    std::string text;
    int exit_code = 0;
    std::vector<AssumptionVerdict> assumptions;
    std::vector<DiagnosticReport> diagnostics;
    std::vector<std::filesystem::path> files;
};

/// One config entry of the assumption list, reduced over its k values.
inline AssumptionVerdict run_assumption(const ExperimentConfig& cfg, const AssumptionRequest& a,
                                        const TamingSchedule* sched) {
    const auto& p = cfg.problem;
    const double T = cfg.check_horizon();
    const auto& opt = cfg.checks.options;
    auto per_k = [&](auto&& one) {
        std::vector<AssumptionVerdict> vs;
        ordered_json list = ordered_json::array();
        for (int k : a.ks) {
            vs.push_back(one(k));
            list.push_back({{"k", k}, {"verdict", vs.back().verdict}, {"margin", number_json(vs.back().margin)}});
        }
        auto out = worst_of(vs);
        out.details["per_k"] = list;
        return out;
    };
    if (a.id == "growth") return per_k([&](int k) { return check_growth(p, k, T, opt); });
    if (a.id == "monotonicity") return per_k([&](int k) { return check_monotonicity(p, k, T, opt); });
    if (a.id == "lyapunov") return check_lyapunov(p, T, a.K, opt);
    if (a.id == "initial_support") return check_initial_support(p);
    if (a.id == "yamada_watanabe")
        return per_k([&](int k) { return check_yamada_watanabe(p, k, a.rho, T, opt, ModulusOptions{a.variation}); });
    if (a.id == "nondegeneracy") return per_k([&](int k) { return check_nondegeneracy(p, k, T, opt, a.bounds); });
    if (a.id == "holder") {
        const double alpha = a.alpha.value_or(p.holder_alpha);
        return per_k([&](int k) { return check_holder(p, k, alpha, T, opt); });
    }
    if (a.id == "tamed_scheme") {
        if (!sched) throw ConfigError(a.path + ": needs a taming schedule");
        return check_assumption_751(*sched, T, default_quadrature(p, a.quadrature_k), opt);
    }
    throw ConfigError(a.path + ": unknown assumption '" + a.id + "'");
}

struct PathDump {
    std::string csv;
    ordered_json summary;
};

/// Simulates the first `count` paths at index n and lists every grid state.
inline PathDump dump_paths(const ExperimentConfig& cfg, const TamingSchedule* sched) {
    const auto& p = cfg.problem;
    const Index n = cfg.dump.n != 0 ? cfg.dump.n : cfg.partition.indices().back();
    const std::size_t count = cfg.dump.paths;
    const auto fine = make_fine_grid(cfg.partition, {n});
    SimOptions opt;
    opt.variant = cfg.scheme;
    opt.schedule = sched;
    const int max_k = p.domain ? 4 : 0;
    opt.max_k = max_k;
    std::vector<DiscretePath> paths(count);
    std::vector<std::string> errors(count);
    parallel_for(count, cfg.ensemble.workers, [&](std::size_t i) {
        try {
            NoisePlan plan(cfg.ensemble.seed, i, fine, p.dim_noise);
            const auto xi = sample_initial(p.initial, cfg.ensemble.seed, i, p.domain);
            paths[i] = simulate_path(p, cfg.partition, n, plan, xi, opt);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    PathDump out;
    std::string& csv = out.csv;
    csv = "path_id,t";
    for (int c = 1; c <= p.dim_state; ++c) csv += ",x" + std::to_string(c);
    csv += '\n';
    std::size_t blown = 0, failed = 0;
    std::vector<std::size_t> exits(static_cast<std::size_t>(max_k), 0);
    for (std::size_t i = 0; i < count; ++i) {
        if (!errors[i].empty()) {
            ++failed;
            continue;
        }
        const auto& path = paths[i];
        if (path.blown_up) ++blown;
        for (int k = 1; k <= max_k; ++k)
            if (path.exit_step[static_cast<std::size_t>(k - 1)]) ++exits[static_cast<std::size_t>(k - 1)];
        for (std::size_t s = 0; s < path.grid.size(); ++s) {
            csv += std::to_string(i) + ',' + fmt_exact(path.grid.times[s]);
            for (double x : path.state(s)) csv += ',' + fmt_exact(x);
            csv += '\n';
        }
    }
    auto& s = out.summary;
    s["n"] = n;
    s["variant"] = variant_name(cfg.scheme);
    s["paths"] = count;
    s["seed"] = cfg.ensemble.seed;
    s["grid_hash"] = cfg.partition.simulation_grid(n).hash();
    s["blowups"] = blown;
    s["blowup_fraction"] = count ? static_cast<double>(blown) / static_cast<double>(count) : 0.0;
    s["failed"] = failed;
    ordered_json ex = ordered_json::object();
    for (int k = 1; k <= max_k; ++k) ex[std::to_string(k)] = exits[static_cast<std::size_t>(k - 1)];
    s["exit_counts"] = ex;
    return out;
}

namespace detail {

inline std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string two_digits(std::size_t i) { return (i < 10 ? "0" : "") + std::to_string(i); }

}  // namespace detail

/// Checkers, then simulations and diagnostics, then report files. The
/// report body depends only on the config and seed, never on the worker count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& ro = {}) {
    const auto start = std::chrono::steady_clock::now();
    const std::string started = detail::utc_now();
    validate_experiment(cfg);
    const auto sched = cfg.make_schedule();

    ExperimentResult res;
    ordered_json timings = ordered_json::array();
    auto seconds_since = [](std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (cfg.checks.enabled) {
        for (const auto& a : cfg.checks.assumptions) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                res.assumptions.push_back(run_assumption(cfg, a, sched.get()));
            } catch (const ConfigError& e) {
                throw ConfigError(a.path + ": " + e.what());
            }
            timings.push_back({{"assumption", a.id}, {"seconds", seconds_since(t0)}});
        }
    }

    const bool simulate = !ro.checks_only && cfg.ensemble.paths > 0;
    if (simulate) {
        for (const auto& d : cfg.diagnostics) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto ctx = cfg.context(sched.get(), d.paths);
            try {
                res.diagnostics.push_back(dispatch_diagnostic(ctx, d.params));
            } catch (const ConfigError& e) {
                throw ConfigError(d.path + ": " + e.what());
            } catch (const Error& e) {
                DiagnosticReport r;
                r.name = d.type;
                r.verdict = verdict::fail;
                r.statistic = std::nan("");
                r.half_width = std::nan("");
                r.warnings.push_back(std::string("aborted: ") + e.what());
                res.diagnostics.push_back(std::move(r));
            }
            if (d.paths) res.diagnostics.back().metadata["paths"] = *d.paths;
            timings.push_back({{"diagnostic", d.type}, {"seconds", seconds_since(t0)}});
        }
    }

    std::optional<PathDump> dump;
    if (!ro.checks_only && cfg.dump.paths > 0) dump = dump_paths(cfg, sched.get());

    ordered_json body;
    body["problem"] = cfg.preset.empty() ? cfg.problem.name : cfg.preset;
    body["seed"] = cfg.ensemble.seed;
    body["paths"] = simulate ? cfg.ensemble.paths : 0;
    body["config"] = cfg.source;
    sanitize_numbers(body["config"]);
    body["assumptions"] = ordered_json::array();
    std::map<std::string, int> acount{{assumption::holds, 0}, {assumption::violated, 0}, {assumption::inconclusive, 0}};
    for (const auto& a : res.assumptions) {
        body["assumptions"].push_back(to_json(a));
        ++acount[a.verdict];
    }
    body["diagnostics"] = ordered_json::array();
    std::map<std::string, int> dcount{{verdict::pass, 0}, {verdict::shape_pass, 0}, {verdict::fail, 0}};
    for (const auto& d : res.diagnostics) {
        body["diagnostics"].push_back(to_json(d));
        ++dcount[d.verdict];
    }
    if (dump) body["path_dump"] = dump->summary;
    const bool failed = acount[assumption::violated] > 0 || dcount[verdict::fail] > 0;
    res.exit_code = failed ? 1 : 0;
    ordered_json summary;
    summary["assumptions"] = acount;
    summary["diagnostics"] = dcount;
    summary["expected_violation"] = cfg.expect_violation;
    summary["status"] = failed ? "fail" : "pass";
    summary["exit_code"] = res.exit_code;
    body["summary"] = summary;

    res.report["schema"] = kReportSchema;
    res.report["body"] = body;
    ordered_json run;
    run["workers"] = cfg.ensemble.workers;
    run["started_utc"] = started;
    run["elapsed_seconds"] = seconds_since(start);
    run["timings"] = timings;
    res.report["run"] = run;
    res.text = render_text(body);

    if (ro.write_files) {
        const std::filesystem::path dir(cfg.out_dir);
        ensure_dir(dir);
        auto put = [&](const std::string& name, const std::string& content) {
            write_file(dir / name, content);
            res.files.push_back(dir / name);
        };
        put("report.json", res.report.dump(2) + "\n");
        put("report.txt", res.text);
        if (cfg.write_csv) {
            put("assumptions.csv", render_assumptions_csv(body));
            for (std::size_t i = 0; i < body["diagnostics"].size(); ++i) {
                const auto& d = body["diagnostics"][i];
                put(detail::two_digits(i + 1) + "_" + d["name"].get<std::string>() + ".csv", render_csv(d));
            }
        }
        if (dump) {
            put("paths.csv", dump->csv);
            put("paths_summary.json", dump->summary.dump(2) + "\n");
        }
    }
    return res;
}

}  // namespace eulerlab::io
