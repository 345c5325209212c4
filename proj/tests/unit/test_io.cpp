#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "eulerlab/io/io.hpp"

using namespace eulerlab;
using io::ordered_json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("eulerlab_test_io_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double eval(const CoefficientField& f, double x) {
    const double xs[1] = {x};
    return f.eval_scalar(0.0, xs);
}

std::string config_error(const ordered_json& j) {
    try {
        io::parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

ordered_json small_ou(std::size_t paths) {
    return {{"problem", "ou"},
            {"partition", {{"n", {8, 16, 32}}}},
            {"diagnostics",
             {{{"type", "cauchy_in_probability"}, {"eps", 0.05}}, {{"type", "tightness_moment"}, {"n", 32}}}},
            {"ensemble", {{"paths", paths}, {"seed", 5}}}};
}

io::ordered_json run_body(const ordered_json& j) {
    io::RunOptions ro;
    ro.write_files = false;
    return io::run_experiment(io::parse_config(j), ro).report["body"];
}

int cli(const std::string& args) {
    const std::string cmd = std::string(EULERLAB_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Presets, TanPresetMatchesHandBuiltCoefficients) {
    const auto cfg = io::parse_config({{"problem", {{"preset", "eq-1-1"}, {"params", {{"alpha", 0.7}}}}}});
    const auto& p = cfg.problem;
    EXPECT_EQ(p.dim_state, 1);
    EXPECT_EQ(p.dim_noise, 1);
    for (double x : {-0.9, -0.3, 0.0, 0.2, 0.6, 0.95}) {
        EXPECT_NEAR(eval(p.drift, x), std::tan(-M_PI / 2 * x) + 1.0, 1e-9 * (1 + std::fabs(std::tan(M_PI / 2 * x))));
        EXPECT_NEAR(eval(p.diffusion, x), std::pow(std::fabs(1 - std::fabs(x)), 0.7) * std::sqrt(std::max(x, 0.0)),
                    1e-14);
    }
    // the pole of tan at x = 1 is defined as 0
    EXPECT_EQ(eval(p.drift, 1.0), 0.0);
    ASSERT_TRUE(p.domain.has_value());
    const double inside[1] = {0.99}, outside[1] = {1.0};
    EXPECT_TRUE(p.domain->contains(inside));
    EXPECT_FALSE(p.domain->contains(outside));
    ASSERT_TRUE(p.lyapunov.has_value());
    ASSERT_TRUE(p.envelope.has_value());
    EXPECT_EQ(cfg.checks.assumptions.size(), 4u);
    EXPECT_EQ(cfg.scheme, Variant::polygonal);
}

TEST(Presets, ParamsChangeTheProblem) {
    const auto cfg = io::parse_config({{"problem", {{"preset", "eq-1-2"}, {"params", {{"alpha", 0.3}}}}}});
    EXPECT_NEAR(eval(cfg.problem.diffusion, 0.5), std::pow(0.5, 0.3), 1e-14);
    EXPECT_DOUBLE_EQ(cfg.problem.holder_alpha, 0.3);
    EXPECT_NE(config_error({{"problem", {{"preset", "eq-1-2"}, {"params", {{"alpha", -1}}}}}}), "");
}

TEST(Presets, TamedPresetHasSchedule) {
    const auto cfg = io::parse_config({{"problem", "eq-1-5"}});
    EXPECT_EQ(cfg.scheme, Variant::tamed);
    ASSERT_TRUE(cfg.schedule.has_value());
    EXPECT_NE(cfg.make_schedule(), nullptr);
}

TEST(Presets, EveryPresetParses) {
    for (const auto& name : io::preset_names()) EXPECT_NO_THROW(io::parse_config({{"problem", name}})) << name;
}

TEST(Config, EmptyDiagnosticsListIsValid) {
    const auto cfg = io::parse_config({{"problem", "bm"}, {"diagnostics", ordered_json::array()}});
    EXPECT_TRUE(cfg.diagnostics.empty());
    io::RunOptions ro;
    ro.write_files = false;
    const auto res = io::run_experiment(cfg, ro);
    EXPECT_EQ(res.exit_code, 0);
    EXPECT_TRUE(res.report["body"]["diagnostics"].empty());
}

TEST(Config, TamedRejectsExponentsOutsideTheRange) {
    const auto msg = config_error({{"problem", "eq-1-5"}, {"schedule", {{"p", 1}, {"q", 1}}}});
    EXPECT_NE(msg.find("schedule"), std::string::npos) << msg;
}

TEST(Config, ErrorsCarryTheFieldPath) {
    auto msg = config_error({{"problem", "ou"}, {"diagnostics", {{{"type", "cauchy_in_probability"}, {"eps", "big"}}}}});
    EXPECT_NE(msg.find("diagnostics[0].eps"), std::string::npos) << msg;
    msg = config_error({{"problem", "ou"}, {"ensemble", {{"workers", 0}}}});
    EXPECT_NE(msg.find("ensemble.workers"), std::string::npos) << msg;
    msg = config_error({{"problem", "ou"}, {"diagnostics", {{{"type", "no_such_thing"}}}}});
    EXPECT_NE(msg.find("diagnostics[0]"), std::string::npos) << msg;
}

TEST(Config, UnknownKeysAndPresetsAreRejected) {
    EXPECT_NE(config_error({{"problem", "ou"}, {"bogus", 1}}).find("bogus"), std::string::npos);
    EXPECT_NE(config_error({{"problem", "ou"}, {"ensemble", {{"path", 10}}}}).find("ensemble.path"), std::string::npos);
    const auto msg = config_error({{"problem", "nope"}});
    EXPECT_NE(msg.find("unknown preset 'nope'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("eq-1-1"), std::string::npos) << msg;
    EXPECT_NE(config_error({{"problem", {{"preset", "ou"}, {"params", {{"beta", 1}}}}}}).find("problem.params.beta"),
              std::string::npos);
    EXPECT_NE(config_error({{"problem", "ou"}, {"schema_version", 2}}), "");
    EXPECT_NE(config_error({{"partition", {{"n", {8}}}}}).find("problem"), std::string::npos);
}

TEST(Config, ExpressionErrorsKeepOffsetAndPath) {
    const ordered_json j = {{"problem", {{"dim", 1}, {"drift", "x1 + * 2"}, {"diffusion", "1"}, {"initial", {{"kind", "point"}, {"x", {0}}}}}}};
    try {
        io::parse_config(j);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 5u);
        EXPECT_NE(std::string(e.what()).find("problem.drift"), std::string::npos) << e.what();
    }
    const ordered_json bad_var = {{"problem", {{"dim", 1}, {"drift", "x2"}, {"diffusion", "1"}, {"initial", {{"kind", "point"}, {"x", {0}}}}}}};
    EXPECT_THROW(io::parse_config(bad_var), ParseError);
}

TEST(Config, ConstantsAreFoldedIntoExpressions) {
    ordered_json j = {{"problem",
                       {{"dim", 1},
                        {"constants", {{"a", 2.0}, {"b", -0.5}}},
                        {"drift", "a*x1+b"},
                        {"diffusion", [&] { return ordered_json::array({ordered_json::array({"a"})}); }()},
                        {"initial", {{"kind", "point"}, {"x", {0}}}}}}};
    const auto cfg = io::parse_config(j);
    EXPECT_DOUBLE_EQ(eval(cfg.problem.drift, 3.0), 5.5);
    EXPECT_DOUBLE_EQ(eval(cfg.problem.diffusion, 3.0), 2.0);
    j["problem"]["constants"] = {{"x1", 1.0}};
    EXPECT_NE(config_error(j).find("x1"), std::string::npos);
    j["problem"]["constants"] = {{"t", 1.0}};
    EXPECT_NE(config_error(j), "");
    j["problem"]["constants"] = {{"sin", 1.0}};
    EXPECT_NE(config_error(j), "");
}

TEST(Config, InvalidBlockFailsBeforeAnySimulation) {
    // the first diagnostic alone would take minutes at this ensemble size
    ordered_json j = {{"problem", "ou"},
                      {"diagnostics",
                       {{{"type", "cauchy_in_probability"}, {"eps", 0.05}},
                        {{"type", "density_bounds"}, {"n", 64}, {"times", {0.5, 7.0}}}}},
                      {"ensemble", {{"paths", 1000000}}}};
    const auto t0 = std::chrono::steady_clock::now();
    const auto msg = config_error(j);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_NE(msg.find("diagnostics[1]"), std::string::npos) << msg;
    EXPECT_LT(secs, 5.0);
}

TEST(Config, MalformedJsonReportsOffset) {
    const auto dir = scratch("malformed");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{\"problem\": \"ou\",, }";
    try {
        io::load_config(dir / "bad.json");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("malformed JSON at byte"), std::string::npos) << e.what();
    }
    EXPECT_THROW(io::load_config(dir / "missing.json"), IoError);
    fs::remove_all(dir);
}

TEST(Experiment, ZeroPathsRunsCheckersOnly) {
    const auto body = run_body(small_ou(0));
    EXPECT_EQ(body["paths"], 0);
    EXPECT_TRUE(body["diagnostics"].empty());
    EXPECT_EQ(body["assumptions"].size(), 3u);
}

TEST(Experiment, ReportSchemaIsPinned) {
    auto j = small_ou(200);
    j["output"] = {{"dump_paths", {{"paths", 2}, {"n", 8}}}};
    io::RunOptions ro;
    ro.write_files = false;
    const auto rep = io::run_experiment(io::parse_config(j), ro).report;
    auto keys = [](const ordered_json& o) {
        std::vector<std::string> k;
        for (auto it = o.begin(); it != o.end(); ++it) k.push_back(it.key());
        return k;
    };
    using V = std::vector<std::string>;
    EXPECT_EQ(keys(rep), (V{"schema", "body", "run"}));
    EXPECT_EQ(rep["schema"], "eulerlab-report/1");
    EXPECT_EQ(keys(rep["run"]), (V{"workers", "started_utc", "elapsed_seconds", "timings"}));
    const auto& body = rep["body"];
    EXPECT_EQ(keys(body), (V{"problem", "seed", "paths", "config", "assumptions", "diagnostics", "path_dump", "summary"}));
    EXPECT_EQ(keys(body["config"]), (V{"problem", "partition", "scheme", "checks", "diagnostics"}));
    EXPECT_EQ(keys(body["assumptions"][0]),
              (V{"id", "label", "verdict", "samples", "worst_value", "margin", "location", "notes", "details"}));
    EXPECT_EQ(keys(body["diagnostics"][0]),
              (V{"name", "verdict", "statistic", "half_width", "bound", "blowups", "rows", "warnings", "metadata"}));
    EXPECT_EQ(keys(body["diagnostics"][0]["rows"][0]), (V{"label", "statistic", "half_width", "bound", "extras"}));
    EXPECT_EQ(keys(body["summary"]), (V{"assumptions", "diagnostics", "expected_violation", "status", "exit_code"}));
    EXPECT_EQ(body["summary"]["status"], "pass");
}

TEST(Experiment, WritesReportCsvAndPathDump) {
    const auto dir = scratch("files");
    auto j = small_ou(100);
    j["output"] = {{"dir", dir.string()}, {"dump_paths", {{"paths", 3}, {"n", 8}}}};
    const auto res = io::run_experiment(io::parse_config(j));
    std::vector<std::string> names;
    for (const auto& f : res.files) names.push_back(f.filename().string());
    EXPECT_EQ(names, (std::vector<std::string>{"report.json", "report.txt", "assumptions.csv",
                                               "01_cauchy_in_probability.csv", "02_tightness_moment.csv", "paths.csv",
                                               "paths_summary.json"}));
    const auto report = ordered_json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(report["body"], res.report["body"]);

    std::istringstream cauchy(slurp(dir / "01_cauchy_in_probability.csv"));
    std::string line;
    std::getline(cauchy, line);
    EXPECT_EQ(line.rfind("label,statistic,half_width,bound", 0), 0u) << line;
    std::size_t rows = 0;
    while (std::getline(cauchy, line)) ++rows;
    EXPECT_EQ(rows, 2u);

    std::istringstream paths(slurp(dir / "paths.csv"));
    std::getline(paths, line);
    EXPECT_EQ(line, "path_id,t,x1");
    rows = 0;
    while (std::getline(paths, line)) ++rows;
    EXPECT_EQ(rows, 3u * 9u);

    EXPECT_EQ(slurp(dir / "assumptions.csv").rfind("id,verdict,margin,worst_value,samples\n", 0), 0u);
    EXPECT_NE(slurp(dir / "report.txt").find("Status pass (exit 0)"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Experiment, BodyIsIdenticalAcrossWorkerCounts) {
    auto cfg = io::parse_config(small_ou(300));
    io::RunOptions ro;
    ro.write_files = false;
    cfg.ensemble.workers = 1;
    const auto a = io::run_experiment(cfg, ro).report;
    cfg.ensemble.workers = 3;
    const auto b = io::run_experiment(cfg, ro).report;
    EXPECT_EQ(a["body"].dump(), b["body"].dump());
    EXPECT_NE(a["run"]["workers"], b["run"]["workers"]);
}

TEST(Experiment, ViolationGivesExitOne) {
    const auto body = run_body({{"problem", "bad-growth"}});
    EXPECT_EQ(body["summary"]["exit_code"], 1);
    EXPECT_EQ(body["summary"]["expected_violation"], true);
    EXPECT_FALSE(body["assumptions"][0]["location"].is_null());
}

TEST(Report, NonFiniteNumbersBecomeStrings) {
    EXPECT_EQ(io::number_json(HUGE_VAL), "inf");
    EXPECT_EQ(io::number_json(-HUGE_VAL), "-inf");
    EXPECT_EQ(io::number_json(std::nan("")), "nan");
    EXPECT_FALSE(std::signbit(io::number_json(-0.0).get<double>()));
    ordered_json j = {{"a", {1.0, HUGE_VAL}}, {"b", {{"c", std::nan("")}}}};
    io::sanitize_numbers(j);
    EXPECT_EQ(j["a"][1], "inf");
    EXPECT_EQ(j["b"]["c"], "nan");
    EXPECT_EQ(io::fmt(-0.0), "0");
}

TEST(Report, CsvQuotesAwkwardLabels) {
    EXPECT_EQ(io::csv_field("plain"), "plain");
    EXPECT_EQ(io::csv_field("(8,16)"), "\"(8,16)\"");
    EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const ordered_json& j) {
        std::ofstream(dir / name) << j.dump();
        return (dir / name).string();
    };
    const auto good = put("good.json", {{"problem", "ou"}, {"ensemble", {{"paths", 0}}}});
    const auto bad = put("bad.json", {{"problem", "bad-growth"}});
    const auto invalid = put("invalid.json", {{"problem", "ou"}, {"ensemble", {{"paths", -1}}}});
    std::ofstream(dir / "broken.json") << "{";
    const auto out = (dir / "out").string();
    EXPECT_EQ(cli("check " + good + " -q --out " + out), 0);
    EXPECT_EQ(cli("check " + bad + " -q --out " + out), 1);
    EXPECT_EQ(cli("run " + invalid + " -q --out " + out), 2);
    EXPECT_EQ(cli("run " + (dir / "broken.json").string() + " -q --out " + out), 2);
    EXPECT_EQ(cli("run " + (dir / "absent.json").string() + " -q --out " + out), 3);
    EXPECT_EQ(cli("run " + good + " -q --out /proc/eulerlab-denied"), 3);
    EXPECT_EQ(cli("run " + good + " --workers 0"), 2);
    EXPECT_EQ(cli("frobnicate"), 2);
    EXPECT_EQ(cli("presets"), 0);
    fs::remove_all(dir);
}
