#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "eulerlab/io/io.hpp"

using namespace eulerlab;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::size_t> dump_paths;
    bool quiet = false;
};

int execute(const std::string& path, const Overrides& ov, bool checks_only) {
    auto cfg = io::load_config(path);
    if (ov.seed) cfg.ensemble.seed = *ov.seed;
    if (ov.paths) cfg.ensemble.paths = *ov.paths;
    if (ov.workers) cfg.ensemble.workers = *ov.workers;
    if (ov.out) cfg.out_dir = *ov.out;
    if (ov.dump_paths) cfg.dump.paths = *ov.dump_paths;
    io::RunOptions ro;
    ro.checks_only = checks_only;
    const auto res = io::run_experiment(cfg, ro);
    if (!ov.quiet) std::cout << res.text;
    std::cerr << "wrote " << res.files.size() << " file(s) to " << cfg.out_dir << "\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo engine and assumption checker for Euler and tamed Euler schemes"};
    app.require_subcommand(1);
    Overrides ov;
    std::string config;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "experiment config (JSON)")->required();
        sub->add_option("--seed", ov.seed, "master seed");
        sub->add_option("--out", ov.out, "output directory");
        sub->add_flag("-q,--quiet", ov.quiet, "do not print the text report");
    };
    auto* run = app.add_subcommand("run", "run checkers, simulations and diagnostics");
    add_common(run);
    run->add_option("--paths", ov.paths, "ensemble size (0: checkers only)");
    run->add_option("--workers", ov.workers, "worker threads")->check(CLI::Range(1, 1024));
    run->add_option("--dump-paths", ov.dump_paths, "write this many paths to paths.csv");
    auto* check = app.add_subcommand("check", "run the assumption checkers only");
    add_common(check);
    auto* list = app.add_subcommand("presets", "list built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) {
            for (const auto& p : io::presets()) std::cout << p.name << "  " << p.description << '\n';
            return 0;
        }
        return execute(config, ov, check->parsed());
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "expression error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
