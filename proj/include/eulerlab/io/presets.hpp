#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eulerlab/error.hpp"

namespace eulerlab::io {

using ordered_json = nlohmann::ordered_json;

/// A built-in problem, written in the inline config form so that presets and
/// user files go through one parser.
struct Preset {
    std::string name;
    std::string description;
    ordered_json params = ordered_json::object();  // defaults; overridable
    std::function<ordered_json(const ordered_json& params)> problem;
    std::string scheme = "polygonal";
    ordered_json schedule;                          // null unless tamed
    ordered_json assumptions = ordered_json::array();
    bool expect_violation = false;
};

namespace detail {

inline constexpr const char* kTanEnvelope = "tan(1.5707963267948966*(1-2^(-k)))+1";

inline ordered_json interval_domain(double lo, double hi) {
    return {{"kind", "interval"}, {"lo", lo}, {"hi", hi}};
}

inline ordered_json point_initial(double x) { return {{"kind", "point"}, {"x", {x}}}; }

inline double positive_param(const ordered_json& params, const char* key, const std::string& preset) {
    const auto& v = params.at(key);
    if (!v.is_number()) throw ConfigError("problem.params." + std::string(key) + ": must be a number");
    const double a = v.get<double>();
    if (!(a > 0.0) || !std::isfinite(a))
        throw ConfigError("problem.params." + std::string(key) + ": " + preset + " needs a positive finite value");
    return a;
}

inline ordered_json k_range(int hi) {
    ordered_json k = ordered_json::array();
    for (int i = 1; i <= hi; ++i) k.push_back(i);
    return k;
}

inline std::vector<Preset> build_presets() {
    std::vector<Preset> out;

    {
        Preset p;
        p.name = "eq-1-1";
        p.description = "tan drift with |1-|x||^a sqrt(x+) diffusion on (-1,1)";
        p.params = {{"alpha", 0.7}};
        p.problem = [](const ordered_json& par) {
            positive_param(par, "alpha", "eq-1-1");
            return ordered_json{
                {"name", "eq-1-1"},
                {"dim", 1},
                {"noise_dim", 1},
                {"constants", {{"a", par.at("alpha")}}},
                {"drift", "tan(-1.5707963267948966*x1)+1"},
                {"diffusion", "abs(1-abs(x1))^a*max(x1,0)^0.5"},
                {"poles", {{"rule", "odd_integers"}, {"value", 0.0}}},
                {"initial", point_initial(0.0)},
                {"domain", interval_domain(-1.0, 1.0)},
                {"lyapunov", {{"value", "(2-x1^2)/(1-x1^2)"}, {"rate", "0.5"}}},
                {"envelope", kTanEnvelope},
            };
        };
        p.assumptions = {
            {{"id", "growth"}, {"k", k_range(4)}},
            {{"id", "lyapunov"}, {"K", 4}},
            {{"id", "initial_support"}},
            {{"id", "yamada_watanabe"}, {"k", k_range(4)}, {"rho", "r"}},
        };
        out.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "eq-1-2";
        p.description = "tan drift plus sign x with |1-|x||^a diffusion on (-1,1)";
        p.params = {{"alpha", 0.7}};
        p.problem = [](const ordered_json& par) {
            const double a = positive_param(par, "alpha", "eq-1-2");
            return ordered_json{
                {"name", "eq-1-2"},
                {"dim", 1},
                {"noise_dim", 1},
                {"constants", {{"a", par.at("alpha")}}},
                {"drift", "tan(-1.5707963267948966*x1)+sign(x1)"},
                {"diffusion", "abs(1-abs(x1))^a"},
                {"poles", {{"rule", "odd_integers"}, {"value", 0.0}}},
                {"initial", point_initial(0.0)},
                {"domain", interval_domain(-1.0, 1.0)},
                {"lyapunov", {{"value", "(2-x1^2)/(1-x1^2)"}, {"rate", "1"}}},
                {"envelope", kTanEnvelope},
                {"holder_alpha", std::min(a, 1.0)},
            };
        };
        p.assumptions = {
            {{"id", "growth"}, {"k", k_range(4)}},
            {{"id", "lyapunov"}, {"K", 4}},
            {{"id", "initial_support"}},
            {{"id", "nondegeneracy"}, {"k", k_range(4)}},
            {{"id", "holder"}, {"k", k_range(4)}},
        };
        out.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "eq-1-5";
        p.description = "singular drift |x|^(-1/5) with diffusion 2+sin x, tamed";
        p.problem = [](const ordered_json&) {
            return ordered_json{
                {"name", "eq-1-5"},
                {"dim", 1},
                {"noise_dim", 1},
                {"drift", "abs(x1)^(-0.2)"},
                {"diffusion", "2+sin(x1)"},
                {"initial", point_initial(0.0)},
                {"domain", {{"kind", "whole_space"}}},
                {"singular_points", {{0.0}}},
            };
        };
        p.scheme = "tamed";
        p.schedule = {{"p", 2.0}, {"q", 2.0}, {"alpha", 1.0}, {"gamma", 0.25}, {"c", 4.0}};
        p.assumptions = {{{"id", "tamed_scheme"}}};
        out.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "gbm";
        p.description = "geometric Brownian motion mu x dt + s x dw";
        p.params = {{"mu", 0.05}, {"s", 0.2}, {"x0", 1.0}};
        p.problem = [](const ordered_json& par) {
            for (const char* key : {"mu", "s", "x0"})
                if (!par.at(key).is_number()) throw ConfigError("problem.params." + std::string(key) + ": must be a number");
            return ordered_json{
                {"name", "gbm"},
                {"dim", 1},
                {"noise_dim", 1},
                {"constants", {{"mu", par.at("mu")}, {"s", par.at("s")}}},
                {"drift", "mu*x1"},
                {"diffusion", "s*x1"},
                {"initial", point_initial(par.at("x0").get<double>())},
                {"envelope", "(abs(mu)+s^2)*(k^2+2)"},
            };
        };
        p.assumptions = {
            {{"id", "growth"}, {"k", k_range(4)}},
            {{"id", "monotonicity"}, {"k", k_range(4)}},
            {{"id", "initial_support"}},
        };
        out.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "ou";
        p.description = "Ornstein-Uhlenbeck -x dt + dw";
        p.params = {{"x0", 0.0}};
        p.problem = [](const ordered_json& par) {
            if (!par.at("x0").is_number()) throw ConfigError("problem.params.x0: must be a number");
            return ordered_json{
                {"name", "ou"},          {"dim", 1},         {"noise_dim", 1},
                {"drift", "-x1"},        {"diffusion", "1"}, {"initial", point_initial(par.at("x0").get<double>())},
                {"envelope", "k+1"},
            };
        };
        p.assumptions = {
            {{"id", "growth"}, {"k", k_range(4)}},
            {{"id", "monotonicity"}, {"k", k_range(4)}},
            {{"id", "initial_support"}},
        };
        out.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "bm";
        p.description = "standard Brownian motion";
        p.problem = [](const ordered_json&) {
            return ordered_json{
                {"name", "bm"},     {"dim", 1},         {"noise_dim", 1},
                {"drift", "0"},     {"diffusion", "1"}, {"initial", point_initial(0.0)},
                {"envelope", "1"},
            };
        };
        p.assumptions = {
            {{"id", "growth"}, {"k", k_range(4)}},
            {{"id", "monotonicity"}, {"k", k_range(4)}},
            {{"id", "initial_support"}},
        };
        out.push_back(std::move(p));
    }
    {
        Preset p;
        p.name = "bad-growth";
        p.description = "b = x^2 on the line against a linear growth bound; must be flagged";
        p.problem = [](const ordered_json&) {
            return ordered_json{
                {"name", "bad-growth"},
                {"dim", 1},
                {"noise_dim", 1},
                {"drift", "x1^2"},
                {"diffusion", "1"},
                {"initial", point_initial(0.0)},
                {"domain", {{"kind", "whole_space"}}},
                {"lyapunov", {{"value", "(x1^2+1)*exp(-t)"}, {"rate", "1"}}},
                {"envelope", "k^2+1"},
            };
        };
        p.assumptions = {
            {{"id", "growth"}, {"k", k_range(4)}},
            {{"id", "lyapunov"}, {"K", 4}},
        };
        p.expect_violation = true;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace detail

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = detail::build_presets();
    return all;
}

inline const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : presets()) out.push_back(p.name);
    return out;
}

}  // namespace eulerlab::io
