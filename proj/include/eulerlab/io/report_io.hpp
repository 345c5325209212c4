#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "eulerlab/checkers/verdict.hpp"
#include "eulerlab/diagnostics/report.hpp"
#include "eulerlab/error.hpp"
#include "eulerlab/io/json_field.hpp"

namespace eulerlab::io {

inline constexpr const char* kReportSchema = "eulerlab-report/1";

inline ordered_json to_json(const Witness& w) {
    ordered_json j;
    j["t"] = number_json(w.t);
    ordered_json x = ordered_json::array();
    for (double v : w.x) x.push_back(number_json(v));
    j["x"] = x;
    if (!w.y.empty()) {
        ordered_json y = ordered_json::array();
        for (double v : w.y) y.push_back(number_json(v));
        j["y"] = y;
    }
    return j;
}

inline ordered_json to_json(const AssumptionVerdict& v) {
    ordered_json j;
    j["id"] = v.id;
    j["label"] = v.label;
    j["verdict"] = v.verdict;
    j["samples"] = v.samples;
    j["worst_value"] = number_json(v.worst_value);
    j["margin"] = number_json(v.margin);
    j["location"] = v.location ? to_json(*v.location) : ordered_json(nullptr);
    j["notes"] = v.notes;
    j["details"] = v.details;
    sanitize_numbers(j["details"]);
    return j;
}

inline ordered_json to_json(const ReportRow& r) {
    ordered_json j;
    j["label"] = r.label;
    j["statistic"] = number_json(r.statistic);
    j["half_width"] = number_json(r.half_width);
    j["bound"] = r.bound ? number_json(*r.bound) : ordered_json(nullptr);
    ordered_json ex = ordered_json::object();
    for (const auto& [k, v] : r.extras) ex[k] = number_json(v);
    j["extras"] = ex;
    return j;
}

inline ordered_json to_json(const DiagnosticReport& r) {
    ordered_json j;
    j["name"] = r.name;
    j["verdict"] = r.verdict;
    j["statistic"] = number_json(r.statistic);
    j["half_width"] = number_json(r.half_width);
    j["bound"] = r.bound ? number_json(*r.bound) : ordered_json(nullptr);
    j["blowups"] = r.blowups;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    j["rows"] = rows;
    j["warnings"] = r.warnings;
    j["metadata"] = r.metadata;
    sanitize_numbers(j["metadata"]);
    return j;
}

/// Shortest text for a double in tables and CSV.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
    return buf;
}

/// Full precision, for CSV columns meant for plotting.
inline std::string fmt_exact(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

/// Left-aligned columns separated by two spaces.
inline void table(std::ostringstream& os, const std::vector<std::vector<std::string>>& rows,
                  const std::string& indent) {
    std::vector<std::size_t> w;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (w.size() <= i) w.push_back(0);
            w[i] = std::max(w[i], r[i].size());
        }
    for (const auto& r : rows) {
        std::string line = indent;
        for (std::size_t i = 0; i < r.size(); ++i) line += i + 1 < r.size() ? pad(r[i], w[i] + 2) : r[i];
        while (!line.empty() && line.back() == ' ') line.pop_back();
        os << line << '\n';
    }
}

inline std::string witness_text(const ordered_json& loc) {
    if (loc.is_null()) return "-";
    auto vec = [](const ordered_json& a) {
        std::string s = "(";
        for (std::size_t i = 0; i < a.size(); ++i) {
            s += i ? ", " : "";
            s += a[i].is_number() ? fmt(a[i].get<double>()) : a[i].get<std::string>();
        }
        return s + ")";
    };
    std::string s = "t=" + (loc["t"].is_number() ? fmt(loc["t"].get<double>()) : loc["t"].get<std::string>());
    s += " x=" + vec(loc["x"]);
    if (loc.contains("y")) s += " y=" + vec(loc["y"]);
    return s;
}

inline std::string num_text(const ordered_json& v) {
    if (v.is_null()) return "-";
    if (v.is_number()) return fmt(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace detail

/// Aligned text rendering of a report body.
inline std::string render_text(const ordered_json& body) {
    std::ostringstream os;
    const auto& cfg = body["config"];
    std::string problem = body["problem"].get<std::string>();
    os << "eulerlab report (" << kReportSchema << ")\n";
    os << "problem " << problem << "  scheme " << cfg["scheme"].get<std::string>() << "  seed "
       << body["seed"].get<std::uint64_t>() << "  paths " << body["paths"].get<std::uint64_t>() << "\n\n";

    os << "Assumptions\n";
    if (body["assumptions"].empty()) {
        os << "  (none)\n";
    } else {
        std::vector<std::vector<std::string>> rows{{"id", "verdict", "margin", "worst", "samples", "witness"}};
        for (const auto& a : body["assumptions"])
            rows.push_back({a["id"].get<std::string>(), a["verdict"].get<std::string>(), detail::num_text(a["margin"]),
                            detail::num_text(a["worst_value"]), std::to_string(a["samples"].get<std::uint64_t>()),
                            detail::witness_text(a["location"])});
        detail::table(os, rows, "  ");
        for (const auto& a : body["assumptions"])
            for (const auto& n : a["notes"]) os << "  note [" << a["id"].get<std::string>() << "] " << n.get<std::string>() << '\n';
    }
    os << '\n';

    os << "Diagnostics\n";
    if (body["diagnostics"].empty()) {
        os << "  (none)\n";
    }
    for (const auto& d : body["diagnostics"]) {
        os << "  " << d["name"].get<std::string>() << "  verdict " << d["verdict"].get<std::string>() << "  statistic "
           << detail::num_text(d["statistic"]) << " +/- " << detail::num_text(d["half_width"]) << "  bound "
           << detail::num_text(d["bound"]) << "  blowups " << d["blowups"].get<std::uint64_t>() << '\n';
        std::vector<std::vector<std::string>> rows{{"row", "statistic", "half_width", "bound"}};
        std::vector<std::string> extra_keys;
        for (const auto& r : d["rows"])
            for (auto it = r["extras"].begin(); it != r["extras"].end(); ++it)
                if (std::find(extra_keys.begin(), extra_keys.end(), it.key()) == extra_keys.end())
                    extra_keys.push_back(it.key());
        rows.front().insert(rows.front().end(), extra_keys.begin(), extra_keys.end());
        for (const auto& r : d["rows"]) {
            std::vector<std::string> line{r["label"].get<std::string>(), detail::num_text(r["statistic"]),
                                          detail::num_text(r["half_width"]), detail::num_text(r["bound"])};
            for (const auto& k : extra_keys) line.push_back(r["extras"].contains(k) ? detail::num_text(r["extras"][k]) : "-");
            rows.push_back(std::move(line));
        }
        detail::table(os, rows, "    ");
        for (const auto& w : d["warnings"]) os << "    warning: " << w.get<std::string>() << '\n';
    }
    os << '\n';
    const auto& s = body["summary"];
    os << "Status " << s["status"].get<std::string>() << " (exit " << s["exit_code"].get<int>() << ")\n";
    return os.str();
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

/// Per-row CSV of one diagnostic: label, statistic, half_width, bound, extras.
inline std::string render_csv(const ordered_json& diag) {
    std::vector<std::string> keys;
    for (const auto& r : diag["rows"])
        for (auto it = r["extras"].begin(); it != r["extras"].end(); ++it)
            if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
    auto cell = [](const ordered_json& v) -> std::string {
        if (v.is_null()) return "";
        if (v.is_number()) return fmt_exact(v.get<double>());
        return v.get<std::string>();
    };
    std::ostringstream os;
    os << "label,statistic,half_width,bound";
    for (const auto& k : keys) os << ',' << csv_field(k);
    os << '\n';
    for (const auto& r : diag["rows"]) {
        os << csv_field(r["label"].get<std::string>()) << ',' << cell(r["statistic"]) << ',' << cell(r["half_width"])
           << ',' << cell(r["bound"]);
        for (const auto& k : keys) os << ',' << (r["extras"].contains(k) ? cell(r["extras"][k]) : "");
        os << '\n';
    }
    return os.str();
}

inline std::string render_assumptions_csv(const ordered_json& body) {
    std::ostringstream os;
    os << "id,verdict,margin,worst_value,samples\n";
    auto cell = [](const ordered_json& v) -> std::string {
        if (v.is_number()) return fmt_exact(v.get<double>());
        return v.is_string() ? v.get<std::string>() : "";
    };
    for (const auto& a : body["assumptions"])
        os << a["id"].get<std::string>() << ',' << a["verdict"].get<std::string>() << ',' << cell(a["margin"]) << ','
           << cell(a["worst_value"]) << ',' << a["samples"].get<std::uint64_t>() << '\n';
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing '" + p.string() + "'");
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

}  // namespace eulerlab::io
