#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eulerlab/error.hpp"

namespace eulerlab::io {

using ordered_json = nlohmann::ordered_json;

/// A config node with its field path, for error messages like
/// "diagnostics[1].eps: must be a number".
class Field {
public:
    Field(const ordered_json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const ordered_json& json() const { return *j_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + msg);
    }

    bool is_object() const { return j_->is_object(); }
    bool is_array() const { return j_->is_array(); }
    bool is_string() const { return j_->is_string(); }
    bool is_null() const { return j_->is_null(); }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Field at(const std::string& key) const {
        require_object();
        if (!j_->contains(key)) fail("missing required key '" + key + "'");
        return Field(j_->at(key), child(key));
    }

    std::optional<Field> find(const std::string& key) const {
        require_object();
        auto it = j_->find(key);
        if (it == j_->end() || it->is_null()) return std::nullopt;
        return Field(*it, child(key));
    }

    Field item(std::size_t i) const { return Field(j_->at(i), path_ + "[" + std::to_string(i) + "]"); }
    std::size_t size() const { return j_->size(); }

    /// Rejects keys outside `allowed`.
    void only(std::initializer_list<const char*> allowed) const {
        require_object();
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok) Field(it.value(), child(it.key())).fail("unknown key");
        }
    }

    void require_object() const {
        if (!j_->is_object()) fail("must be an object");
    }
    void require_array() const {
        if (!j_->is_array()) fail("must be an array");
    }

    double number() const {
        if (!j_->is_number()) fail("must be a number");
        return j_->get<double>();
    }
    double finite() const {
        const double v = number();
        if (!std::isfinite(v)) fail("must be finite");
        return v;
    }
    std::int64_t integer() const {
        if (j_->is_number_integer()) return j_->get<std::int64_t>();
        if (j_->is_number_float()) {
            const double v = j_->get<double>();
            if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9e15) return static_cast<std::int64_t>(v);
        }
        fail("must be an integer");
    }
    std::uint64_t unsigned_integer() const {
        if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
        const auto v = integer();
        if (v < 0) fail("must be nonnegative");
        return static_cast<std::uint64_t>(v);
    }
    bool boolean() const {
        if (!j_->is_boolean()) fail("must be true or false");
        return j_->get<bool>();
    }
    std::string string() const {
        if (!j_->is_string()) fail("must be a string");
        return j_->get<std::string>();
    }

    std::vector<double> numbers() const {
        require_array();
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).finite());
        return out;
    }
    std::vector<std::int64_t> integers() const {
        require_array();
        std::vector<std::int64_t> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).integer());
        return out;
    }
    std::vector<std::vector<double>> number_rows() const {
        require_array();
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).numbers());
        return out;
    }

    double number_or(const std::string& key, double dflt) const {
        auto f = find(key);
        return f ? f->finite() : dflt;
    }
    std::int64_t integer_or(const std::string& key, std::int64_t dflt) const {
        auto f = find(key);
        return f ? f->integer() : dflt;
    }
    bool boolean_or(const std::string& key, bool dflt) const {
        auto f = find(key);
        return f ? f->boolean() : dflt;
    }
    std::string string_or(const std::string& key, std::string dflt) const {
        auto f = find(key);
        return f ? f->string() : dflt;
    }

private:
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const ordered_json* j_;
    std::string path_;
};

/// Non-finite doubles become the strings "inf", "-inf", "nan"; JSON has no
/// literal for them.
inline ordered_json number_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v == 0.0 ? 0.0 : v;
}

/// Recursively replaces non-finite numbers in a tree.
inline void sanitize_numbers(ordered_json& j) {
    if (j.is_number_float()) {
        j = number_json(j.get<double>());
    } else if (j.is_structured()) {
        for (auto& v : j) sanitize_numbers(v);
    }
}

}  // namespace eulerlab::io
