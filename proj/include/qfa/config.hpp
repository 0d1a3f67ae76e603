#pragma once

// JSON case configuration. A document is {"cases": [ {...}, ... ]}; every
// case needs name, n_amplifiers, x and beta_A. The built-in document
// reproduces the four nominal cases with their reference values.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfa/analysis.hpp"
#include "qfa/errors.hpp"
#include "qfa/io.hpp"

namespace qfa {

struct expected_value {
    double value;
    double tol;
};

struct case_config {
    std::string name;
    int n_amplifiers = 1;
    double kappa = 1.8e7;
    double x = 0.0;
    double beta_a = 0.0;
    std::optional<double> beta_b;  ///< absent: calibrate for equal gain at omega = 0
    frequency_grid grid;
    std::uint64_t seed = 1;
    int samples = 100;
    std::map<std::string, expected_value> expected;  ///< keyed by result column

    amplifier_params amp() const { return amplifier_params::from_x(kappa, x); }
};

struct config_document {
    std::vector<case_config> cases;
    std::string hash;  ///< fnv1a64 of the canonical JSON

    const case_config& find(const std::string& name) const {
        auto lower = [](std::string s) {
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
            return s;
        };
        for (const auto& c : cases)
            if (lower(c.name) == lower(name)) return c;
        throw config_error("no case named '" + name + "'");
    }
};

inline const char* default_config_json = R"({
  "cases": [
    {"name": "case1", "n_amplifiers": 2, "x": 0.90, "beta_A": 0.2,
     "expected": {"M1_db": {"value": 45, "tol": 0.5}, "beta_B": {"value": -0.0412, "tol": 5e-4},
                  "S_A": {"value": 0.3388, "tol": 5e-4}, "S_B": {"value": 0.1190, "tol": 5e-4},
                  "gm_db": {"value": 8.1310, "tol": 0.05}}},
    {"name": "case2", "n_amplifiers": 2, "x": 0.78, "beta_A": 0.1,
     "expected": {"M1_db": {"value": 30, "tol": 0.5}, "beta_B": {"value": -0.0291, "tol": 5e-4},
                  "S_A": {"value": 0.7259, "tol": 5e-4}, "S_B": {"value": 0.5271, "tol": 5e-4},
                  "gm_db": {"value": 18.4593, "tol": 0.05}}},
    {"name": "case3", "n_amplifiers": 5, "x": 0.53, "beta_A": 0.07,
     "expected": {"M1_db": {"value": 45, "tol": 0.5}, "beta_B": {"value": 0.0034, "tol": 5e-4},
                  "S_A": {"value": 1.0718, "tol": 5e-4}, "S_B": {"value": 0.7428, "tol": 5e-4},
                  "gm_db": {"value": 8.5699, "tol": 0.05}}},
    {"name": "case4", "n_amplifiers": 5, "x": 0.393, "beta_A": 0.03,
     "expected": {"M1_db": {"value": 30, "tol": 0.5}, "beta_B": {"value": 0.0046, "tol": 5e-4},
                  "S_A": {"value": 1.4094, "tol": 5e-4}, "S_B": {"value": 1.2802, "tol": 5e-4},
                  "gm_db": {"value": 19.9847, "tol": 0.05}}}
  ]
})";

namespace detail {

template <class T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw config_error(where + ": missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(where + ": bad '" + key + "': " + e.what());
    }
}

template <class T>
T optional_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return required<T>(j, key, where);
}

inline frequency_grid parse_grid(const nlohmann::json& j, const std::string& where) {
    frequency_grid g;
    if (!j.is_object()) throw config_error(where + ": grid must be an object");
    g.omega_min = optional_or(j, "omega_min", g.omega_min, where);
    g.omega_max = optional_or(j, "omega_max", g.omega_max, where);
    g.points = optional_or(j, "points", g.points, where);
    const std::string sp = optional_or<std::string>(j, "spacing", "log", where);
    if (sp == "log")
        g.kind = spacing::log;
    else if (sp == "linear")
        g.kind = spacing::linear;
    else
        throw config_error(where + ": spacing must be 'log' or 'linear'");
    try {
        g.validate();
    } catch (const invalid_parameter& e) {
        throw config_error(where + ": " + e.what());
    }
    return g;
}

inline void validate_case(const case_config& c, const std::string& where) {
    auto fail = [&](const std::string& msg) { throw config_error(where + ": " + msg); };
    if (c.name.empty()) fail("name must be non-empty");
    if (c.n_amplifiers < 1) fail("n_amplifiers must be >= 1");
    if (!(c.kappa > 0.0)) fail("kappa must be > 0");
    if (!(c.x >= 0.0 && c.x < 1.0)) fail("x must be in [0, 1) (stable amplifier)");
    if (!(std::abs(c.beta_a) < 1.0)) fail("beta_A must be in (-1, 1)");
    if (c.beta_b && !(std::abs(*c.beta_b) < 1.0)) fail("beta_B must be in (-1, 1)");
    if (c.samples < 1) fail("samples must be >= 1");
}

}  // namespace detail

inline config_document parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("cases") || !j["cases"].is_array() || j["cases"].empty())
        throw config_error("config must be an object with a non-empty 'cases' array");

    config_document doc;
    doc.hash = "fnv1a64:" + hex64(fnv1a64(j.dump()));
    for (std::size_t i = 0; i < j["cases"].size(); ++i) {
        const auto& jc = j["cases"][i];
        const std::string where = "cases[" + std::to_string(i) + "]";
        if (!jc.is_object()) throw config_error(where + ": must be an object");
        case_config c;
        c.name = detail::required<std::string>(jc, "name", where);
        c.n_amplifiers = detail::required<int>(jc, "n_amplifiers", where);
        c.kappa = detail::optional_or(jc, "kappa", c.kappa, where);
        c.x = detail::required<double>(jc, "x", where);
        c.beta_a = detail::required<double>(jc, "beta_A", where);
        if (jc.contains("beta_B") && !jc["beta_B"].is_null()) c.beta_b = detail::required<double>(jc, "beta_B", where);
        if (jc.contains("grid")) c.grid = detail::parse_grid(jc["grid"], where + ".grid");
        c.seed = detail::optional_or<std::uint64_t>(jc, "seed", c.seed, where);
        c.samples = detail::optional_or(jc, "samples", c.samples, where);
        if (jc.contains("expected")) {
            if (!jc["expected"].is_object()) throw config_error(where + ".expected: must be an object");
            for (const auto& [key, ev] : jc["expected"].items()) {
                const std::string w = where + ".expected." + key;
                c.expected[key] = {detail::required<double>(ev, "value", w), detail::required<double>(ev, "tol", w)};
            }
        }
        detail::validate_case(c, where);
        for (const auto& prev : doc.cases)
            if (prev.name == c.name) throw config_error(where + ": duplicate case name '" + c.name + "'");
        doc.cases.push_back(std::move(c));
    }
    return doc;
}

inline config_document default_config() { return parse_config(default_config_json); }

inline config_document load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qfa
