#pragma once

// Nominal-parameter result table: every derived column is recomputed from
// (N, kappa, x, beta_A); beta_B is calibrated unless the case fixes it.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfa/analysis.hpp"
#include "qfa/config.hpp"
#include "qfa/sensitivity.hpp"

namespace qfa {

inline constexpr std::array<const char*, 10> result_columns = {
    "N", "M1_db", "x", "beta_A", "beta_B", "S_A", "S_B", "gm_db", "typeA_stable", "typeB_stable"};

struct result_row {
    std::string name;
    int n = 1;
    double m1_db = 0.0;
    double x = 0.0;
    double beta_a = 0.0;
    std::optional<double> beta_b;
    std::optional<double> s_a;
    std::optional<double> s_b;
    std::optional<double> gm_db;
    bool type_a_stable = false;
    std::optional<bool> type_b_stable;
    bool beta_b_calibrated = false;

    std::optional<double> column(const std::string& key) const {
        if (key == "N") return n;
        if (key == "M1_db") return m1_db;
        if (key == "x") return x;
        if (key == "beta_A") return beta_a;
        if (key == "beta_B") return beta_b;
        if (key == "S_A") return s_a;
        if (key == "S_B") return s_b;
        if (key == "gm_db") return gm_db;
        return std::nullopt;
    }
};

struct deviation {
    std::string case_name;
    std::string column;
    std::optional<double> actual;
    double expected;
    double tol;
};

/// beta_B of a case: the configured value or the equal-gain calibration.
inline std::optional<double> resolve_beta_b(const case_config& c) {
    if (c.beta_b) return c.beta_b;
    try {
        return calibrate_beta_b(center_case{c.x, c.beta_a, c.n_amplifiers});
    } catch (const error&) {
        return std::nullopt;
    }
}

inline result_row compute_row(const case_config& c) {
    result_row r;
    r.name = c.name;
    r.n = c.n_amplifiers;
    r.x = c.x;
    r.beta_a = c.beta_a;

    const amplifier_params amp = c.amp();
    const center_gain g = ndpa_center(amp);
    r.m1_db = 20.0 * std::log10(std::abs(cascade_center(g, c.n_amplifiers).diag));

    r.beta_b = resolve_beta_b(c);
    r.beta_b_calibrated = !c.beta_b && r.beta_b;

    try {
        r.s_a = quantum_sensitivity_a(g, controller_params{c.beta_a}, c.n_amplifiers);
    } catch (const error&) {
    }
    r.type_a_stable = c.beta_a >= 0.0 ? type_a_stable(c.x, c.beta_a) : type_a_hurwitz(amp, c.beta_a);

    if (r.beta_b) {
        try {
            r.s_b = quantum_sensitivity_b(g, controller_params{*r.beta_b}, c.n_amplifiers);
        } catch (const error&) {
        }
        try {
            const nyquist_result ny = nyquist(open_loop_type_b(amp, c.n_amplifiers, *r.beta_b), c.grid);
            r.type_b_stable = ny.stable;
            if (ny.has_crossover) r.gm_db = ny.gain_margin_db;
        } catch (const error&) {
        }
    }
    return r;
}

inline std::vector<deviation> check_expected(const case_config& c, const result_row& r) {
    std::vector<deviation> out;
    for (const auto& [key, ev] : c.expected) {
        const std::optional<double> actual = r.column(key);
        if (!actual || !(std::abs(*actual - ev.value) <= ev.tol)) out.push_back({c.name, key, actual, ev.value, ev.tol});
    }
    return out;
}

inline std::vector<std::string> row_fields(const result_row& r) {
    auto ob = [](const std::optional<bool>& b) { return b ? format_bool(*b) : std::string("NA"); };
    return {r.name,
            std::to_string(r.n),
            format_number(r.m1_db),
            format_number(r.x),
            format_number(r.beta_a),
            format_optional(r.beta_b),
            format_optional(r.s_a),
            format_optional(r.s_b),
            format_optional(r.gm_db),
            format_bool(r.type_a_stable),
            ob(r.type_b_stable)};
}

inline nlohmann::json row_json(const result_row& r) {
    auto opt = [](const auto& v) -> nlohmann::json { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"case", r.name},          {"N", r.n},
            {"M1_db", r.m1_db},        {"x", r.x},
            {"beta_A", r.beta_a},      {"beta_B", opt(r.beta_b)},
            {"beta_B_calibrated", r.beta_b_calibrated},
            {"S_A", opt(r.s_a)},       {"S_B", opt(r.s_b)},
            {"gm_db", opt(r.gm_db)},   {"typeA_stable", r.type_a_stable},
            {"typeB_stable", opt(r.type_b_stable)}};
}

}  // namespace qfa
