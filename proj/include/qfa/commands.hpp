#pragma once

// Command implementations shared by the qfa executable and the tests.
// Renderers return strings so outputs can be compared byte for byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfa/analysis.hpp"
#include "qfa/config.hpp"
#include "qfa/io.hpp"
#include "qfa/table.hpp"
#include "qfa/verify.hpp"

namespace qfa {

/// Process exit codes.
enum exit_code : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_tolerance = 3 };

// =============================================================================
// Renderers
// =============================================================================

struct table1_output {
    std::vector<result_row> rows;
    std::vector<deviation> deviations;
    std::string csv;
    nlohmann::json json;
};

inline table1_output run_table1(const config_document& doc) {
    table1_output out;
    for (const auto& c : doc.cases) {
        out.rows.push_back(compute_row(c));
        for (auto& d : check_expected(c, out.rows.back())) out.deviations.push_back(std::move(d));
    }

    std::ostringstream os;
    csv_writer w(os);
    w.provenance("table1", doc.hash, "none", "none");
    std::vector<std::string> header{"case"};
    for (const char* col : result_columns) header.emplace_back(col);
    w.row(header);
    for (const auto& r : out.rows) w.row(row_fields(r));
    out.csv = os.str();

    nlohmann::json rows = nlohmann::json::array(), devs = nlohmann::json::array();
    for (const auto& r : out.rows) rows.push_back(row_json(r));
    for (const auto& d : out.deviations)
        devs.push_back({{"case", d.case_name},
                        {"column", d.column},
                        {"actual", d.actual ? nlohmann::json(*d.actual) : nlohmann::json(nullptr)},
                        {"expected", d.expected},
                        {"tol", d.tol}});
    out.json = {{"tool", std::string(tool_name) + " " + tool_version},
                {"config_hash", doc.hash},
                {"columns", result_columns},
                {"rows", rows},
                {"deviations", devs}};
    return out;
}

struct nyquist_output {
    double beta_b = 0.0;
    nyquist_result result;
    std::string csv;
    nlohmann::json summary;
};

inline nyquist_output run_nyquist(const config_document& doc, const case_config& c) {
    nyquist_output out;
    const auto bb = resolve_beta_b(c);
    if (!bb) throw no_solution("nyquist: beta_B cannot be calibrated for case '" + c.name + "'");
    out.beta_b = *bb;
    out.result = nyquist(open_loop_type_b(c.amp(), c.n_amplifiers, out.beta_b), c.grid);

    std::ostringstream os;
    csv_writer w(os);
    w.provenance("nyquist", doc.hash, "none", "none");
    w.meta("case", c.name);
    w.meta("beta_B", format_number(out.beta_b));
    w.meta("curve", "omega >= 0 half; the omega < 0 half is the complex conjugate");
    w.row({"omega", "re_L", "im_L"});
    for (const auto& pt : out.result.curve)
        w.row({format_number(pt.omega), format_number(pt.value.real()), format_number(pt.value.imag())});
    out.csv = os.str();

    const auto& r = out.result;
    out.summary = {{"case", c.name},
                   {"beta_B", out.beta_b},
                   {"encirclements", r.encirclements},
                   {"winding", r.winding},
                   {"stable", r.stable},
                   {"gm_db", r.has_crossover ? nlohmann::json(r.gain_margin_db) : nlohmann::json(nullptr)},
                   {"omega_pc", r.has_crossover ? nlohmann::json(r.omega_pc) : nlohmann::json(nullptr)},
                   {"points", r.curve.size()},
                   {"config_hash", doc.hash}};
    return out;
}

struct gainplot_options {
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
    double spread = 0.05;
    unsigned threads = 1;
};

struct gainplot_output {
    double beta_b = 0.0;
    monte_carlo_result result;
    std::string csv;
    nlohmann::json summary;
};

inline gainplot_output run_gainplot(const config_document& doc, const case_config& c, const gainplot_options& opt) {
    gainplot_output out;
    const auto bb = resolve_beta_b(c);
    if (!bb) throw no_solution("gainplot: beta_B cannot be calibrated for case '" + c.name + "'");
    out.beta_b = *bb;

    monte_carlo_config cfg;
    cfg.seed = opt.seed.value_or(c.seed);
    cfg.samples = opt.samples.value_or(c.samples);
    cfg.spread = opt.spread;
    cfg.grid = c.grid;
    cfg.threads = opt.threads;
    out.result = monte_carlo({c.n_amplifiers, c.amp(), c.beta_a, out.beta_b}, cfg);

    std::ostringstream os;
    csv_writer w(os);
    w.provenance("gainplot", doc.hash, std::to_string(cfg.seed), generator_name);
    w.meta("case", c.name);
    w.meta("samples", std::to_string(cfg.samples));
    w.meta("spread", format_number(cfg.spread));
    w.meta("beta_A", format_number(c.beta_a));
    w.meta("beta_B", format_number(out.beta_b));
    w.meta("controllers", "beta_A and beta_B held at nominal calibration for every sample");
    w.meta("perturbation", "epsilon' = (1 + spread r) epsilon, r ~ U[-1, 1)");
    w.row({"sample", "omega", "gain_db_uncontrolled", "gain_db_typeA", "gain_db_typeB", "unstable_flag"});
    const auto& res = out.result;
    for (const auto& s : res.samples)
        for (std::size_t f = 0; f < res.omegas.size(); ++f)
            w.row({std::to_string(s.index), format_number(res.omegas[f]), format_number(s.gain_db[f][uncontrolled]),
                   format_number(s.gain_db[f][type_a]), format_number(s.gain_db[f][type_b]),
                   s.unstable ? "1" : "0"});
    out.csv = os.str();

    const std::size_t pk = res.peak_index();
    auto stats_json = [&](std::size_t f) {
        nlohmann::json j;
        const char* names[] = {"uncontrolled", "typeA", "typeB"};
        for (std::size_t sys = 0; sys < system_count; ++sys)
            j[names[sys]] = {{"min", res.stats[f][sys].min},
                             {"max", res.stats[f][sys].max},
                             {"std", res.stats[f][sys].stddev}};
        return j;
    };
    int unstable = 0;
    for (const auto& s : res.samples) unstable += s.unstable ? 1 : 0;
    out.summary = {{"case", c.name},     {"seed", cfg.seed},
                   {"samples", cfg.samples}, {"spread", cfg.spread},
                   {"generator", generator_name}, {"beta_B", out.beta_b},
                   {"unstable_samples", unstable}, {"center", stats_json(0)},
                   {"peak_omega", res.omegas[pk]}, {"peak", stats_json(pk)}};
    return out;
}

// =============================================================================
// Command drivers (stream and file handling, exit codes)
// =============================================================================

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    f << content;
}

inline std::filesystem::path sibling_json(const std::string& out) {
    std::filesystem::path p(out);
    return p.replace_extension(".json");
}

template <class Body>
int run_guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

inline config_document load_or_default(const std::optional<std::string>& path) {
    return path ? load_config(*path) : default_config();
}

}  // namespace detail

struct table1_args {
    std::optional<std::string> config;
    std::optional<std::string> out;
};

/// CSV to `out` (or stdout) plus a sibling .json; exit 3 on deviations.
inline int cmd_table1(const table1_args& a, std::ostream& os, std::ostream& err) {
    return detail::run_guarded(err, [&] {
        const config_document doc = detail::load_or_default(a.config);
        const table1_output t = run_table1(doc);
        if (a.out) {
            detail::write_file(*a.out, t.csv);
            detail::write_file(detail::sibling_json(*a.out), t.json.dump(2) + "\n");
        } else {
            os << t.csv;
        }
        for (const auto& d : t.deviations)
            err << "tolerance exceeded: " << d.case_name << "." << d.column << " = " << format_optional(d.actual)
                << ", expected " << format_number(d.expected) << " +- " << format_number(d.tol) << '\n';
        return t.deviations.empty() ? exit_ok : exit_tolerance;
    });
}

struct nyquist_args {
    std::string case_name;
    std::optional<std::string> config;
    std::optional<std::string> out;
};

inline int cmd_nyquist(const nyquist_args& a, std::ostream& os, std::ostream& err) {
    return detail::run_guarded(err, [&] {
        const config_document doc = detail::load_or_default(a.config);
        const nyquist_output n = run_nyquist(doc, doc.find(a.case_name));
        if (a.out) {
            detail::write_file(*a.out, n.csv);
            detail::write_file(detail::sibling_json(*a.out), n.summary.dump(2) + "\n");
        } else {
            os << n.csv;
            err << n.summary.dump(2) << '\n';
        }
        return exit_ok;
    });
}

struct gainplot_args {
    std::string case_name;
    std::optional<std::string> config;
    std::optional<std::string> out;
    gainplot_options options;
};

inline int cmd_gainplot(const gainplot_args& a, std::ostream& os, std::ostream& err) {
    return detail::run_guarded(err, [&] {
        const config_document doc = detail::load_or_default(a.config);
        const gainplot_output g = run_gainplot(doc, doc.find(a.case_name), a.options);
        if (a.out) {
            detail::write_file(*a.out, g.csv);
            detail::write_file(detail::sibling_json(*a.out), g.summary.dump(2) + "\n");
        } else {
            os << g.csv;
        }
        return exit_ok;
    });
}

struct verify_args {
    verify_options options;
    std::optional<std::string> json_out;
};

/// Prints one line per property; exit 0 iff all pass, 3 otherwise.
inline int cmd_verify(const verify_args& a, std::ostream& os, std::ostream& err) {
    return detail::run_guarded(err, [&] {
        const verify_report rep = run_verify(a.options);
        for (const auto& p : rep.properties)
            os << (p.passed ? "PASS " : "FAIL ") << p.scope << '/' << p.name << " measured=" << format_number(p.measured)
               << " threshold=" << format_number(p.threshold) << (p.detail.empty() ? "" : " (" + p.detail + ")")
               << '\n';
        const std::string js = rep.to_json().dump(2) + "\n";
        if (a.json_out)
            detail::write_file(*a.json_out, js);
        else
            os << js;
        return rep.all_passed() ? exit_ok : exit_tolerance;
    });
}

}  // namespace qfa
