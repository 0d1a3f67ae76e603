#pragma once

// Invariant suite behind the `verify` command. Every property reports the
// measured worst case against its threshold; nothing here throws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfa/analysis.hpp"
#include "qfa/config.hpp"
#include "qfa/sensitivity.hpp"
#include "qfa/table.hpp"

namespace qfa {

enum class verify_scope { all, theorem, appendix, ccr, stability };

struct verify_options {
    verify_scope scope = verify_scope::all;
    int draws = 1000;
    std::uint64_t seed = 1;
    sign_bridge bridge = sign_bridge::canonical;
};

struct property_result {
    std::string name;
    std::string scope;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct verify_report {
    std::vector<property_result> properties;

    bool all_passed() const {
        return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.passed; });
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : properties)
            arr.push_back({{"name", p.name},           {"scope", p.scope},
                           {"passed", p.passed},       {"measured", p.measured},
                           {"threshold", p.threshold}, {"detail", p.detail}});
        return {{"tool", std::string(tool_name) + " " + tool_version}, {"passed", all_passed()}, {"properties", arr}};
    }
};

namespace detail {

inline std::vector<double> log_frequencies(double lo, double hi, int n) {
    return frequency_grid{lo, hi, n, spacing::log}.omegas();
}

/// Runs `body`, turning a thrown library error into a failed property.
inline property_result guarded(std::string name, std::string scope, double threshold,
                               const std::function<void(property_result&)>& body) {
    property_result p{std::move(name), std::move(scope), false, 0.0, threshold, {}};
    try {
        body(p);
    } catch (const std::exception& e) {
        p.passed = false;
        p.detail = std::string("error: ") + e.what();
    }
    return p;
}

}  // namespace detail

inline verify_report run_verify(const verify_options& opt) {
    verify_report rep;
    const config_document doc = default_config();
    auto want = [&](verify_scope s) { return opt.scope == verify_scope::all || opt.scope == s; };
    auto add = [&](property_result p) { rep.properties.push_back(std::move(p)); };
    auto cc_of = [&](const case_config& c) { return center_case{c.x, c.beta_a, c.n_amplifiers, opt.bridge}; };

    if (want(verify_scope::ccr)) {
        add(detail::guarded("ndpa_ccr", "ccr", 1e-8, [&](property_result& p) {
            for (const auto& c : doc.cases)
                for (double w : detail::log_frequencies(1e3, 1e10, 100)) {
                    const auto g = ndpa_response(c.amp(), w);
                    p.measured = std::max(p.measured, std::abs(std::norm(g.m11) - std::norm(g.m12) - 1.0));
                }
            p.passed = p.measured < p.threshold;
        }));
        add(detail::guarded("network_ccr", "ccr", 1e-6, [&](property_result& p) {
            for (const auto& c : doc.cases) {
                const double bb = calibrate_beta_b(cc_of(c));
                for (auto kind : {topology::type_a, topology::type_b}) {
                    const auto net = build_network({kind, c.n_amplifiers, c.amp(), {kind == topology::type_a ? c.beta_a : bb}});
                    for (double w : detail::log_frequencies(1e3, 1e10, 100))
                        p.measured = std::max(p.measured, ccr_residuals(net(w)).max_abs());
                }
            }
            p.passed = p.measured < p.threshold;
        }));
        add(detail::guarded("cascade_eigen_equivalence", "ccr", 1e-9, [&](property_result& p) {
            for (const auto& c : doc.cases)
                for (double w : detail::log_frequencies(1e3, 1e10, 100)) {
                    const auto g = ndpa_response(c.amp(), w);
                    const auto a = cascade(g, c.n_amplifiers), b = cascade_eigen(g, c.n_amplifiers);
                    const double scale = std::max(std::abs(a.m11), std::abs(a.m12));
                    p.measured = std::max({p.measured, std::abs(a.m11 - b.m11) / scale, std::abs(a.m12 - b.m12) / scale});
                }
            p.passed = p.measured < p.threshold;
        }));
    }

    if (want(verify_scope::theorem)) {
        add(detail::guarded("theorem_sweep", "theorem", 1.0, [&](property_result& p) {
            theorem_sweep_options so;
            so.seed = opt.seed;
            so.draws = opt.draws;
            so.bridge = opt.bridge;
            const auto r = theorem_sweep(so);
            p.measured = r.max_ratio;
            p.passed = r.ok(opt.draws);
            p.detail = std::to_string(r.passed) + "/" + std::to_string(r.valid) + " valid draws gain-matched with ratio < 1 (" +
                       std::to_string(r.attempts) + " attempts)";
        }));
        add(detail::guarded("table1_center_values", "theorem", 0.0, [&](property_result& p) {
            int misses = 0;
            for (const auto& c : doc.cases) {
                const center_case cc = cc_of(c);
                double bb = 0.0;
                try {
                    bb = calibrate_beta_b(cc);
                } catch (const error&) {
                    misses += 3;
                    continue;
                }
                const double vals[] = {bb, quantum_sensitivity_a(cc), quantum_sensitivity_b(cc, bb)};
                const char* keys[] = {"beta_B", "S_A", "S_B"};
                for (int k = 0; k < 3; ++k) {
                    const auto& ev = c.expected.at(keys[k]);
                    const double dev = std::abs(vals[k] - ev.value);
                    p.measured = std::max(p.measured, dev);
                    if (!(dev <= ev.tol)) ++misses;
                }
            }
            p.passed = misses == 0;
            p.detail = std::to_string(misses) + " of 12 beta_B/S_A/S_B values outside tolerance";
        }));
    }

    if (want(verify_scope::appendix)) {
        add(detail::guarded("fluctuation_identity_scaling", "appendix", 0.5, [&](property_result& p) {
            for (const auto& c : doc.cases) {
                const double g1 = std::abs(ndpa_center(c.amp()).g1);
                const double s = fluctuation_scaling(c.x, c.n_amplifiers, 1e-4 * g1);
                p.measured = std::max(p.measured, std::abs(s - 4.0));
            }
            p.passed = p.measured <= p.threshold;
            p.detail = "max |residual(d)/residual(d/2) - 4|";
        }));
        add(detail::guarded("ratio_formula", "appendix", 1e-9, [&](property_result& p) {
            for (int n = 1; n <= 8; ++n) {
                const auto r = verify_ratio_formula({0.6, 0.1, n, opt.bridge});
                p.measured = std::max({p.measured, std::abs(r.direct - r.formula) / r.direct,
                                       std::abs(r.branch - r.formula) / r.formula});
            }
            p.passed = p.measured < p.threshold;
            p.detail = "N = 1..8, x = 0.6, beta_A = 0.1";
        }));
        add(detail::guarded("finite_difference_oracle", "appendix", 1e-4, [&](property_result& p) {
            for (const auto& c : doc.cases) {
                const center_case cc = cc_of(c);
                const double bb = calibrate_beta_b(cc);
                const double sa = quantum_sensitivity_a(cc), sb = quantum_sensitivity_b(cc, bb);
                for (int j = 0; j < c.n_amplifiers; ++j) {
                    const double fa = fd_sensitivity(topology::type_a, c.x, c.beta_a, c.n_amplifiers, {1e-6, j});
                    p.measured = std::max(p.measured, std::abs(fa - sa) / std::abs(sa));
                }
                const double fb = fd_sensitivity(topology::type_b, c.x, bb, c.n_amplifiers);
                p.measured = std::max(p.measured, std::abs(fb - sb) / std::abs(sb));
            }
            p.passed = p.measured < p.threshold;
            p.detail = "type-A checked for every perturbed amplifier index";
        }));
    }

    if (want(verify_scope::stability)) {
        add(detail::guarded("type_a_criterion_vs_roots", "stability", 0.0, [&](property_result& p) {
            int disagree = 0;
            for (int i = 0; i < 100; ++i)
                for (int k = 0; k < 100; ++k) {
                    const double x = 1.5 * (i + 0.5) / 100.0, b = 0.99 * k / 100.0;
                    if (type_a_stable(x, b) != type_a_hurwitz(amplifier_params::from_x(1.8e7, x), b)) ++disagree;
                }
            p.measured = disagree;
            p.passed = disagree == 0;
            p.detail = "100 x 100 grid over (0, 1.5) x [0, 0.99)";
        }));
        add(detail::guarded("type_b_nyquist", "stability", 1e-6, [&](property_result& p) {
            int unstable = 0;
            for (const auto& c : doc.cases) {
                const double bb = calibrate_beta_b(cc_of(c));
                const auto ny = nyquist(open_loop_type_b(c.amp(), c.n_amplifiers, bb), c.grid);
                if (ny.encirclements != 0) ++unstable;
                p.measured = std::max(p.measured, ny.winding_defect());
            }
            p.passed = unstable == 0 && p.measured < p.threshold;
            p.detail = std::to_string(unstable) + " cases with encirclements; measured = max winding defect";
        }));
        add(detail::guarded("gain_margin_reproduction", "stability", 0.05, [&](property_result& p) {
            for (const auto& c : doc.cases) {
                const double bb = calibrate_beta_b(cc_of(c));
                const auto gm = gain_margin(open_loop_type_b(c.amp(), c.n_amplifiers, bb), c.grid);
                p.measured = std::max(p.measured, std::abs(gm.g_m_db - c.expected.at("gm_db").value));
            }
            p.passed = p.measured <= p.threshold;
        }));
    }
    return rep;
}

}  // namespace qfa
