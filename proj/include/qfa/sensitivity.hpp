#pragma once

// Center-frequency sensitivity of the cascaded feedback amplifier: classical
// baseline, closed-form quantum sensitivities for both topologies, gain
// calibration of the type-B controller and the numerical checks behind the
// type-B-beats-type-A result.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "qfa/errors.hpp"
#include "qfa/network.hpp"
#include "qfa/random.hpp"

namespace qfa {

// =============================================================================
// Classical amplifier
// =============================================================================

inline double classical_closed_gain(double g, double k) {
    const double d = 1.0 + g * k;
    if (d == 0.0) throw singular_loop("classical_closed_gain: 1 + G K = 0");
    return g / d;
}

struct classical_pair {
    double s_a;
    double s_b;
};

/// s_a = 1/(1 + G K_a), s_b = 1/(1 + G^N K_b).
inline classical_pair classical_sensitivities(double g, double k_a, double k_b, int n) {
    const double da = 1.0 + g * k_a;
    const double db = 1.0 + std::pow(g, n) * k_b;
    if (da == 0.0 || db == 0.0) throw singular_loop("classical_sensitivities: zero loop denominator");
    return {1.0 / da, 1.0 / db};
}

// =============================================================================
// Center-frequency gains
// =============================================================================

/// A configuration evaluated at omega = 0. kappa does not enter any
/// center-frequency quantity.
struct center_case {
    double x = 0.0;
    double beta_a = 0.0;
    int n = 1;
    sign_bridge bridge = sign_bridge::canonical;

    amplifier_params amp(double kappa = 1.8e7) const { return amplifier_params::from_x(kappa, x); }
    controller_params controller_a() const { return {beta_a, bridge}; }
    controller_params controller(double beta) const { return {beta, bridge}; }
};

/// Diagonal/off-diagonal entries of a symmetric equal-diagonal 2x2 matrix.
struct sym_pair {
    double diag;
    double off;
};

/// [G(0)]^N = [M1, M2; M2, M1].
inline sym_pair cascade_center(center_gain g, int n) {
    const eigenvalues l = eigen_pair(g.g1, g.g2);
    const double p = std::pow(l.plus, n), m = std::pow(l.minus, n);
    return {0.5 * (p + m), 0.5 * (p - m)};
}

/// Type-A overall matrix [G^fb(0)]^N.
inline sym_pair type_a_center(center_gain g, const controller_params& c, int n) {
    const eigenvalues l = closed_loop_eigen_pair(g, c);
    const double p = std::pow(l.plus, n), m = std::pow(l.minus, n);
    return {0.5 * (p + m), 0.5 * (p - m)};
}

/// Type-B overall matrix: one loop closed around [G(0)]^N.
inline sym_pair type_b_center(center_gain g, const controller_params& c, int n) {
    const sym_pair m = cascade_center(g, n);
    const double d = 1.0 + m.diag * c.k2();
    if (d == 0.0) throw singular_loop("type_b_center: 1 + M1 K2B = 0");
    return {(m.diag + c.k2()) / d, m.off * c.k1() / d};
}

// =============================================================================
// Quantum sensitivities
// =============================================================================

/// S_A = K1A G1 / (G2 (1 + G1 K2A)) * G^fb_2A / G^fb_1A.
inline double quantum_sensitivity_a(center_gain g, const controller_params& c, int n) {
    if (g.g2 == 0.0) throw zero_gain("quantum_sensitivity_a: G2 = 0");
    const double loop = 1.0 + g.g1 * c.k2();
    if (loop == 0.0) throw singular_loop("quantum_sensitivity_a: 1 + G1 K2A = 0");
    const sym_pair fb = type_a_center(g, c, n);
    if (fb.diag == 0.0) throw zero_gain("quantum_sensitivity_a: closed-loop gain is zero");
    return c.k1() * g.g1 / (g.g2 * loop) * fb.off / fb.diag;
}

/// S_B = K1B G1 / (G2 (1 + M1 K2B)) * G^fb_2B / G^fb_1B.
inline double quantum_sensitivity_b(center_gain g, const controller_params& c, int n) {
    if (g.g2 == 0.0) throw zero_gain("quantum_sensitivity_b: G2 = 0");
    const sym_pair m = cascade_center(g, n);
    const double loop = 1.0 + m.diag * c.k2();
    if (loop == 0.0) throw singular_loop("quantum_sensitivity_b: 1 + M1 K2B = 0");
    const sym_pair fb = type_b_center(g, c, n);
    if (fb.diag == 0.0) throw zero_gain("quantum_sensitivity_b: closed-loop gain is zero");
    return c.k1() * g.g1 / (g.g2 * loop) * fb.off / fb.diag;
}

inline double quantum_sensitivity_a(const center_case& cc) {
    return quantum_sensitivity_a(ndpa_center(cc.amp()), cc.controller_a(), cc.n);
}

inline double quantum_sensitivity_b(const center_case& cc, double beta_b) {
    return quantum_sensitivity_b(ndpa_center(cc.amp()), cc.controller(beta_b), cc.n);
}

/// Reflectivity of the type-B controller that makes the type-B gain at
/// omega = 0 equal to the type-A gain: K2B = (M1 - g) / (g M1 - 1).
inline double calibrate_beta_b(const center_case& cc) {
    const center_gain g = ndpa_center(cc.amp());
    const double target = type_a_center(g, cc.controller_a(), cc.n).diag;
    const double m1 = cascade_center(g, cc.n).diag;
    const double d = target * m1 - 1.0;
    if (d == 0.0) throw no_solution("calibrate_beta_b: g M1 = 1");
    const double k2b = (m1 - target) / d;
    const double beta = cc.bridge == sign_bridge::canonical ? -k2b : k2b;
    if (!std::isfinite(beta) || !(std::abs(beta) < 1.0))
        throw no_solution("calibrate_beta_b: required |beta_B| >= 1");
    const double achieved = type_b_center(g, cc.controller(beta), cc.n).diag;
    if (std::abs(std::abs(achieved) - std::abs(target)) > 1e-10 * std::abs(target))
        throw no_solution("calibrate_beta_b: gain matching did not converge");
    return beta;
}

// =============================================================================
// Network-evaluated oracles
// =============================================================================

/// Closed-loop (1,1) gain at omega = 0 from the two-port network path, with
/// amplifier `perturbed` (or none, when out of range) replaced by `alt`.
inline double network_center_gain(topology kind, int n, const amplifier_params& amp, double beta,
                                  int perturbed = -1, const amplifier_params* alt = nullptr) {
    std::vector<two_port_complex> chain(static_cast<std::size_t>(n), ndpa_response(amp, 0.0));
    if (alt != nullptr && perturbed >= 0 && perturbed < n)
        chain[static_cast<std::size_t>(perturbed)] = ndpa_response(*alt, 0.0);
    return evaluate_chain(kind, chain, beam_splitter(controller_params{beta})).m11.real();
}

struct fd_options {
    double rel_step = 1e-6;  ///< relative perturbation of epsilon
    int amplifier_index = 0;  ///< which amplifier in the chain is perturbed
};

/// (dG^fb/G^fb) / (dG1/G1) by central differences in epsilon of one
/// amplifier, evaluated entirely through the two-port network.
inline double fd_sensitivity(topology kind, double x, double beta, int n, fd_options opt = {}) {
    const amplifier_params amp = amplifier_params::from_x(1.8e7, x);
    amplifier_params up = amp, down = amp;
    up.epsilon *= 1.0 + opt.rel_step;
    down.epsilon *= 1.0 - opt.rel_step;
    const double g1 = ndpa_response(amp, 0.0).m11.real();
    const double dg1 = ndpa_response(up, 0.0).m11.real() - ndpa_response(down, 0.0).m11.real();
    const double gfb = network_center_gain(kind, n, amp, beta);
    const double dgfb = network_center_gain(kind, n, amp, beta, opt.amplifier_index, &up) -
                        network_center_gain(kind, n, amp, beta, opt.amplifier_index, &down);
    if (gfb == 0.0 || dg1 == 0.0) throw zero_gain("fd_sensitivity: degenerate quotient");
    return (dgfb / gfb) / (dg1 / g1);
}

// =============================================================================
// Main result
// =============================================================================

inline constexpr double gain_match_tolerance = 1e-8;

struct sensitivity_report {
    double s_a = 0.0;  ///< classical 1/(1 + G1 K2A)
    double s_b = 0.0;  ///< classical 1/(1 + M1 K2B)
    double S_A = 0.0;
    double S_B = 0.0;
    double ratio = 0.0;  ///< |S_B| / |S_A|
    double beta_b = 0.0;
    double m1 = 0.0;
    double gain = 0.0;     ///< G^fb_1A(0)
    double gain_db = 0.0;  ///< 20 log10 |G^fb_1A(0)|
    bool gain_matched = false;  ///< checked through the network, not the closed forms
    bool gain_reduced = false;  ///< |G^fb_1A| < |M1|

    /// The theorem asserts nothing unless both gain conditions hold.
    bool theorem_applies() const noexcept { return gain_matched && gain_reduced; }
    bool theorem_holds() const noexcept { return !theorem_applies() || ratio < 1.0; }
};

inline sensitivity_report verify_main_theorem(const center_case& cc) {
    sensitivity_report r;
    const amplifier_params amp = cc.amp();
    const center_gain g = ndpa_center(amp);
    r.beta_b = calibrate_beta_b(cc);
    const controller_params ca = cc.controller_a(), cb = cc.controller(r.beta_b);
    r.m1 = cascade_center(g, cc.n).diag;
    r.gain = type_a_center(g, ca, cc.n).diag;
    r.gain_db = 20.0 * std::log10(std::abs(r.gain));
    r.s_a = 1.0 / (1.0 + g.g1 * ca.k2());
    r.s_b = 1.0 / (1.0 + r.m1 * cb.k2());
    r.S_A = quantum_sensitivity_a(g, ca, cc.n);
    r.S_B = quantum_sensitivity_b(g, cb, cc.n);
    r.ratio = std::abs(r.S_B) / std::abs(r.S_A);

    const double net_a = network_center_gain(topology::type_a, cc.n, amp, cc.beta_a);
    const double net_b = network_center_gain(topology::type_b, cc.n, amp, r.beta_b);
    r.gain_matched = std::abs(std::abs(net_b) - std::abs(net_a)) <= gain_match_tolerance * std::abs(net_a);
    r.gain_reduced = std::abs(r.gain) < std::abs(r.m1);
    return r;
}

struct theorem_sweep_options {
    std::uint64_t seed = 1;
    int draws = 1000;           ///< valid configurations required
    int max_attempts = 100000;
    double x_lo = 0.1, x_hi = 0.95;
    double beta_lo = 0.01, beta_hi = 0.5;
    int n_lo = 2, n_hi = 6;
    sign_bridge bridge = sign_bridge::canonical;
};

struct theorem_sweep_result {
    int attempts = 0;
    int valid = 0;    ///< calibrated and gain-reduced
    int passed = 0;   ///< valid, network gain-matched and ratio < 1
    double max_ratio = 0.0;
    std::optional<center_case> first_failure;

    bool ok(int required) const noexcept { return valid >= required && passed == valid; }
};

/// Random (x, beta_A, N) configurations until `draws` valid ones are seen.
/// Attempt i uses its own engine, so shards are reproducible.
inline theorem_sweep_result theorem_sweep(const theorem_sweep_options& opt) {
    theorem_sweep_result out;
    for (int i = 0; out.valid < opt.draws && i < opt.max_attempts; ++i) {
        ++out.attempts;
        auto eng = sample_engine(opt.seed, static_cast<std::uint64_t>(i));
        center_case cc;
        cc.x = uniform(eng, opt.x_lo, opt.x_hi);
        cc.beta_a = uniform(eng, opt.beta_lo, opt.beta_hi);
        cc.n = opt.n_lo + static_cast<int>(uniform01(eng) * (opt.n_hi - opt.n_lo + 1));
        cc.bridge = opt.bridge;
        sensitivity_report r;
        try {
            r = verify_main_theorem(cc);
        } catch (const error&) {
            continue;
        }
        if (!r.gain_reduced) continue;
        ++out.valid;
        if (r.gain_matched) out.max_ratio = std::max(out.max_ratio, r.ratio);
        if (r.gain_matched && r.ratio < 1.0)
            ++out.passed;
        else if (!out.first_failure)
            out.first_failure = cc;
    }
    return out;
}

// =============================================================================
// Perturbation and ratio identities
// =============================================================================

/// First-order CCR-consistent perturbation: G2 dG2 = G1 dG1.
struct perturbation_model {
    double delta_g1 = 0.0;

    double delta_g2(center_gain g) const { return g.g1 * delta_g1 / g.g2; }
};

/// |dM1 - (M2/G2) dG1| when one amplifier of the N-cascade moves to
/// G1 + dG1 on the exact CCR manifold, G2' = sign(G2) sqrt(G1'^2 - 1).
/// The identity is first order, so the result is O(dG1^2).
inline double verify_fluctuation_identity(double x, int n, double delta_g1) {
    const center_gain g = ndpa_center(amplifier_params::from_x(1.8e7, x));
    if (delta_g1 == 0.0) return 0.0;
    if (g.g2 == 0.0) throw zero_gain("verify_fluctuation_identity: G2 = 0");
    const sym_pair m = cascade_center(g, n);
    const double g1p = g.g1 + delta_g1;
    const double g2p = std::copysign(std::sqrt(g1p * g1p - 1.0), g.g2);
    const eigenvalues l = eigen_pair(g.g1, g.g2);
    const eigenvalues lp = eigen_pair(g1p, g2p);
    const double m1p = 0.5 * (lp.plus * std::pow(l.plus, n - 1) + lp.minus * std::pow(l.minus, n - 1));
    return std::abs((m1p - m.diag) - m.off / g.g2 * delta_g1);
}

/// residual(delta) / residual(delta / 2); about 4 for a quadratic remainder.
inline double fluctuation_scaling(double x, int n, double delta_g1) {
    return verify_fluctuation_identity(x, n, delta_g1) / verify_fluctuation_identity(x, n, 0.5 * delta_g1);
}

struct ratio_check {
    double direct;   ///< |S_B| / |S_A| from the closed-form sensitivities
    double formula;  ///< eigenvalue-sum expression
    double branch;   ///< odd / 4l-2 / 4l case-split expression
};

namespace detail {

/// sum_{k=1..n} mu^(n - 2k + 1)
inline double symmetric_power_sum(double mu, int n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += std::pow(mu, n - 2 * k + 1);
    return s;
}

inline double mu_pair(double mu, int p) { return std::pow(mu, p) + std::pow(mu, -p); }

/// The sum of symmetric_power_sum(mu, n) regrouped by parity of n.
inline double branch_value(double mu, int n) {
    if (n % 2 == 1) {
        double s = 1.0;
        for (int k = 1; k <= (n - 1) / 2; ++k) s += mu_pair(mu, 2 * k);
        return s;
    }
    double s = 0.0;
    if (n % 4 == 2) {
        s = 1.0;
        for (int k = 1; k <= (n + 2) / 4 - 1; ++k) s += mu_pair(mu, 4 * k);
    } else {
        for (int k = 1; k <= n / 4; ++k) s += mu_pair(mu, 4 * k - 2);
    }
    return mu_pair(mu, 1) * s;
}

}  // namespace detail

inline ratio_check verify_ratio_formula(const center_case& cc) {
    const center_gain g = ndpa_center(cc.amp());
    const double beta_b = calibrate_beta_b(cc);
    const double direct = std::abs(quantum_sensitivity_b(g, cc.controller(beta_b), cc.n)) /
                          std::abs(quantum_sensitivity_a(g, cc.controller_a(), cc.n));
    const double lam = eigen_pair(g.g1, g.g2).plus;
    const double lam_fb = closed_loop_eigen_pair(g, cc.controller_a()).plus;
    const double formula =
        std::abs(detail::symmetric_power_sum(lam_fb, cc.n) / detail::symmetric_power_sum(lam, cc.n));
    const double branch = std::abs(detail::branch_value(lam_fb, cc.n) / detail::branch_value(lam, cc.n));
    return {direct, formula, branch};
}

struct approx_pair {
    double s_a;
    double s_b;
};

/// High-gain approximations that drop the G^fb_2 / G^fb_1 factor.
inline approx_pair high_gain_approximations(const center_case& cc, double beta_b) {
    const center_gain g = ndpa_center(cc.amp());
    if (g.g2 == 0.0) throw zero_gain("high_gain_approximations: G2 = 0");
    const controller_params ca = cc.controller_a(), cb = cc.controller(beta_b);
    const double m1 = cascade_center(g, cc.n).diag;
    return {ca.k1() * g.g1 / (g.g2 * (1.0 + g.g1 * ca.k2())), cb.k1() * g.g1 / (g.g2 * (1.0 + m1 * cb.k2()))};
}

}  // namespace qfa
