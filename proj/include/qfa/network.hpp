#pragma once

// Two-port transfer matrices for the parametric amplifier and the
// beam-splitter controller, with feedback closure and cascade composition.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "qfa/errors.hpp"
#include "qfa/polyrat.hpp"

namespace qfa {

// =============================================================================
// Parameters
// =============================================================================

/// Ideal (zero-detuned, lossless) non-degenerate parametric amplifier.
struct amplifier_params {
    double kappa = 1.8e7;  ///< cavity damping rate, rad/s
    double epsilon = 0.0;  ///< nonlinearity strength, rad/s

    static amplifier_params from_x(double kappa, double x) { return {kappa, 0.5 * x * kappa}; }

    /// Normalized pump strength 2 epsilon / kappa.
    double x() const noexcept { return 2.0 * epsilon / kappa; }
    bool stable() const noexcept { return x() >= 0.0 && x() < 1.0; }

    void validate() const {
        if (!(kappa > 0.0)) throw invalid_parameter("amplifier: kappa must be > 0");
        if (!(epsilon >= 0.0)) throw invalid_parameter("amplifier: epsilon must be >= 0");
    }
};

/// How the center-frequency controller symbols relate to the beam-splitter
/// reflectivity. `canonical` is K1 = alpha, K2 = -beta. `inverted` exists
/// only as a mutation hook for the verification suite.
enum class sign_bridge { canonical, inverted };

/// Beam splitter with reflectivity beta and transmissivity alpha = +sqrt(1 - beta^2).
struct controller_params {
    double beta = 0.0;
    sign_bridge bridge = sign_bridge::canonical;

    double alpha() const noexcept { return std::sqrt(1.0 - beta * beta); }
    double k1() const noexcept { return alpha(); }
    double k2() const noexcept { return bridge == sign_bridge::canonical ? -beta : beta; }

    void validate() const {
        if (!(std::abs(beta) < 1.0)) throw invalid_parameter("controller: |beta| must be < 1");
    }
};

// =============================================================================
// Two-port matrices
// =============================================================================

/// 2x2 transfer matrix. T is rational (symbolic in s), complex (evaluated
/// at one frequency) or double.
template <class T>
struct two_port {
    T m11{}, m12{}, m21{}, m22{};

    static two_port identity() { return {T(1.0), T(0.0), T(0.0), T(1.0)}; }

    T det() const { return m11 * m22 - m12 * m21; }

    friend two_port operator*(const two_port& a, const two_port& b) {
        return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
    }
};

using two_port_rational = two_port<rational>;
using two_port_complex = two_port<complex>;

inline two_port_complex evaluate(const two_port_rational& g, complex s) {
    return {g.m11.eval(s), g.m12.eval(s), g.m21.eval(s), g.m22.eval(s)};
}

inline two_port_complex conj(const two_port_complex& g) {
    return {std::conj(g.m11), std::conj(g.m12), std::conj(g.m21), std::conj(g.m22)};
}

/// [g1, g2; g2, g1] with g1 = (s^2 - kappa^2/4 - eps^2)/D, g2 = -kappa eps/D,
/// D = s^2 + kappa s + kappa^2/4 - eps^2.
inline two_port_rational ndpa_transfer(const amplifier_params& p) {
    p.validate();
    const double k = p.kappa, e = p.epsilon;
    const polynomial den{0.25 * k * k - e * e, k, 1.0};
    const rational g1{polynomial{-0.25 * k * k - e * e, 0.0, 1.0}, den};
    const rational g2{polynomial{-k * e}, den};
    return {g1, g2, g2, g1};
}

/// Pointwise NDPA response at s = i omega.
inline two_port_complex ndpa_response(const amplifier_params& p, double omega) {
    const complex s{0.0, omega};
    const double k = p.kappa, e = p.epsilon;
    const complex d = s * s + k * s + (0.25 * k * k - e * e);
    if (!(std::abs(d) >= default_pole_floor)) throw pole_at_point("ndpa_response: evaluation at a pole");
    const complex g1 = (s * s - (0.25 * k * k + e * e)) / d;
    const complex g2 = -k * e / d;
    return {g1, g2, g2, g1};
}

/// Center-frequency entries (G1, G2) of the NDPA matrix; G1^2 - G2^2 = 1.
struct center_gain {
    double g1;
    double g2;
};

inline center_gain ndpa_center(const amplifier_params& p) {
    const double k = p.kappa, e = p.epsilon;
    const double d = 0.25 * k * k - e * e;
    if (d == 0.0) throw pole_at_point("ndpa_center: x = 1 puts a pole at s = 0");
    return {(-0.25 * k * k - e * e) / d, -k * e / d};
}

/// K = [alpha, -beta; beta, alpha]. Frequency independent.
template <class T = complex>
two_port<T> beam_splitter(const controller_params& c) {
    c.validate();
    const double a = c.alpha(), b = c.beta;
    return {T(a), T(-b), T(b), T(a)};
}

namespace detail {

inline bool vanishes(const rational& r) { return r.is_identically_zero(); }
inline bool vanishes(const complex& z) { return !(std::abs(z) >= default_pole_floor); }
inline bool vanishes(double v) { return !(std::abs(v) >= default_pole_floor); }

}  // namespace detail

/// Closes the idler loop of g through controller k (idler out -> k -> idler in).
/// Throws singular_closure when 1 - G22 K21 vanishes.
template <class T>
two_port<T> close_feedback(const two_port<T>& g, const two_port<T>& k) {
    const T one(1.0);
    const T d = one - g.m22 * k.m21;
    if (detail::vanishes(d)) throw singular_closure("close_feedback: loop denominator 1 - G22 K21 vanishes");
    return {(g.m11 - k.m21 * g.det()) / d, g.m12 * k.m22 / d, g.m21 * k.m11 / d,
            (k.m12 + g.m22 * k.det()) / d};
}

/// n-fold cascade by repeated multiplication.
template <class T>
two_port<T> cascade(const two_port<T>& g, int n) {
    if (n < 1) throw invalid_parameter("cascade: n must be >= 1");
    two_port<T> acc = g;
    for (int i = 1; i < n; ++i) acc = g * acc;
    return acc;
}

/// n-fold cascade of a symmetric equal-diagonal matrix through its
/// eigenvalues lambda = m11 +- m12.
inline two_port_complex cascade_eigen(const two_port_complex& g, int n) {
    if (n < 1) throw invalid_parameter("cascade_eigen: n must be >= 1");
    const complex lp = std::pow(g.m11 + g.m12, n);
    const complex lm = std::pow(g.m11 - g.m12, n);
    const complex d = 0.5 * (lp + lm), o = 0.5 * (lp - lm);
    return {d, o, o, d};
}

struct eigenvalues {
    double plus;
    double minus;
};

inline eigenvalues eigen_pair(double g1, double g2) { return {g1 + g2, g1 - g2}; }

/// Eigenvalues of the single closed-loop amplifier at omega = 0:
/// (G1 + K2 +- G2 K1) / (1 + G1 K2).
inline eigenvalues closed_loop_eigen_pair(center_gain g, const controller_params& c) {
    const double d = 1.0 + g.g1 * c.k2();
    if (d == 0.0) throw singular_loop("closed_loop_eigen_pair: 1 + G1 K2 = 0");
    return {(g.g1 + c.k2() + g.g2 * c.k1()) / d, (g.g1 + c.k2() - g.g2 * c.k1()) / d};
}

// =============================================================================
// Networks
// =============================================================================

enum class topology { type_a, type_b };

inline const char* to_string(topology t) { return t == topology::type_a ? "type-A" : "type-B"; }

struct network_spec {
    topology kind = topology::type_a;
    int n_amplifiers = 1;
    amplifier_params amp;
    controller_params controller;

    void validate() const {
        if (n_amplifiers < 1) throw invalid_parameter("network: n_amplifiers must be >= 1");
        amp.validate();
        controller.validate();
    }
};

/// Composes a chain of (possibly non-identical) amplifier matrices at one
/// frequency. Signal order is amps[0] first; type-A closes each amplifier
/// individually, type-B closes the whole cascade once.
inline two_port_complex evaluate_chain(topology kind, std::span<const two_port_complex> amps,
                                       const two_port_complex& k) {
    if (amps.empty()) throw invalid_parameter("evaluate_chain: empty chain");
    two_port_complex acc = two_port_complex::identity();
    for (const auto& g : amps) acc = (kind == topology::type_a ? close_feedback(g, k) : g) * acc;
    return kind == topology::type_b ? close_feedback(acc, k) : acc;
}

/// Stateless frequency response omega -> closed-loop two-port.
class network_response {
public:
    explicit network_response(network_spec spec) : spec_(spec), k_(beam_splitter(spec.controller)) {
        spec_.validate();
    }

    const network_spec& spec() const noexcept { return spec_; }

    /// Negative frequencies come from conjugate symmetry.
    two_port_complex operator()(double omega) const {
        if (omega < 0.0) return conj((*this)(-omega));
        const two_port_complex g = ndpa_response(spec_.amp, omega);
        if (spec_.kind == topology::type_a) return cascade(close_feedback(g, k_), spec_.n_amplifiers);
        return close_feedback(cascade(g, spec_.n_amplifiers), k_);
    }

private:
    network_spec spec_;
    two_port_complex k_;
};

inline network_response build_network(const network_spec& spec) { return network_response(spec); }

/// Bare N-fold cascade without feedback.
inline two_port_complex uncontrolled_response(const amplifier_params& amp, int n, double omega) {
    if (omega < 0.0) return conj(uncontrolled_response(amp, n, -omega));
    return cascade(ndpa_response(amp, omega), n);
}

// =============================================================================
// CCR constraints
// =============================================================================

struct ccr_residual {
    double signal;  ///< |G11|^2 - |G12|^2 - 1
    double idler;   ///< |G22|^2 - |G21|^2 - 1
    double cross;   ///< |G21 G11* - G22 G12*|

    double max_abs() const noexcept {
        return std::max({std::abs(signal), std::abs(idler), std::abs(cross)});
    }
};

inline ccr_residual ccr_residuals(const two_port_complex& m) {
    return {std::norm(m.m11) - std::norm(m.m12) - 1.0, std::norm(m.m22) - std::norm(m.m21) - 1.0,
            std::abs(m.m21 * std::conj(m.m11) - m.m22 * std::conj(m.m12))};
}

}  // namespace qfa
