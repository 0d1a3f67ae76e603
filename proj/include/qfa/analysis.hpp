#pragma once

// Stability of both topologies (closed-form criterion for type-A, Nyquist
// winding and gain margin for type-B) and the seeded Monte Carlo gain
// fluctuation experiment.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <thread>
#include <utility>
#include <vector>

#include "qfa/errors.hpp"
#include "qfa/network.hpp"
#include "qfa/polyrat.hpp"
#include "qfa/random.hpp"

namespace qfa {

// =============================================================================
// Frequency grid
// =============================================================================

enum class spacing { log, linear };

struct frequency_grid {
    double omega_min = 1e3;
    double omega_max = 1e10;
    int points = 2000;
    spacing kind = spacing::log;

    void validate() const {
        if (!(omega_min > 0.0 && omega_min < omega_max))
            throw invalid_parameter("frequency_grid: need 0 < omega_min < omega_max");
        if (points < 2) throw invalid_parameter("frequency_grid: need at least 2 points");
    }

    std::vector<double> omegas() const {
        validate();
        std::vector<double> w(static_cast<std::size_t>(points));
        const double last = points - 1;
        for (int i = 0; i < points; ++i) {
            const double t = i / last;
            w[static_cast<std::size_t>(i)] =
                kind == spacing::log ? omega_min * std::pow(omega_max / omega_min, t)
                                     : omega_min + (omega_max - omega_min) * t;
        }
        w.front() = omega_min;
        w.back() = omega_max;
        return w;
    }

    /// Midpoint of [lo, hi] in the grid's own metric.
    double midpoint(double lo, double hi) const {
        return kind == spacing::log && lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    }
};

// =============================================================================
// Type-A stability
// =============================================================================

/// x < sqrt((1 + beta_A) / (1 - beta_A)).
inline bool type_a_stable(double x, double beta_a) {
    if (!(beta_a >= 0.0 && beta_a < 1.0)) throw invalid_parameter("type_a_stable: need 0 <= beta_A < 1");
    return x < std::sqrt((1.0 + beta_a) / (1.0 - beta_a));
}

/// Characteristic polynomial of one NDPA closed through a beam splitter:
/// s^2 + kappa/(1 - beta) s + (1 + beta)/(1 - beta) kappa^2/4 - eps^2.
inline polynomial type_a_characteristic(const amplifier_params& amp, double beta_a) {
    const double k = amp.kappa, e = amp.epsilon;
    return polynomial{(1.0 + beta_a) / (1.0 - beta_a) * 0.25 * k * k - e * e, k / (1.0 - beta_a), 1.0};
}

/// Hurwitz test on the roots of type_a_characteristic.
inline bool type_a_hurwitz(const amplifier_params& amp, double beta_a) {
    const polynomial p = type_a_characteristic(amp, beta_a);
    const auto [r1, r2] = quadratic_roots(p[2], p[1], p[0]);
    return r1.real() < 0.0 && r2.real() < 0.0;
}

// =============================================================================
// Type-B open loop
// =============================================================================

/// L(i omega) = -beta_B [G(i omega)^N]_22.
class open_loop_type_b {
public:
    open_loop_type_b(amplifier_params amp, int n, double beta_b) : amp_(amp), n_(n), beta_(beta_b) {
        amp_.validate();
        if (n_ < 1) throw invalid_parameter("open_loop_type_b: n must be >= 1");
    }

    explicit open_loop_type_b(const network_spec& spec)
        : open_loop_type_b(spec.amp, spec.n_amplifiers, spec.controller.beta) {}

    complex operator()(double omega) const {
        if (omega < 0.0) return std::conj((*this)(-omega));
        if (std::isinf(omega)) return at_infinity();
        return -beta_ * cascade(ndpa_response(amp_, omega), n_).m22;
    }

    /// The NDPA tends to the identity as omega -> infinity.
    complex at_infinity() const { return {-beta_, 0.0}; }

    const amplifier_params& amp() const noexcept { return amp_; }

private:
    amplifier_params amp_;
    int n_;
    double beta_;
};

// =============================================================================
// Gain margin
// =============================================================================

struct gain_margin_result {
    double g_m_db;
    double omega_pc;
    complex l_pc;
};

/// Smallest gain margin over the phase crossovers (Im L changes sign with
/// Re L < 0) found on the grid, each refined by bisection to a relative
/// omega tolerance of 1e-10. A loop that is real and negative over the whole
/// grid reports its value at omega_min.
template <class Loop>
gain_margin_result gain_margin(const Loop& loop, const frequency_grid& grid) {
    const std::vector<double> w = grid.omegas();
    std::vector<complex> l(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) l[i] = loop(w[i]);

    auto margin = [](complex v) { return -20.0 * std::log10(std::abs(v)); };

    const bool all_real_negative = std::all_of(l.begin(), l.end(), [](complex v) {
        return v.imag() == 0.0 && v.real() < 0.0;
    });
    if (all_real_negative) return {margin(l.front()), w.front(), l.front()};

    bool found = false;
    gain_margin_result best{std::numeric_limits<double>::infinity(), 0.0, {}};
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if ((l[i].imag() < 0.0) == (l[i + 1].imag() < 0.0)) continue;
        double lo = w[i], hi = w[i + 1];
        const bool lo_negative = l[i].imag() < 0.0;
        while ((hi - lo) > 1e-10 * lo) {
            const double mid = grid.midpoint(lo, hi);
            if (mid <= lo || mid >= hi) break;
            ((loop(mid).imag() < 0.0) == lo_negative ? lo : hi) = mid;
        }
        const double pc = grid.midpoint(lo, hi);
        const complex v = loop(pc);
        if (!(v.real() < 0.0)) continue;
        const double gm = margin(v);
        if (!found || gm < best.g_m_db) best = {gm, pc, v};
        found = true;
    }
    if (!found) throw no_phase_crossover("gain_margin: no phase crossover in [omega_min, omega_max]");
    return best;
}

// =============================================================================
// Nyquist
// =============================================================================

struct nyquist_point {
    double omega;  ///< +infinity for the closing endpoint
    complex value;
};

struct nyquist_result {
    std::vector<nyquist_point> curve;  ///< omega = 0 .. +infinity, refined
    double winding = 0.0;              ///< accumulated angle / 2 pi over the closed curve
    int encirclements = 0;             ///< counterclockwise about (-1, 0)
    bool stable = true;
    bool has_crossover = false;
    double gain_margin_db = std::numeric_limits<double>::infinity();
    double omega_pc = std::numeric_limits<double>::quiet_NaN();

    /// Distance of the accumulated winding from the nearest integer.
    double winding_defect() const { return std::abs(winding - std::round(winding)); }
};

struct nyquist_options {
    double max_step_deg = 10.0;
    std::size_t budget = std::size_t{1} << 20;
};

namespace detail {

/// Angle subtended about (-1, 0) going from a to b, in (-pi, pi].
inline double subtended(complex a, complex b) { return std::arg((b + 1.0) / (a + 1.0)); }

}  // namespace detail

/// Closed Nyquist contour of L over omega in (-inf, inf): the positive half
/// is sampled on the grid, bisected wherever a step subtends more than
/// max_step_deg about (-1, 0), extended past omega_max by decades until it
/// closes onto L(i inf); the negative half is its complex conjugate.
inline nyquist_result nyquist(const open_loop_type_b& loop, const frequency_grid& grid,
                              nyquist_options opt = {}) {
    if (!loop.amp().stable())
        throw invalid_parameter("nyquist: open loop has unstable poles (x >= 1)");
    const double max_step = opt.max_step_deg * std::numbers::pi / 180.0;
    const std::vector<double> w = grid.omegas();

    nyquist_result r;
    auto& curve = r.curve;
    curve.push_back({0.0, loop(0.0)});

    auto push = [&](double omega, complex v) {
        if (curve.size() >= opt.budget)
            throw refinement_budget_exceeded("nyquist: refinement budget exhausted near (-1, 0)");
        curve.push_back({omega, v});
    };

    // Appends (lo, hi] to the curve, bisecting coarse steps. Explicit stack,
    // visiting left halves first.
    auto refine_to = [&](double hi, complex lhi) {
        std::vector<std::pair<double, complex>> stack{{hi, lhi}};
        while (!stack.empty()) {
            const nyquist_point prev = curve.back();
            const auto [w1, l1] = stack.back();
            const bool coarse = std::abs(detail::subtended(prev.value, l1)) > max_step;
            const double mid = prev.omega == 0.0 ? 0.5 * w1 : grid.midpoint(prev.omega, w1);
            if (coarse && mid > prev.omega && mid < w1) {
                if (curve.size() + stack.size() >= opt.budget)
                    throw refinement_budget_exceeded("nyquist: refinement budget exhausted near (-1, 0)");
                stack.push_back({mid, loop(mid)});
                continue;
            }
            if (coarse) throw refinement_budget_exceeded("nyquist: cannot resolve winding near (-1, 0)");
            stack.pop_back();
            push(w1, l1);
        }
    };

    for (double omega : w) refine_to(omega, loop(omega));

    const complex l_inf = loop.at_infinity();
    for (int decade = 0; std::abs(detail::subtended(curve.back().value, l_inf)) > max_step; ++decade) {
        const double next = curve.back().omega * 10.0;
        if (decade > 280 || !std::isfinite(next))
            throw refinement_budget_exceeded("nyquist: curve does not settle onto L(i inf)");
        refine_to(next, loop(next));
    }
    push(std::numeric_limits<double>::infinity(), l_inf);

    // Closed contour: positive half, then the conjugate half traversed back
    // from -inf to 0.
    double angle = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) angle += detail::subtended(curve[i].value, curve[i + 1].value);
    for (std::size_t i = curve.size() - 1; i > 0; --i)
        angle += detail::subtended(std::conj(curve[i].value), std::conj(curve[i - 1].value));
    angle += detail::subtended(std::conj(curve.front().value), curve.front().value);

    r.winding = angle / (2.0 * std::numbers::pi);
    r.encirclements = static_cast<int>(std::lround(r.winding));
    r.stable = r.encirclements == 0;

    try {
        const gain_margin_result gm = gain_margin(loop, grid);
        r.has_crossover = true;
        r.gain_margin_db = gm.g_m_db;
        r.omega_pc = gm.omega_pc;
    } catch (const no_phase_crossover&) {
    }
    return r;
}

inline nyquist_result nyquist(const network_spec& spec, const frequency_grid& grid, nyquist_options opt = {}) {
    return nyquist(open_loop_type_b(spec), grid, opt);
}

// =============================================================================
// Monte Carlo gain fluctuation
// =============================================================================

enum system_index : std::size_t { uncontrolled = 0, type_a = 1, type_b = 2 };
inline constexpr std::size_t system_count = 3;

struct monte_carlo_case {
    int n_amplifiers = 1;
    amplifier_params amp;  ///< nominal
    double beta_a = 0.0;
    double beta_b = 0.0;
};

struct monte_carlo_config {
    std::uint64_t seed = 1;
    int samples = 100;
    double spread = 0.05;
    frequency_grid grid;
    unsigned threads = 1;
};

using gain_triple = std::array<double, system_count>;

struct monte_carlo_sample {
    int index = 0;
    double r = 0.0;        ///< uniform draw on [-1, 1)
    double epsilon = 0.0;  ///< (1 + spread r) epsilon_nominal
    bool unstable = false;
    std::vector<gain_triple> gain_db;  ///< per evaluation frequency
};

struct spread_stats {
    double min;
    double max;
    double stddev;  ///< population standard deviation over samples
};

struct monte_carlo_result {
    std::vector<double> omegas;  ///< 0 followed by the grid
    std::vector<gain_triple> nominal_db;
    std::vector<monte_carlo_sample> samples;
    std::vector<std::array<spread_stats, system_count>> stats;

    /// Index into omegas of the nominal type-B gain maximum over the grid.
    std::size_t peak_index() const {
        std::size_t best = 1;
        for (std::size_t i = 1; i < nominal_db.size(); ++i)
            if (nominal_db[i][type_b] > nominal_db[best][type_b]) best = i;
        return best;
    }
};

inline double gain_db(const two_port_complex& m) { return 20.0 * std::log10(std::abs(m.m11)); }

/// Gains of the three systems for one amplifier parameter set.
inline gain_triple evaluate_gains(const monte_carlo_case& mc, const amplifier_params& amp, double omega) {
    const two_port_complex g = ndpa_response(amp, omega);
    const two_port_complex bare = cascade(g, mc.n_amplifiers);
    const auto ka = beam_splitter(controller_params{mc.beta_a});
    const auto kb = beam_splitter(controller_params{mc.beta_b});
    return {gain_db(bare), gain_db(cascade(close_feedback(g, ka), mc.n_amplifiers)), gain_db(close_feedback(bare, kb))};
}

inline bool sample_unstable(const monte_carlo_case& mc, const amplifier_params& amp, const frequency_grid& grid) {
    if (!amp.stable() || !type_a_stable(amp.x(), mc.beta_a)) return true;
    try {
        return !nyquist(open_loop_type_b(amp, mc.n_amplifiers, mc.beta_b), grid).stable;
    } catch (const error&) {
        return true;
    }
}

/// epsilon' = (1 + spread r_i) epsilon with r_i ~ U[-1, 1) from
/// sample_engine(seed, i). Sample results do not depend on `threads`.
inline monte_carlo_result monte_carlo(const monte_carlo_case& mc, const monte_carlo_config& cfg) {
    if (cfg.samples < 1) throw invalid_parameter("monte_carlo: samples must be >= 1");
    if (!(cfg.spread >= 0.0 && cfg.spread < 1.0)) throw invalid_parameter("monte_carlo: spread must be in [0, 1)");

    monte_carlo_result res;
    res.omegas.push_back(0.0);
    for (double w : cfg.grid.omegas()) res.omegas.push_back(w);

    for (double w : res.omegas) res.nominal_db.push_back(evaluate_gains(mc, mc.amp, w));

    res.samples.resize(static_cast<std::size_t>(cfg.samples));
    auto run_sample = [&](int i) {
        monte_carlo_sample& s = res.samples[static_cast<std::size_t>(i)];
        auto eng = sample_engine(cfg.seed, static_cast<std::uint64_t>(i));
        s.index = i;
        s.r = uniform_pm1(eng);
        amplifier_params amp = mc.amp;
        amp.epsilon = (1.0 + cfg.spread * s.r) * mc.amp.epsilon;
        s.epsilon = amp.epsilon;
        s.unstable = sample_unstable(mc, amp, cfg.grid);
        s.gain_db.reserve(res.omegas.size());
        for (double w : res.omegas) {
            try {
                s.gain_db.push_back(evaluate_gains(mc, amp, w));
            } catch (const error&) {
                constexpr double nan = std::numeric_limits<double>::quiet_NaN();
                s.gain_db.push_back({nan, nan, nan});
                s.unstable = true;
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.samples)));
    if (threads == 1) {
        for (int i = 0; i < cfg.samples; ++i) run_sample(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (int i = static_cast<int>(t); i < cfg.samples; i += static_cast<int>(threads)) run_sample(i);
            });
    }

    res.stats.resize(res.omegas.size());
    for (std::size_t f = 0; f < res.omegas.size(); ++f) {
        for (std::size_t sys = 0; sys < system_count; ++sys) {
            // Shifted by the first sample so identical samples give exactly 0.
            const double shift = res.samples.front().gain_db[f][sys];
            double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
            for (const auto& s : res.samples) {
                const double v = s.gain_db[f][sys];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v - shift;
            }
            const double mean = sum / cfg.samples;
            double ss = 0.0;
            for (const auto& s : res.samples) {
                const double d = s.gain_db[f][sys] - shift - mean;
                ss += d * d;
            }
            res.stats[f][sys] = {lo, hi, std::sqrt(ss / cfg.samples)};
        }
    }
    return res;
}

}  // namespace qfa
