#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qfa/analysis.hpp"
#include "qfa/network.hpp"
#include "qfa/sensitivity.hpp"

using namespace qfa;

namespace {

constexpr double kappa = 1.8e7;

struct nominal {
    int n;
    double x, beta_a;
};
constexpr nominal cases[] = {{2, 0.90, 0.2}, {2, 0.78, 0.1}, {5, 0.53, 0.07}, {5, 0.393, 0.03}};

std::vector<double> sample_omegas(int n = 100) { return frequency_grid{1e3, 1e10, n, spacing::log}.omegas(); }

double entry_error(const two_port_complex& a, const two_port_complex& b) {
    return std::max({std::abs(a.m11 - b.m11), std::abs(a.m12 - b.m12), std::abs(a.m21 - b.m21),
                     std::abs(a.m22 - b.m22)});
}

}  // namespace

TEST(Params, Derived) {
    const auto amp = amplifier_params::from_x(kappa, 0.9);
    EXPECT_DOUBLE_EQ(amp.epsilon, 0.45 * kappa);
    EXPECT_DOUBLE_EQ(amp.x(), 0.9);
    EXPECT_TRUE(amp.stable());
    EXPECT_FALSE(amplifier_params::from_x(kappa, 1.0).stable());
    EXPECT_THROW((amplifier_params{-1.0, 0.0}.validate()), invalid_parameter);

    for (double b : {-0.99, -0.0412, 0.0, 0.2, 0.9}) {
        const controller_params c{b};
        EXPECT_NEAR(c.alpha() * c.alpha() + b * b, 1.0, 1e-14);
        EXPECT_GT(c.alpha(), 0.0);
    }
    EXPECT_THROW(controller_params{1.0}.validate(), invalid_parameter);
}

TEST(Ndpa, CenterGain) {
    const double x = 0.9;
    const auto g = evaluate(ndpa_transfer(amplifier_params::from_x(kappa, x)), 0.0);
    EXPECT_NEAR(std::abs(g.m11), (1 + x * x) / std::abs(1 - x * x), 1e-12);
    EXPECT_NEAR(std::abs(g.m11), 9.5263, 5e-5);
    EXPECT_EQ(g.m11, g.m22);
    EXPECT_EQ(g.m12, g.m21);
    const center_gain c = ndpa_center(amplifier_params::from_x(kappa, x));
    EXPECT_NEAR(c.g1 * c.g1 - c.g2 * c.g2, 1.0, 1e-12);
}

TEST(Ndpa, PassiveWithoutPump) {
    const auto t = ndpa_transfer({kappa, 0.0});
    EXPECT_TRUE(t.m12.is_identically_zero());
    for (double w : sample_omegas(20)) EXPECT_NEAR(std::abs(t.m11.eval({0.0, w})), 1.0, 1e-12);
}

TEST(Ndpa, CcrAtSelectedFrequencies) {
    const auto t = ndpa_transfer(amplifier_params::from_x(kappa, 0.9));
    for (double w : {0.0, kappa / 10, kappa, 10 * kappa}) {
        const auto g = evaluate(t, {0.0, w});
        EXPECT_NEAR(std::norm(g.m11) - std::norm(g.m12), 1.0, 1e-8) << w;
    }
}

TEST(Ndpa, RationalMatchesPointwise) {
    const auto amp = amplifier_params::from_x(kappa, 0.78);
    const auto t = ndpa_transfer(amp);
    for (double w : sample_omegas(30)) EXPECT_LT(entry_error(evaluate(t, {0.0, w}), ndpa_response(amp, w)), 1e-12);
}

TEST(BeamSplitter, Entries) {
    const auto id = beam_splitter(controller_params{0.0});
    EXPECT_EQ(id.m11, complex(1.0));
    EXPECT_EQ(id.m12, complex(0.0));
    EXPECT_EQ(id.m21, complex(0.0));
    EXPECT_EQ(id.m22, complex(1.0));

    const auto k = beam_splitter(controller_params{0.2});
    EXPECT_NEAR(k.m11.real(), 0.97980, 5e-6);
    EXPECT_DOUBLE_EQ(k.m12.real(), -0.2);
    EXPECT_DOUBLE_EQ(k.m21.real(), 0.2);
    EXPECT_NEAR(controller_params{-0.0412}.alpha(), 0.99915, 5e-6);

    // K^T K = I
    const auto kt = two_port<double>{k.m11.real(), k.m21.real(), k.m12.real(), k.m22.real()};
    const auto kr = beam_splitter<double>(controller_params{0.2});
    const auto p = kt * kr;
    EXPECT_NEAR(p.m11, 1.0, 1e-14);
    EXPECT_NEAR(p.m22, 1.0, 1e-14);
    EXPECT_NEAR(p.m12, 0.0, 1e-14);
    EXPECT_NEAR(p.m21, 0.0, 1e-14);
}

TEST(CloseFeedback, OpenLoopController) {
    const auto g = ndpa_response(amplifier_params::from_x(kappa, 0.6), 3e6);
    const auto fb = close_feedback(g, two_port_complex::identity());
    EXPECT_LT(entry_error(fb, g), 1e-14);
    // beta = 0 beam splitter is exactly the identity.
    const auto fb0 = close_feedback(g, beam_splitter(controller_params{0.0}));
    EXPECT_EQ(fb0.m11, g.m11);
    EXPECT_EQ(fb0.m12, g.m12);
    EXPECT_EQ(fb0.m21, g.m21);
    EXPECT_EQ(fb0.m22, g.m22);
}

TEST(CloseFeedback, SingleAmplifierAtCenter) {
    const auto g = ndpa_response(amplifier_params::from_x(kappa, 0.9), 0.0);
    const auto fb = close_feedback(g, beam_splitter(controller_params{0.2}));
    EXPECT_NEAR(fb.m11.real(), -3.3478260869565217, 1e-12);
    EXPECT_NEAR(fb.m12.real(), -3.1949866210215366, 1e-12);
    EXPECT_NEAR(fb.m11.imag(), 0.0, 1e-15);
    // The closed form used by the center-frequency analysis agrees.
    const auto eig = closed_loop_eigen_pair(ndpa_center(amplifier_params::from_x(kappa, 0.9)), {0.2});
    EXPECT_NEAR(0.5 * (eig.plus + eig.minus), fb.m11.real(), 1e-12);
}

TEST(CloseFeedback, HighGainLimit) {
    // |G11| -> infinity with the CCR-consistent symmetric form G1^2 - G2^2 = 1.
    const controller_params c{0.15};
    const auto k = beam_splitter(c);
    for (double g1 : {1e3, 1e5, 1e7}) {
        const double g2 = -std::sqrt(g1 * g1 - 1.0);
        const two_port_complex g{-g1, g2, g2, -g1};
        const double lim = 1.0 / std::abs(k.m21);
        EXPECT_NEAR(std::abs(close_feedback(g, k).m11), lim, 10.0 / g1 * lim);
    }
}

TEST(CloseFeedback, SymbolicMatchesPointwise) {
    const auto amp = amplifier_params::from_x(kappa, 0.9);
    const controller_params c{0.2};
    const auto sym = close_feedback(ndpa_transfer(amp), beam_splitter<rational>(c));
    for (double w : sample_omegas(40)) {
        const auto pw = close_feedback(ndpa_response(amp, w), beam_splitter(c));
        EXPECT_LT(entry_error(evaluate(sym, {0.0, w}), pw), 1e-9 * std::max(1.0, std::abs(pw.m11))) << w;
    }
}

TEST(CloseFeedback, SymbolicDenominatorIsTypeACharacteristic) {
    const auto amp = amplifier_params::from_x(kappa, 0.9);
    const double b = 0.2;
    const auto g = ndpa_transfer(amp);
    const rational loop = rational(1.0) - g.m22 * rational(b);
    // numerator of 1 - b g1 over D: (1 - b)(characteristic polynomial)
    const polynomial expected = (1.0 - b) * type_a_characteristic(amp, b);
    ASSERT_EQ(loop.num().degree(), 2);
    for (int k = 0; k <= 2; ++k) EXPECT_NEAR(loop.num()[k], expected[k], 1e-9 * std::abs(expected[k]) + 1e-12);
}

TEST(CloseFeedback, SingularClosure) {
    const two_port_complex g{2.0, 0.0, 0.0, 2.0};
    const two_port_complex k{1.0, 0.0, 0.5, 1.0};
    EXPECT_THROW(close_feedback(g, k), singular_closure);

    const two_port_rational gr{rational(2.0), rational(0.0), rational(0.0), rational(2.0)};
    const two_port_rational kr{rational(1.0), rational(0.0), rational(0.5), rational(1.0)};
    EXPECT_THROW(close_feedback(gr, kr), singular_closure);
}

TEST(Cascade, Basics) {
    const auto g = ndpa_response(amplifier_params::from_x(kappa, 0.9), 2e6);
    EXPECT_LT(entry_error(cascade(g, 1), g), 0.0 + 1e-300);
    EXPECT_THROW(cascade(g, 0), invalid_parameter);

    const auto g0 = ndpa_response(amplifier_params::from_x(kappa, 0.9), 0.0);
    const auto m = cascade(g0, 2);
    EXPECT_NEAR(m.m11.real(), 180.50138504155125, 1e-9);
    EXPECT_NEAR(20 * std::log10(m.m11.real()), 45.1, 0.05);

    const auto m5 = cascade(ndpa_response(amplifier_params::from_x(kappa, 0.393), 0.0), 5);
    EXPECT_NEAR(20 * std::log10(std::abs(m5.m11)), 30.0, 0.5);
}

TEST(Cascade, EigenFormMatchesRepeatedProduct) {
    for (const auto& c : cases) {
        const auto amp = amplifier_params::from_x(kappa, c.x);
        for (double w : sample_omegas()) {
            const auto g = ndpa_response(amp, w);
            const auto a = cascade(g, c.n), b = cascade_eigen(g, c.n);
            EXPECT_LT(entry_error(a, b), 1e-9 * std::max(std::abs(a.m11), std::abs(a.m12))) << c.x << " " << w;
        }
    }
}

TEST(Eigen, Pairs) {
    const auto id = eigen_pair(1.0, 0.0);
    EXPECT_EQ(id.plus, 1.0);
    EXPECT_EQ(id.minus, 1.0);

    const center_gain g = ndpa_center(amplifier_params::from_x(kappa, 0.9));
    const auto l = eigen_pair(g.g1, g.g2);
    EXPECT_NEAR(l.plus, -19.0, 1e-12);
    EXPECT_NEAR(l.minus, -0.05263157894736842, 1e-14);
    EXPECT_NEAR(l.plus * l.minus, 1.0, 1e-12);

    const auto lf = closed_loop_eigen_pair(g, {0.2});
    EXPECT_NEAR(lf.plus, -6.542812707978058, 1e-12);
    EXPECT_NEAR(lf.minus, -0.15283946593498509, 1e-13);
    EXPECT_NEAR(lf.plus * lf.minus, 1.0, 1e-12);
}

TEST(Network, SingleAmplifierTopologiesCoincide) {
    const auto amp = amplifier_params::from_x(kappa, 0.7);
    const auto a = build_network({topology::type_a, 1, amp, {0.3}});
    const auto b = build_network({topology::type_b, 1, amp, {0.3}});
    for (double w : sample_omegas(25)) EXPECT_LT(entry_error(a(w), b(w)), 1e-12 * std::abs(a(w).m11));
}

TEST(Network, CaseOneCenterGains) {
    const auto amp = amplifier_params::from_x(kappa, 0.9);
    const auto a = build_network({topology::type_a, 2, amp, {0.2}})(0.0);
    EXPECT_NEAR(a.m11.real(), 21.415879017013233, 1e-9);
    EXPECT_NEAR(20 * std::log10(a.m11.real()), 26.61471809522492, 1e-9);

    const auto b = build_network({topology::type_b, 2, amp, {-0.0412}})(0.0);
    EXPECT_NEAR(std::abs(b.m11) / std::abs(a.m11), 1.0, 1e-3);
}

TEST(Network, NegativeFrequencyIsConjugate) {
    const auto net = build_network({topology::type_b, 5, amplifier_params::from_x(kappa, 0.53), {0.0034}});
    const auto p = net(1.3e6), m = net(-1.3e6);
    EXPECT_EQ(m.m11, std::conj(p.m11));
    EXPECT_EQ(m.m22, std::conj(p.m22));
}

TEST(Network, ValidatesSpec) {
    EXPECT_THROW(build_network({topology::type_a, 0, amplifier_params::from_x(kappa, 0.5), {0.1}}), invalid_parameter);
    EXPECT_THROW(build_network({topology::type_a, 2, amplifier_params::from_x(kappa, 0.5), {1.1}}), invalid_parameter);
}

TEST(Ccr, Residuals) {
    const auto r0 = ccr_residuals(two_port_complex::identity());
    EXPECT_EQ(r0.signal, 0.0);
    EXPECT_EQ(r0.idler, 0.0);
    EXPECT_EQ(r0.cross, 0.0);

    const auto amp = amplifier_params::from_x(kappa, 0.9);
    for (double w : sample_omegas()) EXPECT_LT(ccr_residuals(ndpa_response(amp, w)).max_abs(), 1e-8);

    const double bb = calibrate_beta_b({0.9, 0.2, 2});
    const auto net = build_network({topology::type_b, 2, amp, {bb}});
    EXPECT_LT(ccr_residuals(net(kappa / 10)).max_abs(), 1e-6);
}

TEST(Ccr, PreservedByClosureWithUnitaryController) {
    for (const auto& c : cases) {
        const auto amp = amplifier_params::from_x(kappa, c.x);
        const double bb = calibrate_beta_b({c.x, c.beta_a, c.n});
        for (auto [kind, beta] : {std::pair{topology::type_a, c.beta_a}, std::pair{topology::type_b, bb}}) {
            const auto net = build_network({kind, c.n, amp, {beta}});
            for (double w : sample_omegas()) EXPECT_LT(ccr_residuals(net(w)).max_abs(), 1e-6) << c.x << " " << w;
        }
    }
}

TEST(Ccr, CenterDeterminantIsOne) {
    for (const auto& c : cases) {
        const auto g = ndpa_response(amplifier_params::from_x(kappa, c.x), 0.0);
        EXPECT_NEAR(g.det().real(), 1.0, 1e-10);
        const auto fb = close_feedback(g, beam_splitter(controller_params{c.beta_a}));
        EXPECT_NEAR(fb.det().real(), 1.0, 1e-10);
    }
}

TEST(Chain, PerturbedMemberOrderIrrelevantAtCenter) {
    const auto amp = amplifier_params::from_x(kappa, 0.53);
    auto alt = amp;
    alt.epsilon *= 1.01;
    const auto k = beam_splitter(controller_params{0.07});
    for (auto kind : {topology::type_a, topology::type_b}) {
        std::vector<two_port_complex> first(5, ndpa_response(amp, 0.0)), last = first;
        first[0] = ndpa_response(alt, 0.0);
        last[4] = ndpa_response(alt, 0.0);
        const double a = evaluate_chain(kind, first, k).m11.real(), b = evaluate_chain(kind, last, k).m11.real();
        EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
    }
}
