#pragma once

// Real-coefficient polynomials and rational functions in the Laplace
// variable s, evaluated at complex points.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfa/errors.hpp"

namespace qfa {

using complex = std::complex<double>;

/// Relative magnitude below which an add/sub result coefficient counts as
/// cancellation residue.
inline constexpr double cancellation_tolerance = 1e-12;

/// Default absolute floor for |den(z)| before evaluation reports a pole.
inline constexpr double default_pole_floor = 1e-300;

/// Polynomial with real coefficients in ascending degree. coeffs()[k]
/// multiplies s^k. The zero polynomial has no coefficients.
class polynomial {
public:
    polynomial() = default;
    polynomial(std::initializer_list<double> c) : coeffs_(c) { strip_zeros(); }
    explicit polynomial(std::vector<double> c) : coeffs_(std::move(c)) { strip_zeros(); }

    static polynomial constant(double c) { return polynomial({c}); }

    std::span<const double> coeffs() const noexcept { return coeffs_; }

    /// -1 for the zero polynomial.
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const noexcept { return coeffs_.empty(); }

    double operator[](std::size_t k) const noexcept {
        return k < coeffs_.size() ? coeffs_[k] : 0.0;
    }

    /// Horner evaluation; Arg is double or std::complex<double>.
    template <class Arg>
    Arg operator()(const Arg& z) const {
        Arg acc{0.0};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + Arg{*it};
        return acc;
    }

    polynomial operator-() const {
        polynomial r = *this;
        for (double& c : r.coeffs_) c = -c;
        return r;
    }

    friend polynomial operator+(const polynomial& p, const polynomial& q) {
        return combine(p, q, 1.0);
    }
    friend polynomial operator-(const polynomial& p, const polynomial& q) {
        return combine(p, q, -1.0);
    }

    friend polynomial operator*(const polynomial& p, const polynomial& q) {
        if (p.is_zero() || q.is_zero()) return {};
        std::vector<double> out(p.coeffs_.size() + q.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < q.coeffs_.size(); ++j) out[i + j] += p.coeffs_[i] * q.coeffs_[j];
        polynomial r;
        r.coeffs_ = std::move(out);
        return r;
    }

    friend polynomial operator*(double a, const polynomial& p) { return polynomial::constant(a) * p; }

    friend bool operator==(const polynomial&, const polynomial&) = default;

private:
    void strip_zeros() {
        while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
    }

    // Strips trailing coefficients that are exact zeros or cancellation
    // residue relative to the operand coefficients of the same degree.
    static polynomial combine(const polynomial& p, const polynomial& q, double sign) {
        const std::size_t n = std::max(p.coeffs_.size(), q.coeffs_.size());
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = p[k] + sign * q[k];
        std::size_t k = n;
        while (k > 0) {
            const double scale = std::max(std::abs(p[k - 1]), std::abs(q[k - 1]));
            if (std::abs(out[k - 1]) > cancellation_tolerance * scale) break;
            --k;
        }
        out.resize(k);
        polynomial r;
        r.coeffs_ = std::move(out);
        return r;
    }

    std::vector<double> coeffs_;
};

inline polynomial poly_add(const polynomial& p, const polynomial& q) { return p + q; }
inline polynomial poly_mul(const polynomial& p, const polynomial& q) { return p * q; }

/// Ratio of two polynomials; the denominator is never the zero polynomial.
/// No common-factor reduction is performed.
class rational {
public:
    rational() : num_(), den_(polynomial::constant(1.0)) {}
    rational(double c) : num_(polynomial::constant(c)), den_(polynomial::constant(1.0)) {}  // NOLINT
    rational(polynomial num, polynomial den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw division_by_zero_rational("rational: zero denominator polynomial");
    }

    const polynomial& num() const noexcept { return num_; }
    const polynomial& den() const noexcept { return den_; }

    bool is_identically_zero() const noexcept { return num_.is_zero(); }

    complex eval(complex z, double pole_floor = default_pole_floor) const {
        const complex d = den_(z);
        if (!(std::abs(d) >= pole_floor))
            throw pole_at_point("rational: evaluation at a pole, |den(z)| = " + std::to_string(std::abs(d)));
        return num_(z) / d;
    }

    complex operator()(complex z) const { return eval(z); }

    rational operator-() const { return {-num_, den_}; }

    friend rational operator+(const rational& a, const rational& b) {
        if (a.den_ == b.den_) return {a.num_ + b.num_, a.den_};
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend rational operator-(const rational& a, const rational& b) { return a + (-b); }
    friend rational operator*(const rational& a, const rational& b) {
        return {a.num_ * b.num_, a.den_ * b.den_};
    }
    friend rational operator/(const rational& a, const rational& b) {
        if (b.num_.is_zero()) throw division_by_zero_rational("rational: division by the zero rational");
        return {a.num_ * b.den_, a.den_ * b.num_};
    }

private:
    polynomial num_;
    polynomial den_;
};

inline complex rat_eval(const rational& r, complex z, double pole_floor = default_pole_floor) {
    return r.eval(z, pole_floor);
}
inline rational rat_add(const rational& a, const rational& b) { return a + b; }
inline rational rat_mul(const rational& a, const rational& b) { return a * b; }
inline rational rat_div(const rational& a, const rational& b) { return a / b; }

/// Roots of a s^2 + b s + c using the cancellation-free form.
inline std::pair<complex, complex> quadratic_roots(double a, double b, double c) {
    if (a == 0.0) throw degenerate_quadratic("quadratic_roots: leading coefficient is zero");
    const complex sq = std::sqrt(complex{b * b - 4.0 * a * c, 0.0});
    const complex bb{b, 0.0};
    const complex q = -0.5 * (std::abs(bb + sq) >= std::abs(bb - sq) ? bb + sq : bb - sq);
    if (q == complex{0.0, 0.0}) return {complex{0.0}, complex{0.0}};
    return {q / a, complex{c, 0.0} / q};
}

}  // namespace qfa
