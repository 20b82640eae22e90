#include "ptspectra/closed_forms.hpp"

#include <cmath>
#include <stdexcept>

namespace ptspectra {

namespace {

void check_finite(double v, const char* who) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite parameter");
}

void check_pair(const OscillatorPair& p, const char* who) {
    check_finite(p.omega1, who);
    check_finite(p.omega2, who);
    check_finite(p.eps, who);
    if (p.omega1 <= 0.0 || p.omega2 <= 0.0)
        throw std::invalid_argument(std::string(who) + ": frequencies must be positive");
}

// sqrt(radicand) as a complex number, principal branch: for radicand >= 0 the
// result is the nonnegative real root; for radicand < 0 it is +i sqrt(-radicand),
// so the "+" eigenvalue slot carries positive imaginary part beyond threshold.
Complex branch_sqrt(double radicand) {
    if (radicand >= 0.0) return Complex(std::sqrt(radicand), 0.0);
    return Complex(0.0, std::sqrt(-radicand));
}

} // namespace

std::pair<Complex, Complex> eig_gain_coupling(const TwoLevelGainCoupling& m) {
    check_finite(m.e1, "eig_gain_coupling");
    check_finite(m.e2, "eig_gain_coupling");
    check_finite(m.eps, "eig_gain_coupling");
    const double mean = 0.5 * (m.e1 + m.e2);
    const double d = m.e1 - m.e2;
    const Complex root = 0.5 * branch_sqrt(d * d - 4.0 * m.eps * m.eps);
    return {mean + root, mean - root};
}

double threshold_gain_coupling(const TwoLevelGainCoupling& m) {
    return 0.5 * std::abs(m.e1 - m.e2);
}

std::pair<Complex, Complex> eig_detuned(const TwoLevelDetuned& m) {
    check_finite(m.e, "eig_detuned");
    check_finite(m.b, "eig_detuned");
    check_finite(m.eps, "eig_detuned");
    const Complex root = branch_sqrt(m.b * m.b - m.eps * m.eps);
    return {Complex(m.e, 0.0) + root, Complex(m.e, 0.0) - root};
}

double threshold_detuned(const TwoLevelDetuned& m) { return std::abs(m.b); }

std::pair<Complex, Complex> classical_lambda_pm(const OscillatorPair& p) {
    check_pair(p, "classical_lambda_pm");
    const double s = p.omega1 * p.omega1 + p.omega2 * p.omega2;
    const double d = p.omega1 * p.omega1 - p.omega2 * p.omega2;
    const Complex root = branch_sqrt(d * d - p.eps * p.eps);
    return {Complex(s, 0.0) + root, Complex(s, 0.0) - root};
}

std::pair<Complex, Complex> classical_normal_frequencies(const OscillatorPair& p) {
    const auto [lp, lm] = classical_lambda_pm(p);
    return {std::sqrt(2.0 * lp), std::sqrt(2.0 * lm)};
}

Complex quantum_levels_r1s1(const OscillatorPair& p, std::size_t n1, std::size_t n2) {
    if (p.omega1 == p.omega2)
        throw std::invalid_argument("quantum_levels_r1s1: resonant pair (omega1 == omega2)");
    const auto [lp, lm] = classical_lambda_pm(p);
    const double k1 = 2.0 * static_cast<double>(n1) + 1.0;
    const double k2 = 2.0 * static_cast<double>(n2) + 1.0;
    return k1 * std::sqrt(0.5 * lp) + k2 * std::sqrt(0.5 * lm);
}

DenseMatrix assemble_gain_coupling(const TwoLevelGainCoupling& m) {
    return DenseMatrix{{Complex(m.e1, 0.0), Complex(0.0, m.eps)},
                       {Complex(0.0, m.eps), Complex(m.e2, 0.0)}};
}

DenseMatrix assemble_detuned(const TwoLevelDetuned& m) {
    return DenseMatrix{{Complex(m.e, m.eps), Complex(m.b, 0.0)},
                       {Complex(m.b, 0.0), Complex(m.e, -m.eps)}};
}

} // namespace ptspectra
