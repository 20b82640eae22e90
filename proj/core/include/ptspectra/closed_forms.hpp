#pragma once

#include <cstddef>
#include <utility>

#include "ptspectra/dense_matrix.hpp"

namespace ptspectra {

// Two real levels coupled by a purely imaginary off-diagonal:
// [[e1, i*eps], [i*eps, e2]].
struct TwoLevelGainCoupling {
    double e1;
    double e2;
    double eps;
};

// Balanced gain/loss detuning with real coupling: [[e + i*eps, b], [b, e - i*eps]].
struct TwoLevelDetuned {
    double e;
    double b;
    double eps;
};

// Pair of oscillator frequencies with a bilinear coupling strength.
struct OscillatorPair {
    double omega1;
    double omega2;
    double eps;
};

// Closed-form eigenvalues (e1+e2)/2 +- (1/2)sqrt((e1-e2)^2 - 4 eps^2).
// Principal branch: beyond threshold the "+" slot carries positive imaginary
// part. Real pair iff |eps| <= |e1-e2|/2.
std::pair<Complex, Complex> eig_gain_coupling(const TwoLevelGainCoupling& m);

// Reality threshold |e1-e2|/2.
double threshold_gain_coupling(const TwoLevelGainCoupling& m);

// Closed-form eigenvalues e +- sqrt(b^2 - eps^2); real pair iff |eps| <= |b|.
std::pair<Complex, Complex> eig_detuned(const TwoLevelDetuned& m);

// Reality threshold |b|.
double threshold_detuned(const TwoLevelDetuned& m);

// lambda_pm(eps) = (w1^2 + w2^2) +- sqrt((w1^2 - w2^2)^2 - eps^2); real iff
// |eps| <= |w1^2 - w2^2|. Requires omega1, omega2 > 0.
std::pair<Complex, Complex> classical_lambda_pm(const OscillatorPair& p);

// Normal-mode angular frequencies Omega_pm = sqrt(2 lambda_pm) in the
// H = p^2 + w^2 x^2 convention (single-oscillator frequency 2w at eps=0).
std::pair<Complex, Complex> classical_normal_frequencies(const OscillatorPair& p);

// Quantum level of the r=s=1 coupled-oscillator family in the dimensionally
// consistent normal-mode form E = (2 n1 + 1) sqrt(lambda_+/2)
// + (2 n2 + 1) sqrt(lambda_-/2); reduces to
// (2 n1 + 1) max(w1,w2) + (2 n2 + 1) min(w1,w2) at eps=0.
// Requires omega1 != omega2 (unambiguous mode labels).
Complex quantum_levels_r1s1(const OscillatorPair& p, std::size_t n1, std::size_t n2);

// The assembled 2x2 matrices (for feeding the numerical eigensolver).
DenseMatrix assemble_gain_coupling(const TwoLevelGainCoupling& m);
DenseMatrix assemble_detuned(const TwoLevelDetuned& m);

} // namespace ptspectra
