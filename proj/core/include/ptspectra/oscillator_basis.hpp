#pragma once

#include <cstddef>
#include <vector>

#include "ptspectra/dense_matrix.hpp"

namespace ptspectra {

// Harmonic-oscillator eigenbasis phi_0..phi_{N-1} at frequency omega
// (convention H = p^2 + omega^2 x^2, eigenvalues (2n+1) omega).
struct BasisSpec {
    double frequency = 1.0;
    std::size_t size = 1;
};

// Symmetric Gaussian quadrature rule on the real line (nodes strictly
// increasing, symmetric about 0; positive symmetric weights).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Half-line rule for integrals against t^alpha e^{-t} dt on (0, inf), with
// weights carried in scaled form sw_i = w_i * e^{t_i} (safe against
// underflow at large order). Sum_i sw_i e^{-t_i} p(t_i) is exact for
// polynomials p of degree <= 2n-1.
struct HalflineRule {
    std::vector<double> t;
    std::vector<double> scaled_weights;
};

// n-point Gauss-Hermite rule: exact for integrals of p(x) e^{-x^2} with
// deg p <= 2n-1; weights sum to sqrt(pi). Built by Golub-Welsch on the
// Hermite Jacobi matrix; nodes/weights symmetrized exactly.
QuadratureRule gauss_hermite(std::size_t n);

// n-point generalized Gauss-Laguerre rule for weight t^alpha e^{-t}
// (alpha > -1), weights in scaled form (see HalflineRule).
HalflineRule scaled_gauss_laguerre(std::size_t n, double alpha);

// Oscillator eigenfunctions phi_0(x)..phi_{nmax-1}(x) at omega=1
// (orthonormal, phi_0 = pi^{-1/4} e^{-x^2/2}), by the stable
// Hermite-function recurrence.
std::vector<double> hermite_functions(std::size_t nmax, double x);

// <phi_m | x | phi_n>: tridiagonal, entry (n, n+1) = sqrt((n+1)/(2 omega)).
DenseMatrix position_matrix(const BasisSpec& b);

// <phi_m | x^r | phi_n>, r >= 1: computed exactly by powering the position
// matrix built at padded size N+r and truncating; banded with bandwidth r;
// entries with m - n != r (mod 2) are exactly zero.
DenseMatrix monomial_matrix(const BasisSpec& b, unsigned r);

// <phi_m | |x|^s | phi_n>, s > 0: real symmetric; entries of opposite parity
// are exactly zero; even-parity entries by half-line quadrature (t = x^2,
// weight t^{(s-1)/2} e^{-t}, which makes the integrand a polynomial).
// quad_order is the starting order (0 selects the default 4N); the order is
// doubled until no requested entry changes by more than 1e-10, capped at
// 64N (NonConvergence beyond). Basis sizes above 600 are rejected: beyond
// that the tail eigenvector components underflow inside the classically
// allowed region and the rule would silently lose mass.
DenseMatrix abs_power_matrix(const BasisSpec& b, double s, std::size_t quad_order = 0);

// <phi_m | sign(x) |x|^s | phi_n>: real symmetric; entries of equal parity
// are exactly zero; odd-parity entries by the analogous half-line rule with
// weight t^{s/2} e^{-t}. Same stabilization contract as abs_power_matrix.
DenseMatrix signed_abs_power_matrix(const BasisSpec& b, double s, std::size_t quad_order = 0);

// <phi_m | p^2 | phi_n> = diag((2n+1) omega) - omega^2 * (x^2 matrix), with
// the x^2 matrix exact via padded squaring.
DenseMatrix momentum_squared_matrix(const BasisSpec& b);

// Stabilization tolerance of the half-line quadrature (documented contract).
inline constexpr double quadrature_stabilization_tol = 1e-10;

} // namespace ptspectra
