#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ptspectra/dense_matrix.hpp"
#include "ptspectra/oscillator_basis.hpp"

namespace ptspectra {

// Two coupled oscillators with bilinear-power coupling i*eps*x1^r x2^s.
// (r, s) must not both be even (no parity operator anticommutes with the
// coupling otherwise).
struct ModelH2 {
    double omega1 = 1.0;
    double omega2 = 1.0;
    unsigned r = 1;
    unsigned s = 1;
};

// The one-dimensional x^2 (i x)^eps family; fully fixed by eps at build time.
struct ModelH3 {};

// Dense truncation of a PT-symmetric Hamiltonian together with the basis
// metadata needed to reconstruct kinetic/parity structure.
struct TruncatedHamiltonian {
    DenseMatrix matrix;
    std::vector<int> parity;      // +-1 per basis vector (diagonal involution)
    std::vector<BasisSpec> basis; // one spec (H3) or two (H2, outer x1 factor first)
    std::string model_tag;        // "h2" or "h3"
    double eps = 0.0;
    bool resonance_warning = false; // H2 only: omega1/omega2 near rational with denominator <= 64
};

// Rational-dependence test on omega1/omega2 up to denominator 64: true when
// the ratio is within 1e-9 (relative) of some p/q with q <= 64, i.e. the
// non-resonance assumption is doubtful and unperturbed levels may be
// (near-)degenerate.
bool h2_resonance_warning(double omega1, double omega2);

// (N1*N2) x (N1*N2) truncation of H2(eps): diagonal
// (2n1+1) w1 + (2n2+1) w2 plus i*eps*(X1^r (x) X2^s) with exact padded
// monomial blocks. Basis index = n1*N2 + n2. Parity vector: (-1)^{n1} when r
// is odd (including r,s both odd: deterministic tie-break), else (-1)^{n2}.
TruncatedHamiltonian build_h2(const ModelH2& m, double eps, std::size_t n1, std::size_t n2);

// N x N truncation of H3(eps) = p^2 + cos(pi eps/2)|x|^{2+eps}
// + i sign(x) sin(pi eps/2)|x|^{2+eps} in the omega=1 basis, assembled as
// diag(2n+1) - X^2 + potential so that eps=0 yields exactly diag(2n+1).
// Requires -1 < eps < 1. quad_order 0 selects the default (4N).
TruncatedHamiltonian build_h3(double eps, std::size_t n, std::size_t quad_order = 0);

// Finite-dimensional form-positivity check (condition (2) analogue with
// gamma=0, a=1, b=0): smallest eigenvalue of Herm(M) - Kinetic, where the
// kinetic matrix is reconstructed from the basis metadata. Defined for the
// "h2" and "h3" models (2x2 closed-form models carry no kinetic term).
double form_positivity_gap(const TruncatedHamiltonian& h);

// Max-norm of P conj(M) P - M for a diagonal parity involution P.
double pt_defect(const DenseMatrix& m, const std::vector<int>& parity);
double pt_defect(const TruncatedHamiltonian& h);

} // namespace ptspectra
