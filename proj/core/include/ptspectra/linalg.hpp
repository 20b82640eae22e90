#pragma once

#include <vector>

#include "ptspectra/dense_matrix.hpp"

namespace ptspectra {

// Multiset of complex eigenvalues; residuals, when non-empty, align 1:1 with
// eigenvalues (backward-error proxies from eigen_residual).
struct Spectrum {
    std::vector<Complex> eigenvalues;
    std::vector<double> residuals;
};

// Unitary similarity reduction to upper Hessenberg form by Householder
// reflections. Entries below the first subdiagonal of the result are exactly
// zero. Throws std::invalid_argument for non-square input.
DenseMatrix hessenberg_reduce(const DenseMatrix& a);

// All eigenvalues (with multiplicity) by Hessenberg reduction followed by
// implicit single-shift (Wilkinson) QR with deflation. Deflation threshold:
// |h(i+1,i)| <= 1e-14 * (|h(i,i)| + |h(i+1,i+1)|), falling back to
// 1e-14 * ||H||_F when that sum vanishes. At most 40 iterations per
// eigenvalue (exceptional perturbed shifts every 10 stalled iterations);
// exceeding the cap throws NonConvergence. Deterministic for fixed input.
// Residuals are not filled (use eigen_residual on demand).
Spectrum eigenvalues(const DenseMatrix& a);

// Backward-error proxy for a candidate eigenvalue: the smallest singular
// value of (A - lambda*I), estimated by a few steps of inverse iteration on
// (A-lambda*I)^H (A-lambda*I) via an LU factorization, normalized by the
// Frobenius norm of A.
double eigen_residual(const DenseMatrix& a, Complex lambda);

// Determinant via LU with partial pivoting.
Complex lu_determinant(const DenseMatrix& a);

// Distance between two eigenvalue multisets under greedy minimal-distance
// matching (globally smallest pair first). Returns the largest matched pair
// distance. O(n^2 log n) time and O(n^2) memory, intended for validation on
// spectra of moderate size. Throws std::invalid_argument on size mismatch.
double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b);

// Conjugation-closure defect: multiset distance between {lambda} and
// {conj(lambda)}; zero (to roundoff) for PT-symmetric spectra.
double conjugation_closure_defect(const std::vector<Complex>& eigs);

// Eigenvalues of a 2x2 matrix [[a,b],[c,d]] by the stable closed-form
// quadratic; the first returned value takes the principal-branch "+" root.
std::pair<Complex, Complex> eig2x2(Complex a, Complex b, Complex c, Complex d);

} // namespace ptspectra
