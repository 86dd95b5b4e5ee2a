#pragma once

#include "lpool/fmap.hpp"

namespace lpool {

// Top-k solutions of A p = lambda (B + alpha*diag(C) + ridge*I) p.
struct GeigSolution {
    Matrix eigenvectors;  // N x k, unit Euclidean norm columns
    Vector eigenvalues;   // k, sorted descending
    Vector residuals;     // k, ||A p - lambda Bstar p||_2
};

// Solves the regularized generalized eigenproblem via the symmetric
// reduction: factor Bstar = L L^T, eigendecompose L^-1 A L^-T, map back
// through L^-T. k is 1 or 2. Sign convention: the entry of largest absolute
// value is positive, ties broken by lowest index.
GeigSolution top_k_geig(const Matrix& A, const Matrix& B, const Vector& C_diag,
                        double alpha, double ridge, int k);

// Stationarity residual ||A p - lambda (B + alpha*diag(C) + ridge*I) p||_2.
double kkt_residual(const Vector& p, double lambda, const Matrix& A,
                    const Matrix& B, const Vector& C_diag, double alpha,
                    double ridge);

// Default ridge when none is configured: 1e-9 * trace(B + alpha*diag(C)) / N.
double default_ridge(const Matrix& B, const Vector& C_diag, double alpha);

// Applies the shared sign convention in place; no-op for the zero vector.
void canonicalize_sign(Vector& p);

} // namespace lpool
