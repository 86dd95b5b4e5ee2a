#include "lpool/geig.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace lpool {

namespace {

void check_inputs(const Matrix& A, const Matrix& B, const Vector& C_diag,
                  double alpha, double ridge) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || B.cols() != n || C_diag.size() != n)
        throw error(errkind::dimension_mismatch,
                    "A, B and C diagonal must share one dimension");
    if (alpha < 0.0)
        throw error(errkind::usage, "alpha must be non-negative");
    if (ridge < 0.0)
        throw error(errkind::usage, "ridge must be non-negative");
}

Matrix shifted_metric(const Matrix& B, const Vector& C_diag, double alpha,
                      double ridge) {
    Matrix bstar = B;
    bstar.diagonal() += alpha * C_diag;
    bstar.diagonal().array() += ridge;
    return bstar;
}

} // namespace

void canonicalize_sign(Vector& p) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double a = std::abs(p[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    if (best_abs > 0.0 && p[best] < 0.0) p = -p;
}

GeigSolution top_k_geig(const Matrix& A, const Matrix& B, const Vector& C_diag,
                        double alpha, double ridge, int k) {
    check_inputs(A, B, C_diag, alpha, ridge);
    if (k != 1 && k != 2)
        throw error(errkind::usage, "k must be 1 or 2, got " + std::to_string(k));
    if (k > A.rows())
        throw error(errkind::usage, "k exceeds problem dimension");

    const Matrix bstar = shifted_metric(B, C_diag, alpha, ridge);
    Eigen::LLT<Matrix> llt(bstar);
    if (llt.info() != Eigen::Success)
        throw error(errkind::not_positive_definite,
                    "B + alpha*C + ridge*I is not positive definite");
    const auto l = llt.matrixL();

    // Whitened problem: W = L^-1 A L^-T is symmetric with the same spectrum.
    Matrix y = l.solve(A);
    const Matrix yt = y.transpose();
    const Matrix w = l.solve(yt);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(w);
    if (eig.info() != Eigen::Success)
        throw error(errkind::numeric, "symmetric eigendecomposition failed");

    const Eigen::Index n = A.rows();
    GeigSolution out;
    out.eigenvectors = Matrix(n, k);
    out.eigenvalues = Vector(k);
    out.residuals = Vector(k);
    for (int r = 0; r < k; ++r) {
        // eigenvalues() is ascending; take from the top.
        const Eigen::Index src = n - 1 - r;
        out.eigenvalues[r] = eig.eigenvalues()[src];
        Vector p = l.transpose().solve(eig.eigenvectors().col(src));
        p /= p.norm();
        canonicalize_sign(p);
        out.eigenvectors.col(r) = p;
        out.residuals[r] = (A * p - out.eigenvalues[r] * (bstar * p)).norm();
    }
    return out;
}

double kkt_residual(const Vector& p, double lambda, const Matrix& A,
                    const Matrix& B, const Vector& C_diag, double alpha,
                    double ridge) {
    check_inputs(A, B, C_diag, alpha, ridge);
    if (p.size() != A.rows())
        throw error(errkind::dimension_mismatch, "p length does not match A");
    const Matrix bstar = shifted_metric(B, C_diag, alpha, ridge);
    return (A * p - lambda * (bstar * p)).norm();
}

double default_ridge(const Matrix& B, const Vector& C_diag, double alpha) {
    const double tr = B.trace() + alpha * C_diag.sum();
    return 1e-9 * tr / static_cast<double>(B.rows());
}

} // namespace lpool
