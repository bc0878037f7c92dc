#pragma once

// Dense small-matrix kernels used by the retractions. All matrices are
// Eigen's column-major MatrixXd; every kernel is a pure function.

#include <Eigen/Dense>

namespace ssvrg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct QrFactors {
  Matrix Q;  // d x r, orthonormal columns
  Matrix R;  // r x r, upper triangular with positive diagonal
};

/// Thin QR with the positive-diagonal convention that makes the factors
/// unique. Throws RankDeficient when a diagonal entry of R falls below
/// 1e-12 * ||A||_F.
QrFactors qr_positive(const Matrix& A);

/// Nearest matrix with orthonormal columns, U V^T from the compact SVD.
/// Throws RankDeficient if sigma_min <= 1e-12 sigma_max.
Matrix polar_project(const Matrix& A);

/// Same projection through A (A^T A)^{-1/2}. Only valid for full column rank.
Matrix polar_via_gram(const Matrix& A);

/// S^{-1/2} for symmetric positive definite S (symmetrized first).
Matrix inv_sqrt_spd(const Matrix& S);

/// S^{1/2} for symmetric positive semidefinite S.
Matrix sqrt_psd(const Matrix& S);

/// Matrix exponential: scaling and squaring with the degree-13 diagonal
/// Pade approximant, scaled by the 1-norm.
Matrix expm(const Matrix& A);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix, eigenvalues
/// below 1e-12 * lambda_max are treated as zero.
Matrix pinv_gram(const Matrix& G);

inline Matrix skew(const Matrix& A) { return 0.5 * (A - A.transpose()); }
inline Matrix sym(const Matrix& A) { return 0.5 * (A + A.transpose()); }

/// Frobenius inner product.
inline double frob_inner(const Matrix& A, const Matrix& B) {
  return (A.array() * B.array()).sum();
}

/// ||A^T A - I||_F
double orthonormality_error(const Matrix& A);

bool all_finite(const Matrix& A);

}  // namespace ssvrg
