#include "ssvrg/linalg.hpp"

#include <cmath>

#include "ssvrg/error.hpp"

namespace ssvrg {

namespace {

void require_finite(const Matrix& A, const char* where) {
  if (!all_finite(A)) {
    throw Error(ErrorCode::NonFiniteValue, std::string(where) + ": non-finite input");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> symmetric_eig(const Matrix& S, const char* where) {
  if (S.rows() != S.cols()) {
    throw Error(ErrorCode::InvalidArgument, std::string(where) + ": matrix is not square");
  }
  require_finite(S, where);
  Matrix Ssym = sym(S);
  return Eigen::SelfAdjointEigenSolver<Matrix>(Ssym);
}

}  // namespace

bool all_finite(const Matrix& A) { return A.allFinite(); }

double orthonormality_error(const Matrix& A) {
  return (A.transpose() * A - Matrix::Identity(A.cols(), A.cols())).norm();
}

QrFactors qr_positive(const Matrix& A) {
  require_finite(A, "qr_positive");
  const Index d = A.rows();
  const Index r = A.cols();
  if (d < r) {
    throw Error(ErrorCode::InvalidArgument, "qr_positive: more columns than rows");
  }
  Eigen::HouseholderQR<Matrix> qr(A);
  QrFactors out;
  out.R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  out.Q = qr.householderQ() * Matrix::Identity(d, r);

  const double floor = 1e-12 * A.norm();
  for (Index j = 0; j < r; ++j) {
    if (std::abs(out.R(j, j)) <= floor) {
      throw Error(ErrorCode::RankDeficient, "qr_positive: R(" + std::to_string(j) +
                                                "," + std::to_string(j) + ") below threshold");
    }
    if (out.R(j, j) < 0.0) {
      out.R.row(j) *= -1.0;
      out.Q.col(j) *= -1.0;
    }
  }
  return out;
}

Matrix polar_project(const Matrix& A) {
  require_finite(A, "polar_project");
  const Index d = A.rows();
  const Index r = A.cols();
  if (d < r) throw Error(ErrorCode::InvalidArgument, "polar_project: more columns than rows");
  // Compact SVD through a QR preconditioner: A = Q R, R = U S V^T, so the
  // polar factor is Q (U V^T).
  Eigen::HouseholderQR<Matrix> qr(A);
  const Matrix R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (r == 0 || s(r - 1) <= 1e-12 * s(0)) {
    throw Error(ErrorCode::RankDeficient, "polar_project: singular input");
  }
  Matrix P = Matrix::Zero(d, r);
  P.topRows(r) = svd.matrixU() * svd.matrixV().transpose();
  P.applyOnTheLeft(qr.householderQ());
  return P;
}

Matrix polar_via_gram(const Matrix& A) {
  return A * inv_sqrt_spd(A.transpose() * A);
}

Matrix inv_sqrt_spd(const Matrix& S) {
  auto eig = symmetric_eig(S, "inv_sqrt_spd");
  const Vector& lambda = eig.eigenvalues();
  if (lambda.size() > 0 && lambda(0) <= 0.0) {
    throw Error(ErrorCode::NotSPD, "inv_sqrt_spd: lambda_min = " + std::to_string(lambda(0)));
  }
  const Matrix& V = eig.eigenvectors();
  return V * lambda.array().rsqrt().matrix().asDiagonal() * V.transpose();
}

Matrix sqrt_psd(const Matrix& S) {
  auto eig = symmetric_eig(S, "sqrt_psd");
  Vector root = eig.eigenvalues().array().max(0.0).sqrt();
  const Matrix& V = eig.eigenvectors();
  return V * root.asDiagonal() * V.transpose();
}

Matrix pinv_gram(const Matrix& G) {
  auto eig = symmetric_eig(G, "pinv_gram");
  const Vector& lambda = eig.eigenvalues();
  const Index m = lambda.size();
  if (m == 0) return Matrix(0, 0);
  const double lambda_max = lambda.cwiseAbs().maxCoeff();
  if (lambda_max == 0.0) return Matrix::Zero(m, m);
  const double cutoff = 1e-12 * lambda_max;
  Vector inv(m);
  for (Index k = 0; k < m; ++k) inv(k) = lambda(k) > cutoff ? 1.0 / lambda(k) : 0.0;
  const Matrix& V = eig.eigenvectors();
  return V * inv.asDiagonal() * V.transpose();
}

Matrix expm(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::InvalidArgument, "expm: matrix is not square");
  }
  require_finite(A, "expm");
  const Index m = A.rows();
  // Higham (2005) degree-13 coefficients and the matching theta_13.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return Matrix::Identity(A.rows(), A.rows());
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const Matrix As = A / std::ldexp(1.0, squarings);
  const Matrix I = Matrix::Identity(m, m);
  const Matrix A2 = As * As;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;

  const Matrix U_inner = A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                         b[3] * A2 + b[1] * I;
  const Matrix U = As * U_inner;
  const Matrix V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

  Matrix R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < squarings; ++k) R = R * R;
  if (!all_finite(R)) {
    throw Error(ErrorCode::NonFiniteValue, "expm: overflow");
  }
  return R;
}

}  // namespace ssvrg
