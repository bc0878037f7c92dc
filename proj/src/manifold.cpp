#include "ssvrg/manifold.hpp"

#include <algorithm>
#include <string>

#include "ssvrg/error.hpp"

namespace ssvrg {

MetricParams MetricParams::from_rho(double rho) {
  if (!(rho >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rho must be nonnegative");
  }
  MetricParams m;
  m.rho = rho;
  if (rho == 0.0) {
    m.nu = 1.0;
    m.gamma = 1.0;
  } else {
    // P_{rho,X} acts as 1 on the normal part and 1/(4 rho) on the X part.
    m.nu = std::min(1.0, 1.0 / (4.0 * rho));
    m.gamma = std::max(1.0, 1.0 / (4.0 * rho));
  }
  return m;
}

StiefelPoint::StiefelPoint(Matrix X, Geometry geometry) : X_(std::move(X)), geometry_(geometry) {
  if (X_.cols() > X_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "StiefelPoint: r > d");
  }
  const double err = orthonormality_error(X_);
  if (!(err <= kFeasibilityTol)) {
    throw Error(ErrorCode::NotFeasible, "StiefelPoint: ||X^T X - I||_F = " + std::to_string(err));
  }
}

double tangent_residual(const Matrix& X, const Matrix& E, TangentSpace space) {
  const Matrix XtE = X.transpose() * E;
  if (space == TangentSpace::StiefelTangent) return (XtE + XtE.transpose()).norm();
  return XtE.norm();
}

TangentVector::TangentVector(const StiefelPoint& base, Matrix E, TangentSpace space)
    : E_(std::move(E)), space_(space) {
  if (E_.rows() != base.dim() || E_.cols() != base.rank()) {
    throw Error(ErrorCode::InvalidArgument, "TangentVector: shape mismatch");
  }
  const double res = tangent_residual(base.matrix(), E_, space_);
  if (!(res <= kFeasibilityTol * std::max(1.0, E_.norm()))) {
    throw Error(ErrorCode::NotTangent, "TangentVector: residual " + std::to_string(res));
  }
}

Matrix d_rho_matrix(const Matrix& X, const Matrix& Y, double rho) {
  const Matrix XtY = X.transpose() * Y;
  if (rho == 0.0) return Y - X * XtY;
  return Y - X * (XtY - 4.0 * rho * skew(XtY));
}

TangentVector d_rho(const StiefelPoint& X, const Matrix& Y, double rho) {
  const TangentSpace space =
      rho == 0.0 ? TangentSpace::GrassmannHorizontal : TangentSpace::StiefelTangent;
  return TangentVector(X, d_rho_matrix(X.matrix(), Y, rho), space);
}

TangentVector riemannian_grad(const StiefelPoint& X, const Matrix& egrad, double rho) {
  return d_rho(X, egrad, rho);
}

double inner_x(const Matrix& X, const Matrix& E1, const Matrix& E2, double rho) {
  const double euclid = frob_inner(E1, E2);
  if (rho == 0.0) return euclid;
  const double coeff = 1.0 - 1.0 / (4.0 * rho);
  if (coeff == 0.0) return euclid;
  return euclid - coeff * frob_inner(X.transpose() * E1, X.transpose() * E2);
}

double inner_x(const StiefelPoint& X, const TangentVector& E1, const TangentVector& E2,
               double rho) {
  return inner_x(X.matrix(), E1.matrix(), E2.matrix(), rho);
}

Matrix tangent_project_matrix(const Matrix& X, const Matrix& Z, TangentSpace space) {
  const Matrix XtZ = X.transpose() * Z;
  if (space == TangentSpace::StiefelTangent) return Z - X * sym(XtZ);
  return Z - X * XtZ;
}

TangentVector tangent_project(const StiefelPoint& X, const Matrix& Z, TangentSpace space) {
  return TangentVector(X, tangent_project_matrix(X.matrix(), Z, space), space);
}

}  // namespace ssvrg
