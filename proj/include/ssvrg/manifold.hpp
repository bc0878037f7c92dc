#pragma once

// Stiefel / Grassmann points, tangent vectors, the rho-metric family and the
// D_rho operator that turns Euclidean gradients into Riemannian ones.

#include "ssvrg/linalg.hpp"

namespace ssvrg {

enum class Geometry { Stiefel, Grassmann };
enum class TangentSpace { StiefelTangent, GrassmannHorizontal };

inline constexpr double kFeasibilityTol = 1e-10;

/// Metric P_{rho,X} = I - (1 - 1/(4 rho)) X X^T on T_X St; rho = 0 selects the
/// Euclidean metric on the Grassmann horizontal space.
struct MetricParams {
  double rho = 0.0;
  double nu = 1.0;     // lower norm-equivalence constant
  double gamma = 1.0;  // upper norm-equivalence constant

  static MetricParams from_rho(double rho);
};

/// A d x r matrix with orthonormal columns. Grassmann points are the same
/// matrices tagged as class representatives.
class StiefelPoint {
 public:
  explicit StiefelPoint(Matrix X, Geometry geometry = Geometry::Stiefel);

  const Matrix& matrix() const noexcept { return X_; }
  Geometry geometry() const noexcept { return geometry_; }
  Index dim() const noexcept { return X_.rows(); }
  Index rank() const noexcept { return X_.cols(); }

 private:
  Matrix X_;
  Geometry geometry_;
};

/// Tangent (or horizontal) direction at a base point. The invariant is checked
/// against the base at construction with tolerance 1e-10 * max(1, ||E||_F).
class TangentVector {
 public:
  TangentVector(const StiefelPoint& base, Matrix E, TangentSpace space);

  const Matrix& matrix() const noexcept { return E_; }
  TangentSpace space() const noexcept { return space_; }
  double norm() const { return E_.norm(); }

 private:
  Matrix E_;
  TangentSpace space_;
};

/// Distance of E from the requested tangent space at X (the invariant residual).
double tangent_residual(const Matrix& X, const Matrix& E, TangentSpace space);

/// (I_d - X X^T) Y + 4 rho X skew(X^T Y), on raw matrices.
Matrix d_rho_matrix(const Matrix& X, const Matrix& Y, double rho);

TangentVector d_rho(const StiefelPoint& X, const Matrix& Y, double rho);

/// grad f(X) = D_rho(X, egrad).
TangentVector riemannian_grad(const StiefelPoint& X, const Matrix& egrad, double rho);

/// <E1, P_{rho,X} E2>; the plain Euclidean product for rho = 0.
double inner_x(const Matrix& X, const Matrix& E1, const Matrix& E2, double rho);
double inner_x(const StiefelPoint& X, const TangentVector& E1, const TangentVector& E2,
               double rho);

/// Z - X sym(X^T Z) (Stiefel) or (I - X X^T) Z (Grassmann).
Matrix tangent_project_matrix(const Matrix& X, const Matrix& Z, TangentSpace space);
TangentVector tangent_project(const StiefelPoint& X, const Matrix& Z, TangentSpace space);

}  // namespace ssvrg
