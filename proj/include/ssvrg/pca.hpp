#pragma once

// PCA as a finite sum on the Grassmannian:
//   f_i(X) = -||B_i^T X||^2,  B_i = A_i - A_bar,
// so f(X) = -(1/n) tr(X^T B B^T X) and minimizers span the top-r principal
// subspace.

#include <cstdint>

#include "ssvrg/problem.hpp"

namespace ssvrg {

struct PcaInstance {
  Matrix A;      // d x n data, one sample per column
  Vector A_bar;  // column mean
  Index r = 1;
};

/// A_ij = i^0.618 g_ij (1-based row index, g standard normal), then divided
/// by max |A_ij|.
Matrix pca_generate_data(Index d, Index n, std::uint64_t seed);
PcaInstance pca_generate(Index d, Index n, Index r, std::uint64_t seed);
PcaInstance pca_from_data(Matrix A, Index r);

class PcaProblem final : public FiniteSumProblem {
 public:
  explicit PcaProblem(const PcaInstance& inst);

  Index dim() const override { return B_.rows(); }
  Index rank() const override { return r_; }
  Index count() const override { return B_.cols(); }
  Geometry geometry() const override { return Geometry::Grassmann; }

  double component_value(const Matrix& X, Index i) const override;
  Matrix component_grad(const Matrix& X, Index i) const override;
  Matrix batch_grad_difference(const Matrix& Xk, const Matrix& X0,
                               std::span<const Index> batch) const override;
  Matrix batch_grad(const Matrix& X, std::span<const Index> batch) const override;
  double value(const Matrix& X) const override;
  Matrix full_grad(const Matrix& X) const override;
  ValueGrad value_and_grad(const Matrix& X) const override;

  /// L = 2 max_i ||B_i||^2, C = L sqrt(r).
  ProblemConstants constants() const override;

  /// Centered data B = A - A_bar 1^T.
  const Matrix& centered() const noexcept { return B_; }

 private:
  Matrix gather(std::span<const Index> batch) const;

  Matrix B_;
  Index r_;
  double max_col_sq_ = 0.0;
};

struct PcaOptimum {
  double f_star = 0.0;
  Matrix X_star;       // top-r eigenvectors of B B^T / n
  Vector eigenvalues;  // all eigenvalues of B B^T / n, descending
};

/// Dense symmetric eigendecomposition of the centered covariance.
PcaOptimum pca_optimum(const PcaProblem& problem);

/// Relative error |f - f*| / |f*| (absolute when f* = 0).
double relative_error(double f, double f_star);

}  // namespace ssvrg
