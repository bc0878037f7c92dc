#include "ssvrg/pca.hpp"

#include <cmath>

#include "ssvrg/error.hpp"
#include "ssvrg/rng.hpp"

namespace ssvrg {

Matrix pca_generate_data(Index d, Index n, std::uint64_t seed) {
  if (d < 1 || n < 1) throw Error(ErrorCode::InvalidArgument, "pca_generate: d, n >= 1");
  Rng rng = make_stream(seed, 0, StreamTag::Data);
  Matrix A = gaussian_matrix(d, n, rng);
  for (Index i = 0; i < d; ++i) A.row(i) *= std::pow(static_cast<double>(i + 1), 0.618);
  const double m = A.cwiseAbs().maxCoeff();
  if (m > 0.0) A /= m;
  return A;
}

PcaInstance pca_from_data(Matrix A, Index r) {
  if (r < 1 || r > A.rows()) throw Error(ErrorCode::InvalidArgument, "pca: need 1 <= r <= d");
  if (A.cols() < 1) throw Error(ErrorCode::InvalidArgument, "pca: empty data");
  if (!all_finite(A)) throw Error(ErrorCode::NonFiniteValue, "pca: data has non-finite entries");
  PcaInstance inst;
  inst.A_bar = A.rowwise().mean();
  inst.A = std::move(A);
  inst.r = r;
  return inst;
}

PcaInstance pca_generate(Index d, Index n, Index r, std::uint64_t seed) {
  return pca_from_data(pca_generate_data(d, n, seed), r);
}

PcaProblem::PcaProblem(const PcaInstance& inst) : B_(inst.A.colwise() - inst.A_bar), r_(inst.r) {
  max_col_sq_ = B_.colwise().squaredNorm().maxCoeff();
}

double PcaProblem::component_value(const Matrix& X, Index i) const {
  return -(B_.col(i).transpose() * X).squaredNorm();
}

Matrix PcaProblem::component_grad(const Matrix& X, Index i) const {
  const Eigen::RowVectorXd bX = B_.col(i).transpose() * X;
  return -2.0 * B_.col(i) * bX;
}

Matrix PcaProblem::gather(std::span<const Index> batch) const {
  Matrix Bs(B_.rows(), static_cast<Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) Bs.col(static_cast<Index>(j)) = B_.col(batch[j]);
  return Bs;
}

// Gradients are linear in X, so the difference only needs X_k - X_0.
Matrix PcaProblem::batch_grad_difference(const Matrix& Xk, const Matrix& X0,
                                         std::span<const Index> batch) const {
  const Matrix Bs = gather(batch);
  return -2.0 * Bs * (Bs.transpose() * (Xk - X0));
}

Matrix PcaProblem::batch_grad(const Matrix& X, std::span<const Index> batch) const {
  const Matrix Bs = gather(batch);
  return -2.0 * Bs * (Bs.transpose() * X);
}

double PcaProblem::value(const Matrix& X) const {
  return -(B_.transpose() * X).squaredNorm() / static_cast<double>(count());
}

Matrix PcaProblem::full_grad(const Matrix& X) const {
  return (-2.0 / static_cast<double>(count())) * (B_ * (B_.transpose() * X));
}

ValueGrad PcaProblem::value_and_grad(const Matrix& X) const {
  const Matrix BtX = B_.transpose() * X;
  const double inv_n = 1.0 / static_cast<double>(count());
  return {-BtX.squaredNorm() * inv_n, (-2.0 * inv_n) * (B_ * BtX)};
}

ProblemConstants PcaProblem::constants() const {
  ProblemConstants c;
  c.L = std::max(2.0 * max_col_sq_, 1e-300);
  c.C = c.L * std::sqrt(static_cast<double>(r_));
  c.source = ConstantsSource::Analytic;
  return c;
}

PcaOptimum pca_optimum(const PcaProblem& problem) {
  const Matrix& B = problem.centered();
  const Matrix cov = (B * B.transpose()) / static_cast<double>(problem.count());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Index r = problem.rank();
  PcaOptimum opt;
  opt.eigenvalues = eig.eigenvalues().reverse();
  opt.X_star = eig.eigenvectors().rightCols(r).rowwise().reverse();
  opt.f_star = -opt.eigenvalues.head(r).sum();
  return opt;
}

double relative_error(double f, double f_star) {
  const double diff = std::abs(f - f_star);
  return f_star == 0.0 ? diff : diff / std::abs(f_star);
}

}  // namespace ssvrg
