#pragma once

// Reference implementations used only to check the library. They depend on
// Eigen arithmetic alone and share no code with the kernels they validate.

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace ssvrg::oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct QrResult {
  Mat Q;
  Mat R;
};

/// Modified Gram-Schmidt, positive diagonal by construction.
QrResult gram_schmidt_qr(const Mat& A);

/// sum_{k < terms} (A / 2^s)^k / k!, squared s times, with s chosen so that
/// ||A / 2^s||_1 <= 0.5.
Mat taylor_expm(const Mat& A, int terms = 60);

/// A (A^T A)^{-1/2} through a symmetric eigendecomposition of the Gram matrix.
Mat polar_by_gram(const Mat& A);

/// (A^T A)^{1/2} through a symmetric eigendecomposition.
Mat gram_sqrt(const Mat& A);

enum class FdScheme { Central, Forward };

struct FiniteDiffSpec {
  double h = 1e-6;
  FdScheme scheme = FdScheme::Central;
  double rel_tol = 1e-5;
};

/// Derivative at t = 0 of a matrix curve. Central differences are
/// Richardson-extrapolated from h and h / 2: (4 D(h/2) - D(h)) / 3.
Mat fd_derivative(const std::function<Mat(double)>& curve, const FiniteDiffSpec& spec = {});

/// Directional derivative of a scalar function: d/dt f(X + t E) at t = 0.
double fd_directional(const std::function<double(const Mat&)>& f, const Mat& X, const Mat& E,
                      const FiniteDiffSpec& spec = {});

/// Relative discrepancy ||A - B|| / max(||B||, tiny).
double rel_diff(const Mat& A, const Mat& B);

/// (I - X X^T) Y + 4 rho X skew(X^T Y), written out independently.
Mat reference_d_rho(const Mat& X, const Mat& Y, double rho);

struct Expectation {
  Mat mean;                   // E[G^R]
  double second_moment = 0.0; // E ||G^R - grad f||^2
  Mat grad;                   // grad f at X_k
  long long batches = 0;
};

/// Exact mean and second central moment of the variance-reduced Riemannian
/// gradient over all n^b ordered batches drawn with replacement.
/// Throws std::length_error if n^b > 1e6.
Expectation brute_force_expectation(const std::function<Mat(const Mat&, long long)>& component_grad,
                                    long long n, const Mat& Xk, const Mat& X_anchor, int batch_size,
                                    double rho);

struct Eig {
  Vec values;   // descending
  Mat vectors;  // matching columns
};

/// Eigendecomposition of B B^T / n with B the column-centered data.
Eig dense_pca_eig(const Mat& A);

/// Centered covariance (A - mean) (A - mean)^T / n.
Mat centered_covariance(const Mat& A);

}  // namespace ssvrg::oracle
