#include "ssvrg/oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ssvrg::oracle {

QrResult gram_schmidt_qr(const Mat& A) {
  const auto r = A.cols();
  QrResult out{A, Mat::Zero(r, r)};
  Mat& Q = out.Q;
  for (Eigen::Index j = 0; j < r; ++j) {
    // Two passes of MGS keep Q orthonormal to working precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = Q.col(i).dot(Q.col(j));
        out.R(i, j) += c;
        Q.col(j) -= c * Q.col(i);
      }
    }
    const double nrm = Q.col(j).norm();
    if (nrm == 0.0) throw std::domain_error("gram_schmidt_qr: rank deficient");
    out.R(j, j) = nrm;
    Q.col(j) /= nrm;
  }
  return out;
}

Mat taylor_expm(const Mat& A, int terms) {
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(norm1, -s) > 0.5) ++s;
  const Mat As = A * std::ldexp(1.0, -s);
  Mat sum = Mat::Identity(A.rows(), A.cols());
  Mat term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * As / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

Mat gram_sqrt(const Mat& A) {
  const Mat G = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (G + G.transpose()));
  const Vec root = eig.eigenvalues().array().max(0.0).sqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Mat polar_by_gram(const Mat& A) {
  const Mat G = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (G + G.transpose()));
  const Vec inv_root = eig.eigenvalues().array().rsqrt();
  return A * (eig.eigenvectors() * inv_root.asDiagonal() * eig.eigenvectors().transpose());
}

Mat fd_derivative(const std::function<Mat(double)>& curve, const FiniteDiffSpec& spec) {
  if (spec.scheme == FdScheme::Forward) {
    return (curve(spec.h) - curve(0.0)) / spec.h;
  }
  auto central = [&](double h) -> Mat { return (curve(h) - curve(-h)) / (2.0 * h); };
  const Mat coarse = central(spec.h);
  const Mat fine = central(0.5 * spec.h);
  return (4.0 * fine - coarse) / 3.0;
}

double fd_directional(const std::function<double(const Mat&)>& f, const Mat& X, const Mat& E,
                      const FiniteDiffSpec& spec) {
  if (spec.scheme == FdScheme::Forward) return (f(X + spec.h * E) - f(X)) / spec.h;
  auto central = [&](double h) { return (f(X + h * E) - f(X - h * E)) / (2.0 * h); };
  return (4.0 * central(0.5 * spec.h) - central(spec.h)) / 3.0;
}

double rel_diff(const Mat& A, const Mat& B) {
  return (A - B).norm() / std::max(B.norm(), 1e-300);
}

Mat reference_d_rho(const Mat& X, const Mat& Y, double rho) {
  const auto d = X.rows();
  const Mat proj = Mat::Identity(d, d) - X * X.transpose();
  const Mat XtY = X.transpose() * Y;
  return proj * Y + 4.0 * rho * X * (0.5 * (XtY - XtY.transpose()));
}

Expectation brute_force_expectation(const std::function<Mat(const Mat&, long long)>& component_grad,
                                    long long n, const Mat& Xk, const Mat& X_anchor, int batch_size,
                                    double rho) {
  if (n < 1 || batch_size < 1) throw std::invalid_argument("brute_force_expectation: n, b >= 1");
  double total = 1.0;
  for (int j = 0; j < batch_size; ++j) total *= static_cast<double>(n);
  if (total > 1e6) throw std::length_error("brute_force_expectation: more than 1e6 batches");

  std::vector<Mat> gk(static_cast<std::size_t>(n));
  std::vector<Mat> g0(static_cast<std::size_t>(n));
  Mat full_k = Mat::Zero(Xk.rows(), Xk.cols());
  Mat full_0 = Mat::Zero(Xk.rows(), Xk.cols());
  for (long long i = 0; i < n; ++i) {
    gk[i] = component_grad(Xk, i);
    g0[i] = component_grad(X_anchor, i);
    full_k += gk[i];
    full_0 += g0[i];
  }
  full_k /= static_cast<double>(n);
  full_0 /= static_cast<double>(n);

  Expectation e;
  e.grad = reference_d_rho(Xk, full_k, rho);
  e.mean = Mat::Zero(Xk.rows(), Xk.cols());
  std::vector<long long> idx(static_cast<std::size_t>(batch_size), 0);
  const auto count = static_cast<long long>(total);
  std::vector<Mat> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (long long b = 0; b < count; ++b) {
    Mat G = full_0;
    for (long long i : idx) G += (gk[i] - g0[i]) / static_cast<double>(batch_size);
    samples.push_back(reference_d_rho(Xk, G, rho));
    e.mean += samples.back();
    // Odometer increment over ordered batches.
    for (int j = 0; j < batch_size; ++j) {
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
  }
  e.mean /= static_cast<double>(count);
  for (const Mat& s : samples) e.second_moment += (s - e.grad).squaredNorm();
  e.second_moment /= static_cast<double>(count);
  e.batches = count;
  return e;
}

Mat centered_covariance(const Mat& A) {
  const Vec mean = A.rowwise().mean();
  const Mat B = A.colwise() - mean;
  return B * B.transpose() / static_cast<double>(A.cols());
}

Eig dense_pca_eig(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(centered_covariance(A));
  Eig out;
  out.values = eig.eigenvalues().reverse();
  out.vectors = eig.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace ssvrg::oracle
