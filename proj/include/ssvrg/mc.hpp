#pragma once

// Low-rank matrix completion on Gr(d, r):
//   f_i(X) = min_a ||P_{Omega_i}(X a - M_i)||^2,
// with M_i the i-th column of the d x n target and Omega_i its observed rows.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ssvrg/problem.hpp"

namespace ssvrg {

struct Observation {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

struct McColumn {
  std::vector<Index> rows;  // ascending
  Vector values;
};

struct McInstance {
  Index d = 0;
  Index n = 0;
  Index r = 1;
  std::vector<McColumn> columns;        // Omega_i and P_{Omega_i}(M_i), one per column
  std::optional<Matrix> M_true;         // ground truth when synthetic
  double mu0 = 1.0;                     // incoherence of the true factors
  double varrho = 1.0;                  // regularizer weight for tilde_f

  std::size_t observed() const;
};

/// (n + d - r) r^2, the sample size used by the synthetic generator.
std::size_t mc_sample_size(Index d, Index n, Index r);

/// M = U Sigma V^T with U^T U = d I, V^T V = n I and singular values spaced
/// geometrically from cond down to 1. Omega is uniform without replacement,
/// |Omega| = mc_sample_size(d, n, r). Throws TooManySamples if |Omega| > d n.
McInstance mc_generate(Index d, Index n, Index r, double cond, std::uint64_t seed);

/// Builds an instance from observed triples (0-based). Every (row, col)
/// must be unique and in range.
McInstance mc_from_observations(Index d, Index n, Index r, std::vector<Observation> obs);

std::vector<Observation> mc_observations(const McInstance& inst);

class McProblem final : public FiniteSumProblem {
 public:
  explicit McProblem(McInstance inst);

  Index dim() const override { return inst_.d; }
  Index rank() const override { return inst_.r; }
  Index count() const override { return inst_.n; }
  Geometry geometry() const override { return Geometry::Grassmann; }

  double component_value(const Matrix& X, Index i) const override;
  Matrix component_grad(const Matrix& X, Index i) const override;
  Matrix batch_grad_difference(const Matrix& Xk, const Matrix& X0,
                               std::span<const Index> batch) const override;
  Matrix batch_grad(const Matrix& X, std::span<const Index> batch) const override;
  double value(const Matrix& X) const override;
  Matrix full_grad(const Matrix& X) const override;
  ValueGrad value_and_grad(const Matrix& X) const override;

  /// Empirical constants, see mc_estimate_constants.
  ProblemConstants constants() const override { return constants_; }

  /// (f_i, grad f_i) in one pass.
  ValueGrad component_value_grad(const Matrix& X, Index i) const;

  /// Least-squares coefficients a_i for every column (r x n).
  Matrix coefficients(const Matrix& X) const;

  /// (1/n) sum_i ||P_{Omega_i}(M_i)||^2, the value at X = 0 coefficients.
  double observed_energy() const;

  const McInstance& instance() const noexcept { return inst_; }

 private:
  // Adds scale * grad f_i(X) into out and returns f_i(X).
  double accumulate(const Matrix& X, Index i, double scale, Matrix& out) const;
  Vector solve_coefficients(const Matrix& Xs, const Vector& m) const;

  McInstance inst_;
  ProblemConstants constants_;
};

/// Sampled suprema of ||grad f_i(X) - grad f_i(Y)|| / ||X - Y|| and ||grad f_i(X)||
/// over random Stiefel pairs. Flagged as estimates, not bounds.
ProblemConstants mc_estimate_constants(const McProblem& problem, int trials, std::uint64_t seed);

/// ||X A - M_true||_F / ||M_true||_F with A from the observed least squares.
double recovery_error(const McProblem& problem, const Matrix& X);

/// G1(z) = 0 for z <= 1, exp((z - 1)^2) - 1 otherwise.
double g1_regularizer(double z);

/// F(W, Z) = min_S 0.5 ||P_Omega(M - W S Z^T)||^2.
double mc_factor_objective(const McInstance& inst, const Matrix& W, const Matrix& Z);

/// F(W, Z) + varrho sum_i G1(||W^(i)||^2 / (3 mu0 r)) + varrho sum_j G1(||Z^(j)||^2 / (3 mu0 r)).
double tilde_f(const McInstance& inst, const Matrix& W, const Matrix& Z, double varrho, double mu0);

}  // namespace ssvrg
