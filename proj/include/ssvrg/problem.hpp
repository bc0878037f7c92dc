#pragma once

// Finite-sum objectives f(X) = (1/n) sum_i f_i(X) over St(d, r) or Gr(d, r).

#include <span>
#include <string_view>

#include "ssvrg/manifold.hpp"

namespace ssvrg {

enum class ConstantsSource { Analytic, PowerIteration, UserSupplied };

std::string_view to_string(ConstantsSource source);

struct ProblemConstants {
  double L = 0.0;  // Lipschitz constant of every component gradient
  double C = 0.0;  // bound on ||grad f_i||_F over the manifold
  ConstantsSource source = ConstantsSource::Analytic;
};

struct ValueGrad {
  double value = 0.0;
  Matrix grad;
};

class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual Index dim() const = 0;
  virtual Index rank() const = 0;
  virtual Index count() const = 0;

  /// Geometry the problem is naturally posed on.
  virtual Geometry geometry() const = 0;

  virtual double component_value(const Matrix& X, Index i) const = 0;
  virtual Matrix component_grad(const Matrix& X, Index i) const = 0;

  /// sum_{i in batch} (grad f_i(Xk) - grad f_i(X0)); indices may repeat.
  virtual Matrix batch_grad_difference(const Matrix& Xk, const Matrix& X0,
                                       std::span<const Index> batch) const;

  /// sum_{i in batch} grad f_i(X).
  virtual Matrix batch_grad(const Matrix& X, std::span<const Index> batch) const;

  virtual double value(const Matrix& X) const;
  virtual Matrix full_grad(const Matrix& X) const;
  virtual ValueGrad value_and_grad(const Matrix& X) const;

  virtual ProblemConstants constants() const = 0;
};

}  // namespace ssvrg
