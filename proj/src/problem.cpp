#include "ssvrg/problem.hpp"

namespace ssvrg {

std::string_view to_string(ConstantsSource source) {
  switch (source) {
    case ConstantsSource::Analytic: return "analytic";
    case ConstantsSource::PowerIteration: return "estimated";
    case ConstantsSource::UserSupplied: return "user";
  }
  return "?";
}

Matrix FiniteSumProblem::batch_grad_difference(const Matrix& Xk, const Matrix& X0,
                                               std::span<const Index> batch) const {
  Matrix out = Matrix::Zero(dim(), rank());
  for (Index i : batch) out += component_grad(Xk, i) - component_grad(X0, i);
  return out;
}

Matrix FiniteSumProblem::batch_grad(const Matrix& X, std::span<const Index> batch) const {
  Matrix out = Matrix::Zero(dim(), rank());
  for (Index i : batch) out += component_grad(X, i);
  return out;
}

double FiniteSumProblem::value(const Matrix& X) const {
  double sum = 0.0;
  for (Index i = 0; i < count(); ++i) sum += component_value(X, i);
  return sum / static_cast<double>(count());
}

Matrix FiniteSumProblem::full_grad(const Matrix& X) const {
  Matrix g = Matrix::Zero(dim(), rank());
  for (Index i = 0; i < count(); ++i) g += component_grad(X, i);
  return g / static_cast<double>(count());
}

ValueGrad FiniteSumProblem::value_and_grad(const Matrix& X) const {
  return {value(X), full_grad(X)};
}

}  // namespace ssvrg
