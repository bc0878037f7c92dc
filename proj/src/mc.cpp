#include "ssvrg/mc.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ssvrg/error.hpp"
#include "ssvrg/rng.hpp"

namespace ssvrg {

std::size_t McInstance::observed() const {
  std::size_t total = 0;
  for (const McColumn& c : columns) total += c.rows.size();
  return total;
}

std::size_t mc_sample_size(Index d, Index n, Index r) {
  return static_cast<std::size_t>(n + d - r) * static_cast<std::size_t>(r * r);
}

namespace {

// Floyd's algorithm: m distinct values from [0, N), returned sorted.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t N, std::uint64_t m, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(m) * 2);
  for (std::uint64_t j = N - m; j < N; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(0, j);
    const std::uint64_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

void check_rank(Index d, Index n, Index r) {
  if (d < 1 || n < 1 || r < 1 || r > d || r > n) {
    throw Error(ErrorCode::InvalidArgument, "mc: need 1 <= r <= min(d, n)");
  }
}

}  // namespace

McInstance mc_generate(Index d, Index n, Index r, double cond, std::uint64_t seed) {
  check_rank(d, n, r);
  if (!(cond >= 1.0)) throw Error(ErrorCode::InvalidArgument, "mc_generate: cond >= 1");
  const std::size_t m = mc_sample_size(d, n, r);
  const auto total = static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(n);
  if (m > total) {
    throw Error(ErrorCode::TooManySamples, "mc_generate: |Omega| = " + std::to_string(m) +
                                               " exceeds d n = " + std::to_string(total));
  }

  Rng data = make_stream(seed, 0, StreamTag::Data);
  const Matrix U = std::sqrt(static_cast<double>(d)) * qr_positive(gaussian_matrix(d, r, data)).Q;
  const Matrix V = std::sqrt(static_cast<double>(n)) * qr_positive(gaussian_matrix(n, r, data)).Q;
  Vector sigma(r);
  for (Index k = 0; k < r; ++k) {
    const double frac = r == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(r - 1);
    sigma(k) = std::pow(cond, 1.0 - frac);
  }

  McInstance inst;
  inst.d = d;
  inst.n = n;
  inst.r = r;
  inst.M_true = U * sigma.asDiagonal() * V.transpose();
  inst.mu0 = std::max(U.rowwise().squaredNorm().maxCoeff(), V.rowwise().squaredNorm().maxCoeff()) /
             static_cast<double>(r);

  Rng omega = make_stream(seed, 0, StreamTag::Omega);
  const std::vector<std::uint64_t> idx = sample_without_replacement(total, m, omega);
  inst.columns.resize(static_cast<std::size_t>(n));
  // Column-major linear indices: sorted order groups by column, rows ascending.
  std::vector<std::vector<double>> vals(static_cast<std::size_t>(n));
  for (std::uint64_t k : idx) {
    const auto row = static_cast<Index>(k % static_cast<std::uint64_t>(d));
    const auto col = static_cast<Index>(k / static_cast<std::uint64_t>(d));
    inst.columns[col].rows.push_back(row);
    vals[col].push_back((*inst.M_true)(row, col));
  }
  for (Index j = 0; j < n; ++j) {
    inst.columns[j].values = Eigen::Map<const Vector>(vals[j].data(), static_cast<Index>(vals[j].size()));
  }
  return inst;
}

McInstance mc_from_observations(Index d, Index n, Index r, std::vector<Observation> obs) {
  check_rank(d, n, r);
  if (obs.empty()) throw Error(ErrorCode::InvalidArgument, "mc: no observations");
  std::sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  McInstance inst;
  inst.d = d;
  inst.n = n;
  inst.r = r;
  inst.columns.resize(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> vals(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Observation& o = obs[k];
    if (o.row < 0 || o.row >= d || o.col < 0 || o.col >= n) {
      throw Error(ErrorCode::InvalidArgument, "mc: observation index out of range");
    }
    if (!std::isfinite(o.value)) throw Error(ErrorCode::NonFiniteValue, "mc: non-finite observation");
    if (k > 0 && obs[k - 1].row == o.row && obs[k - 1].col == o.col) {
      throw Error(ErrorCode::InvalidArgument, "mc: duplicate observation");
    }
    inst.columns[o.col].rows.push_back(o.row);
    vals[o.col].push_back(o.value);
  }
  for (Index j = 0; j < n; ++j) {
    inst.columns[j].values = Eigen::Map<const Vector>(vals[j].data(), static_cast<Index>(vals[j].size()));
  }
  return inst;
}

std::vector<Observation> mc_observations(const McInstance& inst) {
  std::vector<Observation> out;
  out.reserve(inst.observed());
  for (Index j = 0; j < inst.n; ++j) {
    const McColumn& c = inst.columns[j];
    for (std::size_t k = 0; k < c.rows.size(); ++k) {
      out.push_back({c.rows[k], j, c.values(static_cast<Index>(k))});
    }
  }
  return out;
}

McProblem::McProblem(McInstance inst) : inst_(std::move(inst)) {
  if (static_cast<Index>(inst_.columns.size()) != inst_.n) {
    throw Error(ErrorCode::InvalidArgument, "McProblem: column count mismatch");
  }
  if (inst_.observed() == 0) throw Error(ErrorCode::InvalidArgument, "McProblem: |Omega| = 0");
  constants_ = mc_estimate_constants(*this, 200, 0x6d63ULL);
}

Vector McProblem::solve_coefficients(const Matrix& Xs, const Vector& m) const {
  const Matrix G = Xs.transpose() * Xs;
  const Vector rhs = Xs.transpose() * m;
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() == Eigen::Success) {
    const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
    if (diag.minCoeff() > 1e-6 * diag.maxCoeff()) return llt.solve(rhs);
  }
  // Fewer observed rows than r, or nearly collinear: minimum-norm solution.
  return pinv_gram(G) * rhs;
}

double McProblem::accumulate(const Matrix& X, Index i, double scale, Matrix& out) const {
  const McColumn& c = inst_.columns[i];
  const auto k = static_cast<Index>(c.rows.size());
  if (k == 0) return 0.0;
  Matrix Xs(k, X.cols());
  for (Index j = 0; j < k; ++j) Xs.row(j) = X.row(c.rows[j]);
  const Vector a = solve_coefficients(Xs, c.values);
  const Vector res = Xs * a - c.values;
  if (scale != 0.0) {
    // Envelope theorem: a is optimal, so only the explicit X dependence counts.
    const Eigen::RowVectorXd at = (2.0 * scale) * a.transpose();
    for (Index j = 0; j < k; ++j) out.row(c.rows[j]) += res(j) * at;
  }
  return res.squaredNorm();
}

double McProblem::component_value(const Matrix& X, Index i) const {
  Matrix unused;
  return accumulate(X, i, 0.0, unused);
}

Matrix McProblem::component_grad(const Matrix& X, Index i) const {
  return component_value_grad(X, i).grad;
}

ValueGrad McProblem::component_value_grad(const Matrix& X, Index i) const {
  ValueGrad vg;
  vg.grad = Matrix::Zero(X.rows(), X.cols());
  vg.value = accumulate(X, i, 1.0, vg.grad);
  return vg;
}

Matrix McProblem::batch_grad_difference(const Matrix& Xk, const Matrix& X0,
                                        std::span<const Index> batch) const {
  Matrix out = Matrix::Zero(Xk.rows(), Xk.cols());
  for (Index i : batch) {
    accumulate(Xk, i, 1.0, out);
    accumulate(X0, i, -1.0, out);
  }
  return out;
}

Matrix McProblem::batch_grad(const Matrix& X, std::span<const Index> batch) const {
  Matrix out = Matrix::Zero(X.rows(), X.cols());
  for (Index i : batch) accumulate(X, i, 1.0, out);
  return out;
}

double McProblem::value(const Matrix& X) const {
  Matrix unused;
  double sum = 0.0;
  for (Index i = 0; i < inst_.n; ++i) sum += accumulate(X, i, 0.0, unused);
  return sum / static_cast<double>(inst_.n);
}

Matrix McProblem::full_grad(const Matrix& X) const { return value_and_grad(X).grad; }

ValueGrad McProblem::value_and_grad(const Matrix& X) const {
  ValueGrad vg;
  vg.grad = Matrix::Zero(X.rows(), X.cols());
  const double inv_n = 1.0 / static_cast<double>(inst_.n);
  double sum = 0.0;
  for (Index i = 0; i < inst_.n; ++i) sum += accumulate(X, i, inv_n, vg.grad);
  vg.value = sum * inv_n;
  return vg;
}

Matrix McProblem::coefficients(const Matrix& X) const {
  Matrix A = Matrix::Zero(inst_.r, inst_.n);
  for (Index i = 0; i < inst_.n; ++i) {
    const McColumn& c = inst_.columns[i];
    const auto k = static_cast<Index>(c.rows.size());
    if (k == 0) continue;
    Matrix Xs(k, X.cols());
    for (Index j = 0; j < k; ++j) Xs.row(j) = X.row(c.rows[j]);
    A.col(i) = solve_coefficients(Xs, c.values);
  }
  return A;
}

double McProblem::observed_energy() const {
  double sum = 0.0;
  for (const McColumn& c : inst_.columns) sum += c.values.squaredNorm();
  return sum / static_cast<double>(inst_.n);
}

ProblemConstants mc_estimate_constants(const McProblem& problem, int trials, std::uint64_t seed) {
  Rng rng(splitmix64(seed));
  std::uniform_int_distribution<Index> pick(0, problem.count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index d = problem.dim();
  const Index r = problem.rank();
  ProblemConstants out;
  out.source = ConstantsSource::PowerIteration;
  for (int t = 0; t < trials; ++t) {
    const Index i = pick(rng);
    const Matrix X = qr_positive(gaussian_matrix(d, r, rng)).Q;
    const double eps = std::pow(10.0, -3.0 + 3.0 * unit(rng));
    const Matrix Y = polar_project(X + eps * gaussian_matrix(d, r, rng) / std::sqrt(double(d * r)));
    const Matrix gx = problem.component_grad(X, i);
    const Matrix gy = problem.component_grad(Y, i);
    const double dist = (X - Y).norm();
    if (dist > 0.0) out.L = std::max(out.L, (gx - gy).norm() / dist);
    out.C = std::max({out.C, gx.norm(), gy.norm()});
  }
  out.L = std::max(out.L, 1e-12);
  out.C = std::max(out.C, 1e-12);
  return out;
}

double recovery_error(const McProblem& problem, const Matrix& X) {
  const McInstance& inst = problem.instance();
  if (!inst.M_true) throw Error(ErrorCode::InvalidArgument, "recovery_error: no ground truth");
  const Matrix A = problem.coefficients(X);
  return (X * A - *inst.M_true).norm() / inst.M_true->norm();
}

double g1_regularizer(double z) {
  if (z <= 1.0) return 0.0;
  return std::expm1((z - 1.0) * (z - 1.0));
}

double mc_factor_objective(const McInstance& inst, const Matrix& W, const Matrix& Z) {
  const Index r = W.cols();
  if (W.rows() != inst.d || Z.rows() != inst.n || Z.cols() != r) {
    throw Error(ErrorCode::InvalidArgument, "mc_factor_objective: shape mismatch");
  }
  const auto m = static_cast<Index>(inst.observed());
  // Row per observation, column a + b r holds W(i, a) Z(j, b): vec(S) coefficients.
  Matrix Phi(m, r * r);
  Vector y(m);
  Index row = 0;
  for (Index j = 0; j < inst.n; ++j) {
    const McColumn& c = inst.columns[j];
    for (std::size_t k = 0; k < c.rows.size(); ++k, ++row) {
      const Index i = c.rows[k];
      for (Index b = 0; b < r; ++b)
        for (Index a = 0; a < r; ++a) Phi(row, a + b * r) = W(i, a) * Z(j, b);
      y(row) = c.values(static_cast<Index>(k));
    }
  }
  const Vector s = Phi.colPivHouseholderQr().solve(y);
  return 0.5 * (Phi * s - y).squaredNorm();
}

double tilde_f(const McInstance& inst, const Matrix& W, const Matrix& Z, double varrho, double mu0) {
  const double scale = 1.0 / (3.0 * mu0 * static_cast<double>(W.cols()));
  double reg = 0.0;
  for (Index i = 0; i < W.rows(); ++i) reg += g1_regularizer(W.row(i).squaredNorm() * scale);
  for (Index j = 0; j < Z.rows(); ++j) reg += g1_regularizer(Z.row(j).squaredNorm() * scale);
  return mc_factor_objective(inst, W, Z) + varrho * reg;
}

}  // namespace ssvrg
