#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ssvrg/data_io.hpp"
#include "ssvrg/error.hpp"
#include "ssvrg/mc.hpp"
#include "ssvrg/pca.hpp"
#include "test_util.hpp"

namespace ssvrg {
namespace {

using test::random_stiefel;
using test::random_tangent;
using test::rng_for;

// Directional-derivative check of the Euclidean gradient against the value.
void expect_gradient_matches_fd(const std::function<double(const Matrix&)>& f, const Matrix& grad,
                                const Matrix& X, Rng& rng) {
  for (int k = 0; k < 3; ++k) {
    const Matrix E = gaussian_matrix(X.rows(), X.cols(), rng);
    const double fd = oracle::fd_directional(f, X, E);
    const double an = frob_inner(grad, E);
    EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an)));
  }
}

TEST(PcaData, SingleRowIsNormalized) {
  const Matrix A = pca_generate_data(1, 50, 3);
  EXPECT_DOUBLE_EQ(A.cwiseAbs().maxCoeff(), 1.0);
}

TEST(PcaData, RowScaleGrowsAndMaxIsOne) {
  const Matrix A = pca_generate_data(50, 4000, 4);
  EXPECT_DOUBLE_EQ(A.cwiseAbs().maxCoeff(), 1.0);
  // Row RMS follows i^0.618 up to sampling noise.
  const double ratio = std::sqrt(A.row(49).squaredNorm() / A.row(0).squaredNorm());
  EXPECT_NEAR(ratio, std::pow(50.0, 0.618), 0.15 * std::pow(50.0, 0.618));
}

TEST(PcaData, Deterministic) {
  EXPECT_EQ(pca_generate_data(20, 30, 9), pca_generate_data(20, 30, 9));
  EXPECT_NE(pca_generate_data(20, 30, 9), pca_generate_data(20, 30, 10));
}

TEST(Pca, ComponentGradientHandCase) {
  Matrix A(2, 2);
  A << 1, 3,
       0, 2;
  const PcaProblem p(pca_from_data(A, 1));
  Matrix X(2, 1);
  X << 1, 0;
  // Centered first column (-1, -1).
  EXPECT_DOUBLE_EQ(p.component_value(X, 0), -1.0);
  Matrix g(2, 1);
  g << -2, -2;
  EXPECT_LE((p.component_grad(X, 0) - g).norm(), 1e-15);
}

TEST(Pca, ComponentGradientMatchesDenseFormula) {
  Rng rng = rng_for(60);
  const PcaInstance inst = pca_generate(12, 40, 3, 61);
  const PcaProblem p(inst);
  const Matrix X = random_stiefel(12, 3, rng);
  for (Index i = 0; i < 40; i += 7) {
    const Vector b = inst.A.col(i) - inst.A.rowwise().mean();
    const Matrix expect = -2.0 * (b * b.transpose()) * X;
    EXPECT_LE((p.component_grad(X, i) - expect).norm(), 1e-13);
  }
}

TEST(Pca, FullGradientAgreesWithFiniteDifferences) {
  Rng rng = rng_for(62);
  const PcaProblem p(pca_generate(15, 60, 4, 63));
  const Matrix X = random_stiefel(15, 4, rng);
  expect_gradient_matches_fd([&](const Matrix& Y) { return p.value(Y); }, p.full_grad(X), X, rng);
  expect_gradient_matches_fd([&](const Matrix& Y) { return p.component_value(Y, 5); }, p.component_grad(X, 5), X, rng);
}

TEST(Pca, FiniteSumConsistency) {
  Rng rng = rng_for(64);
  const PcaProblem p(pca_generate(10, 25, 2, 65));
  const Matrix X = random_stiefel(10, 2, rng);
  Matrix sum_g = Matrix::Zero(10, 2);
  double sum_f = 0.0;
  std::vector<Index> all;
  for (Index i = 0; i < 25; ++i) {
    sum_g += p.component_grad(X, i);
    sum_f += p.component_value(X, i);
    all.push_back(i);
  }
  EXPECT_NEAR(p.value(X), sum_f / 25.0, 1e-14);
  EXPECT_LE((p.full_grad(X) - sum_g / 25.0).norm(), 1e-13);
  EXPECT_LE((p.batch_grad(X, all) - sum_g).norm(), 1e-12);
  const ValueGrad vg = p.value_and_grad(X);
  EXPECT_NEAR(vg.value, p.value(X), 1e-15);
  const Matrix Y = random_stiefel(10, 2, rng);
  EXPECT_LE((p.batch_grad_difference(X, Y, all) - (p.batch_grad(X, all) - p.batch_grad(Y, all))).norm(), 1e-12);
}

TEST(Pca, ValueInvariantUnderRotationWithinSubspace) {
  Rng rng = rng_for(66);
  const PcaProblem p(pca_generate(10, 30, 3, 67));
  const Matrix X = random_stiefel(10, 3, rng);
  const Matrix Q = random_stiefel(3, 3, rng);
  EXPECT_NEAR(p.value(X), p.value(X * Q), 1e-14);
}

TEST(Pca, OptimumOfExactlyLowRankData) {
  Rng rng = rng_for(68);
  // Centered data confined to a 2-dimensional subspace.
  const Matrix U = random_stiefel(8, 2, rng);
  Matrix C = gaussian_matrix(2, 30, rng);
  C = C.colwise() - C.rowwise().mean();
  const PcaProblem p(pca_from_data(U * C, 2));
  const PcaOptimum opt = pca_optimum(p);
  EXPECT_NEAR(opt.f_star, -(C * C.transpose()).trace() / 30.0, 1e-12);
  EXPECT_NEAR(opt.eigenvalues.tail(6).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  // The optimum spans range(U).
  EXPECT_LE((opt.X_star - U * (U.transpose() * opt.X_star)).norm(), 1e-10);
}

TEST(Pca, FullRankOptimumIsTrace) {
  const PcaInstance inst = pca_generate(6, 40, 6, 69);
  const PcaProblem p(inst);
  const PcaOptimum opt = pca_optimum(p);
  EXPECT_NEAR(opt.f_star, -oracle::centered_covariance(inst.A).trace(), 1e-13);
}

TEST(Pca, OptimumIsStationaryAndMatchesOracle) {
  const PcaInstance inst = pca_generate(20, 100, 3, 70);
  const PcaProblem p(inst);
  const PcaOptimum opt = pca_optimum(p);
  EXPECT_LE(orthonormality_error(opt.X_star), 1e-12);
  const Matrix g = d_rho_matrix(opt.X_star, p.full_grad(opt.X_star), 0.0);
  EXPECT_LE(g.norm(), 1e-12);
  const oracle::Eig eig = oracle::dense_pca_eig(inst.A);
  EXPECT_NEAR(opt.f_star, -eig.values.head(3).sum(), 1e-12 * std::abs(opt.f_star));
  EXPECT_NEAR(p.value(opt.X_star), opt.f_star, 1e-12);
  Rng rng = rng_for(71);
  for (int k = 0; k < 20; ++k) EXPECT_GE(p.value(random_stiefel(20, 3, rng)), opt.f_star - 1e-12);
}

TEST(Pca, RelativeError) {
  EXPECT_DOUBLE_EQ(relative_error(-0.9, -1.0), 0.09999999999999998);
  EXPECT_DOUBLE_EQ(relative_error(0.25, 0.0), 0.25);
}

TEST(Pca, ConstantsBoundSampledRatios) {
  const PcaProblem p(pca_generate(10, 50, 2, 72));
  const ProblemConstants c = p.constants();
  EXPECT_EQ(c.source, ConstantsSource::Analytic);
  EXPECT_DOUBLE_EQ(c.C, c.L * std::sqrt(2.0));
  Rng rng = rng_for(73);
  std::uniform_int_distribution<Index> pick(0, 49);
  for (int t = 0; t < 200; ++t) {
    const Matrix X = random_stiefel(10, 2, rng);
    const Matrix Y = random_stiefel(10, 2, rng);
    const Index i = pick(rng);
    const Matrix gx = p.component_grad(X, i);
    EXPECT_LE((gx - p.component_grad(Y, i)).norm(), c.L * (X - Y).norm() * (1 + 1e-12));
    EXPECT_LE(gx.norm(), c.C);
  }
}

TEST(Pca, SingleDirectionConstant) {
  // Two samples +-e1: both centered columns have unit norm, so L = 2.
  Matrix A = Matrix::Zero(3, 2);
  A(0, 0) = 1;
  A(0, 1) = -1;
  const PcaProblem p(pca_from_data(A, 1));
  EXPECT_DOUBLE_EQ(p.constants().L, 2.0);
  Matrix X = Matrix::Zero(3, 1);
  X(0, 0) = 1;
  EXPECT_DOUBLE_EQ(p.component_grad(X, 0).norm(), 2.0);
}

TEST(Pca, RejectsBadInput) {
  EXPECT_THROW(pca_from_data(Matrix::Zero(3, 4), 4), Error);
  Matrix A = Matrix::Ones(3, 4);
  A(1, 1) = std::nan("");
  EXPECT_THROW(pca_from_data(A, 1), Error);
}

TEST(McGenerator, SampleSizeIsExact) {
  EXPECT_EQ(mc_sample_size(200, 400, 5), 14875u);
  const McInstance inst = mc_generate(30, 40, 2, 5.0, 74);
  EXPECT_EQ(inst.observed(), mc_sample_size(30, 40, 2));
  for (const McColumn& c : inst.columns) {
    EXPECT_TRUE(std::is_sorted(c.rows.begin(), c.rows.end()));
    EXPECT_EQ(std::adjacent_find(c.rows.begin(), c.rows.end()), c.rows.end());
  }
}

TEST(McGenerator, SingularValuesSpanCondition) {
  const McInstance inst = mc_generate(30, 40, 3, 10.0, 75);
  Eigen::JacobiSVD<Matrix> svd(*inst.M_true);
  const Vector s = svd.singularValues().head(3) / std::sqrt(30.0 * 40.0);
  EXPECT_NEAR(s(0), 10.0, 1e-10);
  EXPECT_NEAR(s(1), std::sqrt(10.0), 1e-10);
  EXPECT_NEAR(s(2), 1.0, 1e-10);
  EXPECT_LE(svd.singularValues()(3), 1e-9);
}

TEST(McGenerator, RankOneUnitCondition) {
  const McInstance inst = mc_generate(10, 12, 1, 1.0, 76);
  Eigen::JacobiSVD<Matrix> svd(*inst.M_true);
  EXPECT_NEAR(svd.singularValues()(0), std::sqrt(120.0), 1e-10);
}

TEST(McGenerator, ObservedValuesComeFromTruth) {
  const McInstance inst = mc_generate(15, 20, 2, 3.0, 77);
  for (const Observation& o : mc_observations(inst)) EXPECT_EQ(o.value, (*inst.M_true)(o.row, o.col));
}

TEST(McGenerator, Deterministic) {
  const McInstance a = mc_generate(15, 20, 2, 3.0, 78);
  const McInstance b = mc_generate(15, 20, 2, 3.0, 78);
  EXPECT_EQ(*a.M_true, *b.M_true);
  const auto oa = mc_observations(a);
  const auto ob = mc_observations(b);
  ASSERT_EQ(oa.size(), ob.size());
  for (std::size_t k = 0; k < oa.size(); ++k) EXPECT_TRUE(oa[k].row == ob[k].row && oa[k].col == ob[k].col);
}

TEST(McGenerator, TooManySamples) {
  try {
    mc_generate(3, 3, 2, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManySamples);
  }
  EXPECT_THROW(mc_generate(5, 5, 6, 1.0, 1), Error);
  EXPECT_THROW(mc_generate(5, 50, 1, 0.5, 1), Error);
}

TEST(Mc, TrueSubspaceFitsExactly) {
  const McInstance inst = mc_generate(30, 40, 2, 4.0, 79);
  const McProblem p(inst);
  Eigen::JacobiSVD<Matrix> svd(*inst.M_true, Eigen::ComputeThinU);
  const Matrix U = svd.matrixU().leftCols(2);
  EXPECT_LE(p.value(U), 1e-20);
  EXPECT_LE(p.full_grad(U).norm(), 1e-10);
  EXPECT_LE(recovery_error(p, U), 1e-10);
}

TEST(Mc, HandColumnLeastSquares) {
  // One column observed at rows 0 and 1 with values (1, 3); X = e1 fits only row 0.
  const McProblem p(mc_from_observations(3, 1, 1, {{0, 0, 1.0}, {1, 0, 3.0}}));
  Matrix X = Matrix::Zero(3, 1);
  X(0, 0) = 1;
  EXPECT_DOUBLE_EQ(p.component_value(X, 0), 9.0);
  // a = 1, residual (0, -3): gradient 2 res a^T on observed rows, plus no change elsewhere.
  Matrix g = Matrix::Zero(3, 1);
  g(1, 0) = -6.0;
  EXPECT_LE((p.component_grad(X, 0) - g).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(p.observed_energy(), 10.0);
}

TEST(Mc, GradientAgreesWithFiniteDifferences) {
  Rng rng = rng_for(80);
  const McProblem p(mc_generate(30, 40, 2, 4.0, 81));
  const Matrix X = random_stiefel(30, 2, rng);
  // The value re-solves the coefficients at every perturbed point.
  expect_gradient_matches_fd([&](const Matrix& Y) { return p.value(Y); }, p.full_grad(X), X, rng);
  expect_gradient_matches_fd([&](const Matrix& Y) { return p.component_value(Y, 3); }, p.component_grad(X, 3), X, rng);
}

TEST(Mc, ValuesNonnegativeAndConsistent) {
  Rng rng = rng_for(82);
  const McProblem p(mc_generate(20, 30, 2, 2.0, 83));
  std::vector<Index> all(30);
  for (Index i = 0; i < 30; ++i) all[i] = i;
  for (int t = 0; t < 10; ++t) {
    const Matrix X = random_stiefel(20, 2, rng);
    double sum = 0.0;
    for (Index i = 0; i < 30; ++i) {
      const double fi = p.component_value(X, i);
      EXPECT_GE(fi, 0.0);
      sum += fi;
    }
    EXPECT_NEAR(p.value(X), sum / 30.0, 1e-12);
    EXPECT_LE(p.value(X), p.observed_energy() + 1e-12);
    EXPECT_LE((p.full_grad(X) - p.batch_grad(X, all) / 30.0).norm(), 1e-12);
    const Matrix Y = random_stiefel(20, 2, rng);
    EXPECT_LE((p.batch_grad_difference(X, Y, all) - p.batch_grad(X, all) + p.batch_grad(Y, all)).norm(), 1e-11);
  }
}

TEST(Mc, ConstantsAreFlaggedEstimates) {
  const McProblem p(mc_generate(20, 30, 2, 2.0, 84));
  const ProblemConstants c = mc_estimate_constants(p, 100, 5);
  EXPECT_EQ(c.source, ConstantsSource::PowerIteration);
  EXPECT_GT(c.L, 0.0);
  EXPECT_GT(c.C, 0.0);
  EXPECT_EQ(p.constants().source, ConstantsSource::PowerIteration);
}

TEST(Mc, RegularizerValues) {
  EXPECT_EQ(g1_regularizer(0.5), 0.0);
  EXPECT_EQ(g1_regularizer(1.0), 0.0);
  EXPECT_NEAR(g1_regularizer(2.0), std::exp(1.0) - 1.0, 1e-15);
}

TEST(Mc, RegularizedObjectiveReducesWhenIncoherent) {
  const McInstance inst = mc_generate(20, 30, 2, 2.0, 85);
  Rng rng = rng_for(86);
  const Matrix W = random_stiefel(20, 2, rng);
  const Matrix Z = random_stiefel(30, 2, rng);
  // Rows of orthonormal factors have norm <= 1 < 3 mu0 r.
  EXPECT_DOUBLE_EQ(tilde_f(inst, W, Z, 1.0, 1.0), mc_factor_objective(inst, W, Z));
  EXPECT_GT(tilde_f(inst, 10.0 * W, Z, 1.0, 1.0), mc_factor_objective(inst, 10.0 * W, Z));
}

TEST(Mc, FactorObjectiveVanishesAtTruth) {
  const McInstance inst = mc_generate(20, 30, 2, 2.0, 87);
  Eigen::JacobiSVD<Matrix> svd(*inst.M_true, Eigen::ComputeThinU | Eigen::ComputeThinV);
  EXPECT_LE(mc_factor_objective(inst, svd.matrixU().leftCols(2), svd.matrixV().leftCols(2)), 1e-18);
}

TEST(Mc, RejectsBadObservations) {
  EXPECT_THROW(mc_from_observations(3, 3, 1, {{3, 0, 1.0}}), Error);
  EXPECT_THROW(mc_from_observations(3, 3, 1, {{0, 0, 1.0}, {0, 0, 2.0}}), Error);
  EXPECT_THROW(mc_from_observations(3, 3, 1, {}), Error);
}

class DataIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ssvrg_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(DataIo, MatrixRoundTrips) {
  Rng rng = rng_for(88);
  const Matrix A = gaussian_matrix(7, 5, rng);
  write_matrix_csv(dir_ / "a.csv", A);
  EXPECT_EQ(read_matrix(dir_ / "a.csv"), A);
  write_matrix_binary(dir_ / "a.bin", A);
  EXPECT_EQ(read_matrix(dir_ / "a.bin"), A);
}

TEST_F(DataIo, TriplesRoundTrip) {
  const McInstance inst = mc_generate(10, 12, 1, 1.0, 89);
  write_mc_triples(dir_ / "m.txt", mc_observations(inst));
  const McInstance back = load_mc_instance(dir_ / "m.txt", 1, 10, 12);
  const auto a = mc_observations(inst);
  const auto b = mc_observations(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].row, b[k].row);
    EXPECT_EQ(a[k].col, b[k].col);
    EXPECT_EQ(a[k].value, b[k].value);
  }
}

TEST_F(DataIo, TriplesAreOneBasedWithComments) {
  {
    std::ofstream out(dir_ / "t.txt");
    out << "# header\n1 1 2.5\n3 2 -1\n";
  }
  const McInstance inst = load_mc_instance(dir_ / "t.txt", 1);
  EXPECT_EQ(inst.d, 3);
  EXPECT_EQ(inst.n, 2);
  EXPECT_EQ(inst.columns[1].rows.front(), 2);
  EXPECT_EQ(inst.columns[1].values(0), -1.0);
}

TEST_F(DataIo, MissingFileIsIoError) {
  try {
    read_matrix(dir_ / "nope.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

}  // namespace
}  // namespace ssvrg
