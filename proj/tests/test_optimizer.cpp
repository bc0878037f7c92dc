#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ssvrg/error.hpp"
#include "ssvrg/mc.hpp"
#include "ssvrg/optimizer.hpp"
#include "ssvrg/pca.hpp"
#include "test_util.hpp"

namespace ssvrg {
namespace {

using test::random_stiefel;
using test::rng_for;

SvrgConfig small_config(RetractionKind kind = RetractionKind::Pd) {
  SvrgConfig c;
  c.retraction = Retraction{kind};
  c.step_mode = StepMode::Fixed;
  c.K = 20;
  c.batch = 2;
  c.max_epochs = 5;
  c.seed = 7;
  return c;
}

void expect_same_records(const RunTrace& a, const RunTrace& b) {
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    EXPECT_EQ(a.epochs[i].f, b.epochs[i].f);
    EXPECT_EQ(a.epochs[i].grad_norm, b.epochs[i].grad_norm);
    EXPECT_EQ(a.epochs[i].step_size, b.epochs[i].step_size);
    EXPECT_EQ(a.epochs[i].ifo_calls, b.epochs[i].ifo_calls);
    EXPECT_EQ(a.epochs[i].ro_calls, b.epochs[i].ro_calls);
  }
}

TEST(SvrgGradient, AnchorGivesFullGradient) {
  Rng rng = rng_for(100);
  const PcaProblem p(pca_generate(10, 30, 2, 101));
  const Matrix X = random_stiefel(10, 2, rng);
  const Matrix g = p.full_grad(X);
  const std::vector<Index> batch = {3, 3, 17, 29};
  EXPECT_LE((svrg_euclidean_gradient(p, X, X, g, batch) - g).norm(), 1e-15);
  EXPECT_LE((svrg_gradient(p, X, X, g, batch, 0.5) - d_rho_matrix(X, g, 0.5)).norm(), 1e-15);
  EXPECT_THROW(svrg_gradient(p, X, X, g, {}, 0.0), Error);
}

TEST(SvrgGradient, UnbiasedOverAllBatches) {
  Rng rng = rng_for(102);
  const PcaInstance inst = pca_generate(6, 4, 2, 103);
  const PcaProblem p(inst);
  const Matrix B = inst.A.colwise() - inst.A.rowwise().mean();
  const Matrix X0 = random_stiefel(6, 2, rng);
  const Matrix Xk = random_stiefel(6, 2, rng);
  const Matrix g0 = p.full_grad(X0);
  for (double rho : {0.0, 0.25}) {
    Matrix mean = Matrix::Zero(6, 2);
    for (Index i = 0; i < 4; ++i) {
      const Index batch[] = {i};
      mean += svrg_gradient(p, Xk, X0, g0, batch, rho) / 4.0;
    }
    const Matrix expect = d_rho_matrix(Xk, p.full_grad(Xk), rho);
    EXPECT_LE((mean - expect).norm(), 1e-14);
    const oracle::Expectation ex = oracle::brute_force_expectation(
        [&](const Matrix& X, long long i) -> Matrix { return -2.0 * B.col(i) * (B.col(i).transpose() * X); }, 4,
        Xk, X0, 1, rho);
    EXPECT_LE((ex.mean - expect).norm(), 1e-14);
    EXPECT_LE((mean - ex.mean).norm(), 1e-14);
  }
}

TEST(BbStep, Examples) {
  Rng rng = rng_for(104);
  const Matrix X1 = gaussian_matrix(5, 2, rng);
  const Matrix X0 = gaussian_matrix(5, 2, rng);
  const Matrix G0 = gaussian_matrix(5, 2, rng);
  const Matrix S = X1 - X0;
  EXPECT_NEAR(bb_step(X1, X0, G0 + S, G0, 10, 1e-8, 1e8, RetractionKind::Pd), 0.1, 1e-15);
  EXPECT_NEAR(bb_step(X1, X0, G0 + 2.0 * S, G0, 1, 1e-8, 1e8, RetractionKind::Pd), 0.5, 1e-15);
  EXPECT_NEAR(bb_step(X1, X0, G0 - 2.0 * S, G0, 1, 1e-8, 1e8, RetractionKind::Pd), 0.5, 1e-15);
  EXPECT_NEAR(bb_step(X1, X0, G0 + S, G0, 1, 1e-8, 1e8, RetractionKind::Gr), 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(bb_step(X1, X0, G0 + 1e-12 * S, G0, 4, 1e-8, 1e8, RetractionKind::Pd), 1e8 / 4);
  EXPECT_DOUBLE_EQ(bb_step(X1, X0, G0 + 1e12 * S, G0, 4, 1e-8, 1e8, RetractionKind::Pd), 1e-8 / 4);
  EXPECT_DOUBLE_EQ(bb_step(X1, X0, G0, G0, 5, 1e-8, 1e8, RetractionKind::Pd), 1e8 / 5);
  EXPECT_THROW(bb_step(X1, X0, G0, G0, 0, 1e-8, 1e8, RetractionKind::Pd), Error);
}

TEST(SSvrg, ZeroStepIsStationary) {
  const PcaProblem p(pca_generate(10, 40, 2, 105));
  SvrgConfig c = small_config();
  c.tau = 0.0;
  c.warm_start = false;
  const RunResult r = run_s_svrg(p, c);
  EXPECT_EQ(r.trace.status, RunStatus::MaxEpochs);
  EXPECT_EQ(r.trace.epochs_run(), 5);
  for (const EpochRecord& e : r.trace.epochs) EXPECT_EQ(e.f, r.trace.epochs.front().f);
  EXPECT_EQ(r.X, initial_point(p, c));
}

TEST(SSvrg, SingleInnerStepMatchesGradientDescent) {
  const PcaProblem p(pca_generate(12, 50, 3, 106));
  for (RetractionKind kind : {RetractionKind::Pd, RetractionKind::Qr, RetractionKind::Gr}) {
    SvrgConfig c = small_config(kind);
    c.K = 1;
    c.batch = 7;
    c.tau = 0.2;
    const RunResult svrg = run_s_svrg(p, c);
    const RunResult gd = run_rgd(p, c);
    EXPECT_LE((svrg.X - gd.X).norm(), 1e-13) << to_string(kind);
  }
}

TEST(SSvrg, DeterministicForSeed) {
  const PcaProblem p(pca_generate(10, 40, 2, 107));
  SvrgConfig c = small_config();
  c.step_mode = StepMode::BB;
  const RunResult a = run_s_svrg(p, c);
  const RunResult b = run_s_svrg(p, c);
  EXPECT_EQ(a.X, b.X);
  expect_same_records(a.trace, b.trace);
  c.run_id = 1;
  EXPECT_NE(run_s_svrg(p, c).X, a.X);
}

TEST(SSvrg, WorkCounters) {
  const PcaProblem p(pca_generate(10, 40, 2, 108));
  SvrgConfig c = small_config();
  c.tau = 0.05;
  const RunResult r = run_s_svrg(p, c);
  for (const EpochRecord& e : r.trace.epochs) {
    EXPECT_EQ(e.ifo_calls, e.epoch * (40 + 2 * c.K * c.batch));
    EXPECT_EQ(e.ro_calls, e.epoch * c.K);
  }
}

TEST(SSvrg, BbFirstEpochUsesInitialTau) {
  const PcaProblem p(pca_generate(10, 40, 2, 109));
  SvrgConfig c = small_config();
  c.step_mode = StepMode::BB;
  c.tau = 3.0;
  const RunResult r = run_s_svrg(p, c);
  EXPECT_DOUBLE_EQ(r.trace.epochs.front().step_size, 3.0 / 20.0);
}

TEST(SSvrg, PolarFixedStepReachesOptimum) {
  const PcaProblem p(pca_generate(50, 500, 3, 110));
  const double f_star = pca_optimum(p).f_star;
  SvrgConfig c = small_config(RetractionKind::Pd);
  c.K = 100;
  c.batch = 5;
  c.tau = 0.2;
  c.max_epochs = 200;
  c.error_reference = ErrorReference{f_star, std::abs(f_star)};
  const RunResult r = run_s_svrg(p, c);
  EXPECT_EQ(r.trace.status, RunStatus::GradTol);
  EXPECT_LE(r.trace.epochs.back().rel_err, 1e-8);
  EXPECT_LE(orthonormality_error(r.X), 1e-10);
  const TailFit fit = tail_log_fit(r.trace.epochs);
  EXPECT_LT(fit.slope, 0.0);
}

TEST(SSvrg, ScheduledModeDecreases) {
  const PcaProblem p(pca_generate(10, 64, 2, 111));
  SvrgConfig c = small_config();
  c.step_mode = StepMode::Scheduled;
  c.mu = 0.0;
  c.kappa = 1.0;
  c.max_epochs = 10;
  const RunResult r = run_s_svrg(p, c);
  ASSERT_TRUE(r.trace.schedule.has_value());
  EXPECT_EQ(r.trace.schedule->K, 4);
  EXPECT_EQ(r.trace.schedule->batch, 16);
  EXPECT_LT(r.trace.epochs.back().f, r.trace.epochs.front().f);
  for (const EpochRecord& e : r.trace.epochs) EXPECT_EQ(e.step_size, r.trace.schedule->tau);
}

TEST(SSvrg, SampledOutputModesReturnIterates) {
  const PcaProblem p(pca_generate(10, 40, 2, 112));
  for (OutputMode mode : {OutputMode::SampledPsk, OutputMode::SampledLinear}) {
    SvrgConfig c = small_config();
    c.tau = 0.05;
    c.output_mode = mode;
    const RunResult r = run_s_svrg(p, c);
    EXPECT_LE(orthonormality_error(r.X), 1e-10);
    EXPECT_LT(p.value(r.X), r.trace.epochs.front().f);
  }
}

TEST(SSvrg, GrassmannExponentialRuns) {
  const PcaProblem p(pca_generate(10, 40, 2, 113));
  SvrgConfig c = small_config(RetractionKind::Exp2);
  c.step_mode = StepMode::BB;
  c.max_epochs = 30;
  const RunResult r = run_s_svrg(p, c);
  EXPECT_LT(r.trace.epochs.back().grad_norm, r.trace.epochs.front().grad_norm);
  c.rho = 0.5;
  EXPECT_THROW(run_s_svrg(p, c), Error);
}

TEST(SvrgConfigValidation, Rejects) {
  SvrgConfig c;
  c.K = 0;
  EXPECT_THROW(validate(c), Error);
  c = SvrgConfig{};
  c.tau_min = 1.0;
  c.tau_max = 1.0;
  EXPECT_THROW(validate(c), Error);
  c = SvrgConfig{};
  c.rho = -1.0;
  EXPECT_THROW(validate(c), Error);
  c = SvrgConfig{};
  c.step_mode = StepMode::Scheduled;
  c.mu = 0.9;
  EXPECT_THROW(validate(c), Error);
  EXPECT_NO_THROW(validate(SvrgConfig{}));
}

TEST(Rgd, RejectsScheduledSteps) {
  const PcaProblem p(pca_generate(10, 40, 2, 114));
  SvrgConfig c = small_config();
  c.step_mode = StepMode::Scheduled;
  EXPECT_THROW(run_rgd(p, c), Error);
}

TEST(OutputSelection, LastAndDegenerate) {
  std::vector<Matrix> its = {Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0)};
  Rng rng = rng_for(115);
  EXPECT_EQ(select_output(its, {}, OutputMode::LastIterate, rng)(0, 0), 2.0);
  const std::vector<double> p = {0.0, 1.0, 0.0};
  for (int t = 0; t < 20; ++t) EXPECT_EQ(select_output(its, p, OutputMode::SampledPsk, rng)(0, 0), 1.0);
  EXPECT_THROW(select_output(its, std::vector<double>{1.0}, OutputMode::SampledPsk, rng), Error);
}

TEST(OutputSelection, FrequenciesMatchProbabilities) {
  const std::vector<double> p = {0.2, 0.3, 0.5};
  Rng rng = rng_for(116);
  std::vector<int> count(3, 0);
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) ++count[sample_index(p, rng)];
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(count[k] / double(draws), p[k], 0.01);
}

TEST(WarmStart, SharedAcrossMethodsAndFeasible) {
  const PcaProblem p(pca_generate(10, 40, 2, 117));
  SvrgConfig c = small_config();
  c.max_epochs = 0;
  const RunResult a = run_s_svrg(p, c);
  const RunResult b = run_rgd(p, c);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.X, warm_start(p, c));
  EXPECT_LE(orthonormality_error(a.X), 1e-10);
}

TEST(WarmStart, UsuallyImproves) {
  const PcaProblem p(pca_generate(20, 200, 3, 118));
  int better = 0;
  for (int t = 0; t < 50; ++t) {
    SvrgConfig c = small_config();
    c.run_id = static_cast<std::uint64_t>(t);
    c.K = 200;
    if (p.value(warm_start(p, c)) < p.value(initial_point(p, c))) ++better;
  }
  EXPECT_GE(better, 40);
}

TEST(SSgd, StepRule) {
  EXPECT_DOUBLE_EQ(sgd_step_rule(1.0, 4.0, 1.0, 1.0, 100), 0.1);
  EXPECT_DOUBLE_EQ(sgd_step_rule(1.0, 4.0, 1.0, 0.1, 4), 0.25);
  EXPECT_DOUBLE_EQ(sgd_step_rule(1.0, 4.0, 1.0, 0.0, 4), 0.25);
  EXPECT_THROW(sgd_step_rule(1.0, 0.0, 1.0, 1.0, 4), Error);
}

TEST(SSgd, SingleComponentIsGradientDescent) {
  // With n = 1 every sampled gradient is the full gradient.
  const McProblem p(mc_from_observations(5, 1, 1, {{0, 0, 1.0}, {1, 0, -2.0}, {2, 0, 0.5}, {4, 0, 3.0}}));
  SvrgConfig c = small_config();
  c.tau = 0.05;
  c.max_epochs = 6;
  SgdOptions o;
  o.N = 6;
  o.record_every = 1;
  o.full_horizon = true;
  const SgdResult sgd = run_s_sgd(p, c, o);
  const RunResult gd = run_rgd(p, c);
  ASSERT_EQ(sgd.trace.epochs.size(), gd.trace.epochs.size());
  for (std::size_t i = 0; i < gd.trace.epochs.size(); ++i) {
    EXPECT_NEAR(sgd.trace.epochs[i].f, gd.trace.epochs[i].f, 1e-13);
  }
  EXPECT_DOUBLE_EQ(sgd.step, 0.05);
}

TEST(SSgd, OneStepHorizonReturnsStart) {
  const PcaProblem p(pca_generate(10, 40, 2, 119));
  SvrgConfig c = small_config();
  SgdOptions o;
  o.N = 1;
  const SgdResult r = run_s_sgd(p, c, o);
  EXPECT_EQ(r.j_bar, 0);
  EXPECT_EQ(r.X, warm_start(p, c));
  SgdOptions none;
  none.N = 0;
  EXPECT_THROW(run_s_sgd(p, c, none), Error);
}

TEST(SSgd, RuleStepUsesEstimatedSigma) {
  const PcaProblem p(pca_generate(10, 40, 2, 120));
  SvrgConfig c = small_config();
  c.step_mode = StepMode::BB;
  SgdOptions o;
  o.N = 400;
  const SgdResult r = run_s_sgd(p, c, o);
  EXPECT_GT(r.sigma, 0.0);
  EXPECT_GT(r.step, 0.0);
  EXPECT_LE(r.step, 1.0 / (r.sigma * std::sqrt(400.0)) * (1 + 1e-12));
}

TEST(SSgd, PlateausWhereVarianceReductionConverges) {
  const PcaProblem p(pca_generate(20, 200, 2, 121));
  SvrgConfig c = small_config();
  c.tau = 0.02;
  SgdOptions o;
  o.N = 200 * 40;
  o.full_horizon = true;
  const SgdResult sgd = run_s_sgd(p, c, o);
  double sgd_floor = sgd.trace.epochs.back().grad_norm;
  for (std::size_t i = sgd.trace.epochs.size() - 10; i < sgd.trace.epochs.size(); ++i) {
    sgd_floor = std::min(sgd_floor, sgd.trace.epochs[i].grad_norm);
  }
  SvrgConfig v = small_config();
  v.step_mode = StepMode::BB;
  v.K = 100;
  v.batch = 2;
  v.max_epochs = 60;
  const RunResult svrg = run_s_svrg(p, v);
  EXPECT_EQ(svrg.trace.status, RunStatus::GradTol);
  EXPECT_GT(sgd_floor, 100.0 * svrg.trace.epochs.back().grad_norm);
}

TEST(Probes, LojasiewiczRatio) {
  std::vector<EpochRecord> recs(3);
  recs[0].f = 1.0;
  recs[0].grad_norm = 0.5;
  recs[1].f = 0.0;
  recs[1].grad_norm = 0.0;
  recs[2].f = 0.25;
  recs[2].grad_norm = 1e-13;
  const std::vector<double> r = loj_ratio_probe(recs, 0.0);
  EXPECT_DOUBLE_EQ(r[0], 2.0);
  EXPECT_EQ(r[1], 0.0);
  EXPECT_TRUE(std::isnan(r[2]));
}

TEST(Probes, TailFitOfGeometricDecay) {
  std::vector<EpochRecord> recs(40);
  for (int s = 0; s < 40; ++s) {
    recs[s].epoch = s;
    recs[s].rel_err = std::pow(0.5, s);
  }
  const TailFit fit = tail_log_fit(recs, 20, 1e-300);
  EXPECT_EQ(fit.points, 20u);
  EXPECT_NEAR(fit.slope, std::log(0.5), 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  // The floor drops records below it before the window is applied.
  EXPECT_EQ(tail_log_fit(recs, 100, 1e-3).points, 10u);
  EXPECT_EQ(tail_log_fit(recs, 100, 1e-300, 0.01).points, 33u);
}

}  // namespace
}  // namespace ssvrg
