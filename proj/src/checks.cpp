#include "ssvrg/checks.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <span>

#include <fmt/format.h>

#include "ssvrg/bench.hpp"
#include "ssvrg/mc.hpp"
#include "ssvrg/oracles.hpp"
#include "ssvrg/pca.hpp"
#include "ssvrg/schedule.hpp"

namespace ssvrg {

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// PCA acceptance runs are reused by the determinism and Lojasiewicz checks.
struct Shared {
  std::map<RetractionKind, ExperimentResult> pca;
  double f_star_oracle = 0.0;
};

constexpr std::array<RetractionKind, 7> kBenchKinds = {RetractionKind::Exp1, RetractionKind::Qr,
                                                        RetractionKind::Pd,   RetractionKind::Wy,
                                                        RetractionKind::Jd,   RetractionKind::Gp,
                                                        RetractionKind::Gr};

ExperimentSpec desk_pca_spec(RetractionKind kind, int jobs) {
  ExperimentSpec s;
  s.problem = ProblemKind::Pca;
  s.method = Method::SSvrgBb;
  s.retraction = kind;
  s.d = 200;
  s.n = 2000;
  s.r = 5;
  s.rho = 0.0;
  s.step = parse_step("bb:1");
  s.runs = 20;
  s.seed = 1;
  s.jobs = jobs;
  return s;
}

Outcome check_retraction_axioms() {
  const std::array<double, 4> ts = {0.01, 0.1, 1.0, 10.0};
  double worst_origin = 0.0;
  double worst_feas = 0.0;
  double worst_fd = 0.0;
  std::string worst_kind;
  for (RetractionKind kind : kAllRetractions) {
    Rng rng(splitmix64(0xa11ULL + static_cast<std::uint64_t>(kind)));
    const Retraction retr{kind, JdPhi::Linear};
    for (int trial = 0; trial < 500; ++trial) {
      const RetractionCurve c = sample_curve(retr, 50, 5, rng);
      worst_origin = std::max(worst_origin, (c.at(0.0) - c.X).norm());
      for (double t : ts) worst_feas = std::max(worst_feas, orthonormality_error(c.at(t)));
      const double fd = oracle::rel_diff(oracle::fd_derivative(c.at), c.velocity);
      if (fd > worst_fd) {
        worst_fd = fd;
        worst_kind = std::string(to_string(kind));
      }
    }
  }
  const bool pass = worst_origin <= 1e-12 && worst_feas <= 1e-10 && worst_fd <= 1e-5;
  return {pass, fmt::format("max |R(0)-X| {:.1e}, max feasibility {:.1e}, max fd rel {:.1e} ({})",
                            worst_origin, worst_feas, worst_fd, worst_kind)};
}

Outcome check_bound_constants() {
  std::string detail;
  bool pass = true;
  for (RetractionKind kind : {RetractionKind::Pd, RetractionKind::Qr}) {
    const L1L2Estimate cert = *certified_l1_l2(kind);
    const L1L2Estimate est = estimate_l1_l2(Retraction{kind}, 10000, 0xb0b0ULL + static_cast<std::uint64_t>(kind));
    const bool ok = est.L1_hat <= cert.L1_hat + 1e-8 && est.L2_hat <= cert.L2_hat + 1e-8;
    pass = pass && ok;
    detail += fmt::format("{}{}: L1 {:.4f} <= {:.4f}, L2 {:.4f} <= {:.4f}", detail.empty() ? "" : "; ",
                          to_string(kind), est.L1_hat, cert.L1_hat, est.L2_hat, cert.L2_hat);
  }
  return {pass, detail};
}

Outcome check_wy_jd() {
  Rng rng(splitmix64(0x3e3eULL));
  std::uniform_real_distribution<double> t_dist(0.0, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const RetractionCurve c = sample_curve(Retraction{RetractionKind::Wy}, 50, 5, rng);
    const double t = t_dist(rng);
    const Matrix wy = retract(Retraction{RetractionKind::Wy}, c.X, c.velocity, t);
    const Matrix jd = retract(Retraction{RetractionKind::Jd, JdPhi::Linear}, c.X, c.velocity, t);
    worst = std::max(worst, (wy - jd).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt::format("max |wy - jd| {:.1e} over 200 draws", worst)};
}

Outcome check_unbiased() {
  const PcaInstance inst = pca_generate(10, 6, 2, 0x4c32ULL);
  const PcaProblem problem(inst);
  const double L = problem.constants().L;
  // Independent component gradients from the raw data.
  const Matrix B = inst.A.colwise() - inst.A.rowwise().mean();
  auto oracle_grad = [&B](const Matrix& X, long long i) -> Matrix {
    return -2.0 * B.col(i) * (B.col(i).transpose() * X);
  };

  Rng rng(splitmix64(0x1e2aULL));
  double worst_mean = 0.0;
  double worst_ratio = 0.0;
  double worst_oracle = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const Matrix Xk = qr_positive(gaussian_matrix(10, 2, rng)).Q;
    const Matrix X0 = qr_positive(gaussian_matrix(10, 2, rng)).Q;
    const Matrix full0 = problem.full_grad(X0);
    const double dist2 = (Xk - X0).squaredNorm();
    for (double rho : {0.0, 0.25, 1.0}) {
      const double nu = MetricParams::from_rho(rho).nu;
      const Matrix grad = d_rho_matrix(Xk, problem.full_grad(Xk), rho);
      const double scale = std::max(1.0, grad.norm());
      for (int b : {1, 2}) {
        std::vector<Matrix> samples;
        std::vector<Index> batch(static_cast<std::size_t>(b));
        const Index total = b == 1 ? 6 : 36;
        for (Index code = 0; code < total; ++code) {
          batch[0] = code % 6;
          if (b == 2) batch[1] = code / 6;
          samples.push_back(svrg_gradient(problem, Xk, X0, full0, batch, rho));
        }
        Matrix mean = Matrix::Zero(10, 2);
        for (const Matrix& s : samples) mean += s;
        mean /= static_cast<double>(samples.size());
        double second = 0.0;
        for (const Matrix& s : samples) second += (s - grad).squaredNorm();
        second /= static_cast<double>(samples.size());
        const double bound = L * L / (nu * nu * b) * dist2;

        const oracle::Expectation ex = oracle::brute_force_expectation(oracle_grad, 6, Xk, X0, b, rho);
        worst_mean = std::max({worst_mean, (mean - grad).norm() / scale, (ex.mean - ex.grad).norm() / scale});
        worst_oracle = std::max({worst_oracle, (ex.grad - grad).norm() / scale,
                                 std::abs(ex.second_moment - second) / std::max(1.0, second)});
        worst_ratio = std::max({worst_ratio, second / bound, ex.second_moment / bound});
      }
    }
  }
  const bool pass = worst_mean <= 1e-12 && worst_oracle <= 1e-12 && worst_ratio <= 1.0;
  return {pass, fmt::format("max |E G - grad| {:.1e}, oracle gap {:.1e}, max variance / bound {:.3f}",
                            worst_mean, worst_oracle, worst_ratio)};
}

Outcome check_recursion() {
  // Hand case: K = 2, a = b = c = d = 1, a_0 = 1. Delta_0 = 0, Delta_1 = 1,
  // so the bound is f_0 - a_1 and the recursion gives the same value.
  RecursionCase hand{{1.0, 0.5}, 1.0, 1.0, 1.0, 1.0, 3.0};
  const RecursionResult hr = recursion_check(hand);
  const bool hand_ok = hr.f_K == 2.5 && hr.bound == 2.5 && hr.holds;

  Rng rng(splitmix64(0x1e3ULL));
  std::uniform_int_distribution<int> K_dist(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    RecursionCase rc;
    rc.a_seq.resize(static_cast<std::size_t>(K_dist(rng)));
    for (double& a : rc.a_seq) a = u(rng) < 0.2 ? 0.0 : 10.0 * u(rng);
    rc.a = 0.01 + 2.0 * u(rng);
    do rc.b = 0.01 + 2.0 * u(rng);
    while (std::abs(rc.b - 1.0) < 1e-3);
    rc.c = 0.01 + 2.0 * u(rng);
    rc.d = 0.01 + 2.0 * u(rng);
    rc.f0 = 100.0 * (u(rng) - 0.5);
    const RecursionResult res = recursion_check(rc);
    if (!res.holds) ++violations;
    tightest = std::min(tightest, res.bound - res.f_K);
  }
  return {hand_ok && violations == 0,
          fmt::format("hand case f_K {} vs {}, {} / 1000 violations, min slack {:.2e}", hr.f_K, hr.bound,
                      violations, tightest)};
}

Outcome check_schedule() {
  ScheduleInputs base;
  base.n = 1000;
  base.mu = 0.0;
  base.kappa = 1.0;
  base.L = 2.0;
  base.C = 0.5;
  base.L1 = 1.0;
  base.L2 = 0.5;
  base.r = 5;
  base.nu = 1.0;
  const Schedule s = decrease_schedule(base);
  const double ratio = s.L_hat / (std::sqrt(s.L_tilde) * base.L);
  const double slack = std::abs(c_condition(ratio, s.c) - 1.0);
  const bool base_ok = s.K == 10 && s.batch == 100 && !s.c_capped && slack <= 1e-6;

  Rng rng(splitmix64(0x7e01ULL));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int sets = 0;
  int bad = 0;
  double worst = std::numeric_limits<double>::infinity();
  while (sets < 50) {
    ScheduleInputs in;
    in.n = 100 + static_cast<long long>(u(rng) * 20000);
    in.mu = (2.0 / 3.0) * u(rng);
    in.kappa = std::pow(10.0, u(rng) * 2.0 - 1.0);
    in.L = std::pow(10.0, u(rng) * 2.0);
    in.L1 = 1.0 + u(rng);
    in.L2 = 0.05 + 2.0 * u(rng);
    in.r = 1 + static_cast<long long>(u(rng) * 10);
    in.nu = std::array<double, 3>{1.0, 0.5, 0.25}[static_cast<std::size_t>(u(rng) * 3) % 3];
    const double L_tilde = in.L1 * in.L1 + 4.0 * in.L2 * std::sqrt(static_cast<double>(in.r));
    const double C_max = (std::sqrt(L_tilde) * in.L - in.L1 * in.L1 * in.L) / (2.0 * in.L2);
    if (!(C_max > 0.0)) continue;
    in.C = C_max * (0.01 + 0.99 * u(rng));
    if (std::ceil(std::pow(in.kappa * in.n, 1.0 / (3.0 * (1.0 - in.mu)))) > 2e6) continue;
    ++sets;
    const Schedule sc = decrease_schedule(in);
    const double floor = in.nu * sc.tau / 2.0;
    const double dmin = *std::min_element(sc.delta.begin(), sc.delta.end());
    worst = std::min(worst, dmin / floor);
    if (dmin < floor * (1.0 - 1e-12)) ++bad;
  }
  return {base_ok && bad == 0,
          fmt::format("K {} |B| {} c {:.6f} slack {:.1e}; min Delta / (nu tau / 2) {:.4f} over 50 sets", s.K,
                      s.batch, s.c, slack, worst)};
}

constexpr std::size_t kTailWindow = 1000;

Outcome check_pca_desk(const CheckOptions& opt, Shared& shared) {
  const oracle::Eig eig = oracle::dense_pca_eig(pca_generate_data(200, 2000, 1));
  shared.f_star_oracle = -eig.values.head(5).sum();
  bool pass = true;
  std::string detail;
  for (RetractionKind kind : kBenchKinds) {
    ExperimentResult res = run_experiment(desk_pca_spec(kind, opt.jobs));
    const SummaryRow& row = res.summary;
    // Tail: every record with rel_err in (1e-13, 1e-4]. BB steps make single
    // runs non-monotone, so R^2 is averaged over seeds; slopes must all be negative.
    double worst_r2 = 1.0;
    double mean_r2 = 0.0;
    double worst_slope = -std::numeric_limits<double>::infinity();
    for (const RunOutcome& r : res.runs) {
      const TailFit fit = tail_log_fit(r.trace.epochs, kTailWindow, 1e-13, 1e-4);
      worst_r2 = std::min(worst_r2, fit.r_squared);
      mean_r2 += fit.r_squared / static_cast<double>(res.runs.size());
      worst_slope = std::max(worst_slope, fit.slope);
    }
    const bool oracle_ok = std::abs(res.f_reference - shared.f_star_oracle) <= 1e-12 * std::abs(shared.f_star_oracle);
    const bool ok = row.converged == row.runs && row.failed == 0 && row.err_bar <= 1e-8 && worst_slope < 0.0 &&
                    mean_r2 >= 0.9 && oracle_ok;
    pass = pass && ok;
    detail += fmt::format("{}{} {}/{} ep {:.1f} err {:.0e} slope<={:.3f} R2 {:.3f} (min {:.3f})",
                          detail.empty() ? "" : "; ", to_string(kind), row.converged, row.runs, row.epoch_avg,
                          row.err_bar, worst_slope, mean_r2, worst_r2);
    shared.pca.emplace(kind, std::move(res));
  }
  return {pass, detail};
}

Outcome check_pca_large(const CheckOptions& opt) {
  ExperimentSpec s;
  s.problem = ProblemKind::Pca;
  s.method = Method::SSvrg;
  s.retraction = RetractionKind::Pd;
  s.d = 1000;
  s.n = 10000;
  s.r = 10;
  s.step = parse_step("fixed:1.2");
  s.runs = opt.large_runs;
  s.jobs = opt.jobs;
  const SummaryRow row = run_experiment(s).summary;
  const bool pass = row.converged == row.runs && row.epoch_avg >= 30.0 && row.epoch_avg <= 90.0;
  return {pass, fmt::format("epochs {}/{:.1f}/{} over {} runs, {} converged, err {:.0e}", row.epoch_min,
                            row.epoch_avg, row.epoch_max, row.runs, row.converged, row.err_bar)};
}

Outcome check_mc_desk(const CheckOptions& opt) {
  ExperimentSpec s;
  s.problem = ProblemKind::Mc;
  s.method = Method::SSvrgBb;
  s.retraction = RetractionKind::Jd;
  s.d = 200;
  s.n = 400;
  s.r = 5;
  s.cond = 10.0;
  s.rho = 0.0;
  s.step = parse_step("bb:1");
  s.runs = 20;
  s.seed = 1;
  s.jobs = opt.jobs;
  const std::size_t omega = mc_sample_size(200, 400, 5);
  const ExperimentResult res = run_experiment(s);
  int good = 0;
  double worst_rec = 0.0;
  double worst_f = 0.0;
  for (const RunOutcome& r : res.runs) {
    if (r.status != RunStatus::Failed && r.f <= 1e-10 && r.recovery_err <= 1e-4) ++good;
    worst_rec = std::max(worst_rec, r.recovery_err);
    worst_f = std::max(worst_f, r.f);
  }
  return {good >= 18 && omega == 14875,
          fmt::format("|Omega| {}, {}/20 recovered, max f {:.1e}, max recovery err {:.1e}", omega, good, worst_f,
                      worst_rec)};
}

bool same_numbers(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const EpochRecord& x = a[i];
    const EpochRecord& y = b[i];
    const bool err_same = (std::isnan(x.rel_err) && std::isnan(y.rel_err)) || x.rel_err == y.rel_err;
    if (x.epoch != y.epoch || x.f != y.f || x.grad_norm != y.grad_norm || x.step_size != y.step_size ||
        x.ifo_calls != y.ifo_calls || x.ro_calls != y.ro_calls || !err_same) {
      return false;
    }
  }
  return true;
}

Outcome check_determinism(const CheckOptions& opt, Shared& shared) {
  int compared = 0;
  int mismatched = 0;
  // Re-run a prefix of an earlier experiment, on a different thread count.
  ExperimentSpec s = desk_pca_spec(RetractionKind::Jd, std::max(2, opt.jobs));
  s.runs = 3;
  const ExperimentResult again = run_experiment(s);
  auto it = shared.pca.find(RetractionKind::Jd);
  const ExperimentResult first = it != shared.pca.end() ? it->second : run_experiment(s);
  for (int i = 0; i < 3; ++i) {
    ++compared;
    if (!same_numbers(first.runs[static_cast<std::size_t>(i)].trace.epochs,
                      again.runs[static_cast<std::size_t>(i)].trace.epochs)) {
      ++mismatched;
    }
  }
  // A small MC experiment run twice.
  ExperimentSpec m;
  m.problem = ProblemKind::Mc;
  m.d = 60;
  m.n = 90;
  m.r = 3;
  m.runs = 2;
  m.max_epochs = 30;
  const ExperimentResult m1 = run_experiment(m);
  const ExperimentResult m2 = run_experiment(m);
  for (std::size_t i = 0; i < m1.runs.size(); ++i) {
    ++compared;
    if (!same_numbers(m1.runs[i].trace.epochs, m2.runs[i].trace.epochs)) ++mismatched;
  }
  return {mismatched == 0, fmt::format("{} traces compared, {} differ", compared, mismatched)};
}

Outcome check_lojasiewicz(const CheckOptions& opt, Shared& shared) {
  if (shared.pca.empty()) check_pca_desk(opt, shared);
  const double f_star = shared.f_star_oracle;
  double worst = 0.0;
  int nonfinite = 0;
  int runs = 0;
  for (const auto& [kind, res] : shared.pca) {
    for (const RunOutcome& r : res.runs) {
      ++runs;
      const std::size_t m = r.trace.epochs.size();
      const std::size_t from = m > 20 ? m - 20 : 0;
      const std::span<const EpochRecord> tail(r.trace.epochs.data() + from, m - from);
      for (double v : loj_ratio_probe(tail, f_star)) {
        if (std::isnan(v)) continue;
        if (!std::isfinite(v)) ++nonfinite;
        else worst = std::max(worst, v);
      }
    }
  }
  constexpr double kBound = 1e3;
  return {nonfinite == 0 && worst <= kBound && runs > 0,
          fmt::format("{} runs, max tail ratio {:.3g} (bound {:g})", runs, worst, kBound)};
}

const char* kTitles[kCheckCount + 1] = {"",
                                        "retraction axioms",
                                        "Pd/Qr bound constants",
                                        "wy/jd equivalence",
                                        "unbiasedness and variance bound",
                                        "recursion bound",
                                        "parameter schedule",
                                        "desk-scale PCA convergence",
                                        "large PCA spot check",
                                        "desk-scale MC recovery",
                                        "determinism",
                                        "Lojasiewicz ratio probe"};

}  // namespace

std::vector<CheckResult> run_checks(const CheckOptions& options, std::vector<int> ids) {
  if (ids.empty()) {
    for (int i = 1; i <= kCheckCount; ++i) ids.push_back(i);
  }
  std::sort(ids.begin(), ids.end());
  Shared shared;
  std::vector<CheckResult> out;
  for (int id : ids) {
    if (id < 1 || id > kCheckCount) continue;
    CheckResult r;
    r.id = id;
    r.title = kTitles[id];
    const auto start = std::chrono::steady_clock::now();
    try {
      Outcome o;
      switch (id) {
        case 1: o = check_retraction_axioms(); break;
        case 2: o = check_bound_constants(); break;
        case 3: o = check_wy_jd(); break;
        case 4: o = check_unbiased(); break;
        case 5: o = check_recursion(); break;
        case 6: o = check_schedule(); break;
        case 7: o = check_pca_desk(options, shared); break;
        case 8:
          if (!options.large_scale) {
            r.verdict = Verdict::Skipped;
            r.detail = "not enabled (hardware-limited; 7 gates instead)";
            break;
          }
          o = check_pca_large(options);
          break;
        case 9: o = check_mc_desk(options); break;
        case 10: o = check_determinism(options, shared); break;
        case 11: o = check_lojasiewicz(options, shared); break;
      }
      if (r.verdict != Verdict::Skipped) {
        r.verdict = o.pass ? Verdict::Pass : Verdict::Fail;
        r.detail = std::move(o.detail);
      }
    } catch (const std::exception& e) {
      r.verdict = Verdict::Fail;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_result) options.on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CheckResult& r) {
  const char* tag = r.verdict == Verdict::Pass ? "PASS" : (r.verdict == Verdict::Fail ? "FAIL" : "SKIP");
  return fmt::format("[{}] {:>2} {}: {} ({:.1f} s)", tag, r.id, r.title, r.detail, r.seconds);
}

}  // namespace ssvrg
