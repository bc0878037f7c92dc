#include "ssvrg/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "ssvrg/error.hpp"
#include "ssvrg/rng.hpp"

namespace ssvrg {

std::string_view to_string(StepMode mode) {
  switch (mode) {
    case StepMode::Fixed: return "fixed";
    case StepMode::BB: return "bb";
    case StepMode::Scheduled: return "thm1";
  }
  return "?";
}

std::string_view to_string(OutputMode mode) {
  switch (mode) {
    case OutputMode::LastIterate: return "last";
    case OutputMode::SampledPsk: return "psk";
    case OutputMode::SampledLinear: return "linear";
  }
  return "?";
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::GradTol: return "grad_tol";
    case RunStatus::MaxEpochs: return "max_epochs";
    case RunStatus::Failed: return "failed";
  }
  return "?";
}

int RunTrace::epochs_run() const { return epochs.empty() ? 0 : epochs.back().epoch; }

void validate(const SvrgConfig& c) {
  auto fail = [](const char* msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(c.rho >= 0.0)) fail("rho must be nonnegative");
  if (c.K < 1) fail("K must be >= 1");
  if (c.batch < 1) fail("batch must be >= 1");
  if (c.max_epochs < 0) fail("max_epochs must be >= 0");
  if (!(c.tau >= 0.0) || !std::isfinite(c.tau)) fail("tau must be finite and nonnegative");
  if (!(c.tau_min > 0.0 && c.tau_min < c.tau_max)) fail("need 0 < tau_min < tau_max");
  if (c.step_mode == StepMode::Scheduled && !(c.mu >= 0.0 && c.mu <= 2.0 / 3.0)) fail("mu must lie in [0, 2/3]");
  if (c.step_mode == StepMode::Scheduled && !(c.kappa > 0.0)) fail("kappa must be positive");
  if (c.retraction.kind == RetractionKind::Exp2 && c.rho != 0.0) {
    fail("exp2 is the Grassmann exponential and needs rho = 0");
  }
}

Matrix svrg_euclidean_gradient(const FiniteSumProblem& problem, const Matrix& Xk,
                               const Matrix& X_anchor, const Matrix& full_grad_anchor,
                               std::span<const Index> batch) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "svrg_gradient: empty batch");
  return full_grad_anchor +
         problem.batch_grad_difference(Xk, X_anchor, batch) / static_cast<double>(batch.size());
}

Matrix svrg_gradient(const FiniteSumProblem& problem, const Matrix& Xk, const Matrix& X_anchor,
                     const Matrix& full_grad_anchor, std::span<const Index> batch, double rho) {
  return d_rho_matrix(Xk, svrg_euclidean_gradient(problem, Xk, X_anchor, full_grad_anchor, batch), rho);
}

double bb_step(const Matrix& X_s, const Matrix& X_prev, const Matrix& grad_s, const Matrix& grad_prev,
               long long K, double tau_min, double tau_max, RetractionKind kind) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "bb_step: K >= 1");
  const Matrix S = X_s - X_prev;
  const Matrix Y = grad_s - grad_prev;
  const double sy = std::abs(frob_inner(S, Y));
  if (sy <= 1e-300) return tau_max / static_cast<double>(K);
  double tau = frob_inner(S, S) / sy;
  if (kind == RetractionKind::Gr) tau *= 2.0;
  tau = std::max(tau_min, std::min(tau, tau_max));
  return tau / static_cast<double>(K);
}

std::size_t sample_index(std::span<const double> p, Rng& rng) {
  if (p.empty()) throw Error(ErrorCode::InvalidArgument, "sample_index: empty distribution");
  std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
  return dist(rng);
}

Matrix select_output(std::span<const Matrix> iterates, std::span<const double> p, OutputMode mode,
                     Rng& rng) {
  if (iterates.empty()) throw Error(ErrorCode::InvalidArgument, "select_output: no iterates");
  if (mode == OutputMode::LastIterate) return iterates.back();
  if (p.size() != iterates.size()) throw Error(ErrorCode::InvalidArgument, "select_output: size mismatch");
  return iterates[sample_index(p, rng)];
}

Matrix initial_point(const FiniteSumProblem& problem, const SvrgConfig& config) {
  Rng rng = make_stream(config.seed, config.run_id, StreamTag::InitialPoint);
  return qr_positive(gaussian_matrix(problem.dim(), problem.rank(), rng)).Q;
}

namespace {

bool reorthonormalize(Matrix& X) {
  if (orthonormality_error(X) <= kFeasibilityTol) return false;
  X = qr_positive(X).Q;
  return true;
}

double rel_err_of(const SvrgConfig& config, double f) {
  if (!config.error_reference) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(f - config.error_reference->f_ref) / config.error_reference->scale;
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Monitor {
  double f;
  Matrix egrad;
  Matrix rgrad;
  double grad_norm;
};

Monitor monitor(const FiniteSumProblem& problem, const Matrix& X, double rho) {
  ValueGrad vg = problem.value_and_grad(X);
  Monitor m{vg.value, std::move(vg.grad), Matrix(), 0.0};
  m.rgrad = d_rho_matrix(X, m.egrad, rho);
  m.grad_norm = m.rgrad.norm();
  if (!std::isfinite(m.f) || !std::isfinite(m.grad_norm)) {
    throw Error(ErrorCode::NonFiniteValue, "objective or gradient is not finite (step too large?)");
  }
  return m;
}

void fill_batch(std::vector<Index>& batch, Index n, Rng& rng) {
  std::uniform_int_distribution<Index> pick(0, n - 1);
  for (Index& i : batch) i = pick(rng);
}

}  // namespace

Matrix warm_start(const FiniteSumProblem& problem, const SvrgConfig& config) {
  Matrix X = initial_point(problem, config);
  const long long steps = config.warm_start_steps >= 0 ? config.warm_start_steps : config.K;
  const double tau = config.warm_start_tau >= 0.0 ? config.warm_start_tau : 1.0 / problem.constants().L;
  Rng rng = make_stream(config.seed, config.run_id, StreamTag::WarmStart);
  std::uniform_int_distribution<Index> pick(0, problem.count() - 1);
  for (long long j = 0; j < steps; ++j) {
    const Matrix g = problem.component_grad(X, pick(rng));
    X = descent_step(config.retraction, X, g, nullptr, config.rho, tau);
    reorthonormalize(X);
  }
  return X;
}

L1L2Estimate retraction_constants(const Retraction& retraction) {
  if (auto c = certified_l1_l2(retraction.kind)) return *c;
  return estimate_l1_l2(retraction, 2000, 0x4c314c32ULL);
}

Schedule schedule_for(const FiniteSumProblem& problem, const SvrgConfig& config) {
  const ProblemConstants pc = problem.constants();
  const L1L2Estimate rc =
      config.retraction_constants ? *config.retraction_constants : retraction_constants(config.retraction);
  ScheduleInputs in;
  in.n = problem.count();
  in.mu = config.mu;
  in.kappa = config.kappa;
  in.L = pc.L;
  in.C = pc.C;
  in.L1 = std::max(1.0, rc.L1_hat);
  in.L2 = rc.L2_hat;
  in.r = problem.rank();
  in.nu = MetricParams::from_rho(config.rho).nu;
  return decrease_schedule(in);
}

Matrix run_s_svrg_into(const FiniteSumProblem& problem, const SvrgConfig& config, RunTrace& trace) {
  validate(config);
  trace = RunTrace{};
  const Clock clock;
  const Index n = problem.count();

  long long K = config.K;
  long long batch_size = config.batch;
  std::vector<double> p;
  if (config.step_mode == StepMode::Scheduled) {
    trace.schedule = schedule_for(problem, config);
    K = trace.schedule->K;
    batch_size = trace.schedule->batch;
  }
  const std::vector<double> delta =
      trace.schedule ? trace.schedule->delta : std::vector<double>(static_cast<std::size_t>(K), 1.0);
  if (config.output_mode == OutputMode::SampledPsk) p = psk_from_delta(delta);
  if (config.output_mode == OutputMode::SampledLinear) p = psk_linear(delta, config.alpha);

  Matrix X = config.warm_start ? warm_start(problem, config) : initial_point(problem, config);
  Rng out_rng = make_stream(config.seed, config.run_id, StreamTag::OutputSelection);
  std::vector<Matrix> chosen;
  std::vector<Index> batch(static_cast<std::size_t>(batch_size));
  Matrix X_prev;
  Matrix g_prev;
  long long ifo = 0;
  long long ro = 0;

  for (int s = 0;; ++s) {
    const Monitor m = monitor(problem, X, config.rho);
    double tau = config.tau;
    if (config.step_mode == StepMode::Scheduled) {
      tau = trace.schedule->tau;
    } else if (config.step_mode == StepMode::BB) {
      tau = s == 0 ? std::clamp(config.tau, config.tau_min, config.tau_max) / static_cast<double>(K)
                   : bb_step(X, X_prev, m.rgrad, g_prev, K, config.tau_min, config.tau_max,
                             config.retraction.kind);
    }
    trace.epochs.push_back(
        {s, m.f, m.grad_norm, tau, ifo, ro, clock.seconds(), rel_err_of(config, m.f)});
    if (m.grad_norm <= config.grad_tol) {
      trace.status = RunStatus::GradTol;
      break;
    }
    if (s >= config.max_epochs) {
      trace.status = RunStatus::MaxEpochs;
      break;
    }

    ifo += n;
    Rng rng = make_stream(config.seed, config.run_id, static_cast<std::uint64_t>(s));
    const std::size_t pick = p.empty() ? static_cast<std::size_t>(K) : sample_index(p, out_rng);
    Matrix Xk = X;
    Matrix Xr = X;
    for (long long k = 0; k < K; ++k) {
      fill_batch(batch, n, rng);
      const Matrix G = svrg_euclidean_gradient(problem, Xk, X, m.egrad, batch);
      Xk = descent_step(config.retraction, Xk, G, nullptr, config.rho, tau);
      if (reorthonormalize(Xk)) ++trace.reorthonormalizations;
      ifo += 2 * batch_size;
      ++ro;
      if (static_cast<std::size_t>(k + 1) == pick) Xr = Xk;
    }
    X_prev = std::move(X);
    g_prev = m.rgrad;
    if (config.output_mode == OutputMode::SampledLinear) {
      X = std::move(Xr);
    } else {
      if (config.output_mode == OutputMode::SampledPsk) chosen.push_back(std::move(Xr));
      X = std::move(Xk);
    }
  }

  if (config.output_mode == OutputMode::SampledPsk && !chosen.empty()) {
    std::uniform_int_distribution<std::size_t> any(0, chosen.size() - 1);
    return chosen[any(out_rng)];
  }
  return X;
}

RunResult run_s_svrg(const FiniteSumProblem& problem, const SvrgConfig& config) {
  RunResult res;
  res.X = run_s_svrg_into(problem, config, res.trace);
  return res;
}

Matrix run_rgd_into(const FiniteSumProblem& problem, const SvrgConfig& config, RunTrace& trace) {
  validate(config);
  if (config.step_mode == StepMode::Scheduled) {
    throw Error(ErrorCode::InvalidArgument, "rgd supports fixed and bb steps only");
  }
  trace = RunTrace{};
  const Clock clock;
  Matrix X = config.warm_start ? warm_start(problem, config) : initial_point(problem, config);
  Matrix X_prev;
  Matrix g_prev;
  long long ifo = 0;
  long long ro = 0;
  for (int s = 0;; ++s) {
    const Monitor m = monitor(problem, X, config.rho);
    double tau = config.tau;
    if (config.step_mode == StepMode::BB) {
      tau = s == 0 ? std::clamp(config.tau, config.tau_min, config.tau_max)
                   : bb_step(X, X_prev, m.rgrad, g_prev, 1, config.tau_min, config.tau_max,
                             config.retraction.kind);
    }
    trace.epochs.push_back(
        {s, m.f, m.grad_norm, tau, ifo, ro, clock.seconds(), rel_err_of(config, m.f)});
    if (m.grad_norm <= config.grad_tol) {
      trace.status = RunStatus::GradTol;
      break;
    }
    if (s >= config.max_epochs) {
      trace.status = RunStatus::MaxEpochs;
      break;
    }
    ifo += problem.count();
    Matrix next = descent_step(config.retraction, X, m.egrad, nullptr, config.rho, tau);
    if (reorthonormalize(next)) ++trace.reorthonormalizations;
    ++ro;
    X_prev = std::move(X);
    g_prev = m.rgrad;
    X = std::move(next);
  }
  return X;
}

RunResult run_rgd(const FiniteSumProblem& problem, const SvrgConfig& config) {
  RunResult res;
  res.X = run_rgd_into(problem, config, res.trace);
  return res;
}

double estimate_sigma(const FiniteSumProblem& problem, const Matrix& X, double rho, int probes, Rng& rng) {
  const Matrix grad = d_rho_matrix(X, problem.full_grad(X), rho);
  std::uniform_int_distribution<Index> pick(0, problem.count() - 1);
  double sigma = 0.0;
  for (int t = 0; t < probes; ++t) {
    const Matrix gi = d_rho_matrix(X, problem.component_grad(X, pick(rng)), rho);
    sigma = std::max(sigma, (gi - grad).norm());
  }
  return sigma;
}

double sgd_step_rule(double nu, double L_hat, double tilde_D, double sigma, long long N) {
  if (!(L_hat > 0.0) || N < 1) throw Error(ErrorCode::InvalidArgument, "sgd_step_rule: bad inputs");
  const double first = nu / L_hat;
  if (!(sigma > 0.0)) return first;
  return std::min(first, tilde_D / (sigma * std::sqrt(static_cast<double>(N))));
}

SgdResult run_s_sgd(const FiniteSumProblem& problem, const SvrgConfig& config, const SgdOptions& options) {
  validate(config);
  if (options.N < 1) throw Error(ErrorCode::InvalidArgument, "s-sgd: N >= 1");
  SgdResult res;
  const Clock clock;
  Matrix X = config.warm_start ? warm_start(problem, config) : initial_point(problem, config);

  if (options.sigma) {
    res.sigma = *options.sigma;
  } else {
    Rng probe = make_stream(config.seed, config.run_id, StreamTag::SigmaProbe);
    res.sigma = estimate_sigma(problem, X, config.rho, 100, probe);
  }
  if (config.step_mode == StepMode::Fixed) {
    res.step = config.tau;
  } else {
    const ProblemConstants pc = problem.constants();
    const L1L2Estimate rc =
        config.retraction_constants ? *config.retraction_constants : retraction_constants(config.retraction);
    const double L_hat = 2.0 * rc.L2_hat * pc.C + rc.L1_hat * rc.L1_hat * pc.L;
    res.step = sgd_step_rule(MetricParams::from_rho(config.rho).nu, L_hat, options.tilde_D, res.sigma, options.N);
  }

  Rng out_rng = make_stream(config.seed, config.run_id, StreamTag::OutputSelection);
  std::uniform_int_distribution<long long> draw(0, options.N - 1);
  res.j_bar = draw(out_rng);
  const long long last = options.full_horizon ? options.N : res.j_bar;
  const long long every = options.record_every > 0 ? options.record_every : problem.count();

  Rng rng = make_stream(config.seed, config.run_id, StreamTag::SgdIndex);
  std::uniform_int_distribution<Index> pick(0, problem.count() - 1);
  long long ifo = 0;
  long long ro = 0;
  auto record = [&](long long j) {
    const Monitor m = monitor(problem, X, config.rho);
    res.trace.epochs.push_back({static_cast<int>(j / every), m.f, m.grad_norm, res.step, ifo, ro,
                                clock.seconds(), rel_err_of(config, m.f)});
  };
  for (long long j = 0;; ++j) {
    const bool at_end = j == last;
    if (j % every == 0 || at_end) record(j);
    if (j == res.j_bar) res.X = X;
    if (at_end) break;
    const Matrix g = problem.component_grad(X, pick(rng));
    X = descent_step(config.retraction, X, g, nullptr, config.rho, res.step);
    if (reorthonormalize(X)) ++res.trace.reorthonormalizations;
    ++ifo;
    ++ro;
  }
  res.trace.status = RunStatus::MaxEpochs;
  return res;
}

std::vector<double> loj_ratio_probe(std::span<const EpochRecord> records, double f_limit) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const EpochRecord& r : records) {
    const double num = std::sqrt(std::abs(r.f - f_limit));
    if (num == 0.0) {
      out.push_back(0.0);
    } else if (r.grad_norm < 1e-12) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.push_back(num / r.grad_norm);
    }
  }
  return out;
}

TailFit tail_log_fit(std::span<const EpochRecord> records, std::size_t window, double floor, double ceiling) {
  std::vector<std::pair<double, double>> pts;
  for (const EpochRecord& r : records) {
    if (std::isfinite(r.rel_err) && r.rel_err > floor && r.rel_err <= ceiling) pts.emplace_back(r.epoch, std::log(r.rel_err));
  }
  if (pts.size() > window) pts.erase(pts.begin(), pts.end() - static_cast<std::ptrdiff_t>(window));
  TailFit fit;
  fit.points = pts.size();
  if (pts.size() < 2) return fit;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace ssvrg
