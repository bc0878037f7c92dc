#pragma once

// S-SVRG, S-SVRG-BB, S-SGD and a Riemannian gradient-descent baseline. None
// of them transports vectors between tangent spaces: the variance-reduced
// correction is formed from Euclidean gradients and projected once by D_rho.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssvrg/problem.hpp"
#include "ssvrg/retraction.hpp"
#include "ssvrg/rng.hpp"
#include "ssvrg/schedule.hpp"

namespace ssvrg {

enum class StepMode { Fixed, BB, Scheduled };
enum class OutputMode { LastIterate, SampledPsk, SampledLinear };
enum class RunStatus { GradTol, MaxEpochs, Failed };

std::string_view to_string(StepMode mode);
std::string_view to_string(OutputMode mode);
std::string_view to_string(RunStatus status);

/// Reference for the rel_err trace column: |f - f_ref| / scale.
struct ErrorReference {
  double f_ref = 0.0;
  double scale = 1.0;
};

struct SvrgConfig {
  Retraction retraction;
  double rho = 0.0;
  StepMode step_mode = StepMode::BB;
  double tau = 1.0;  // fixed step, or the first-epoch BB value before dividing by K
  double tau_min = 1e-8;
  double tau_max = 1e8;
  double mu = 0.0;  // Scheduled mode
  double kappa = 1.0;
  std::optional<L1L2Estimate> retraction_constants;  // Scheduled mode; certified/estimated if empty
  long long K = 500;
  long long batch = 20;
  int max_epochs = 200;
  double grad_tol = 1e-6;
  OutputMode output_mode = OutputMode::LastIterate;
  double alpha = 1.0;  // SampledLinear weight
  std::uint64_t seed = 0;
  std::uint64_t run_id = 0;
  bool warm_start = true;
  long long warm_start_steps = -1;  // -1: K steps
  double warm_start_tau = -1.0;     // -1: 1 / L
  std::optional<ErrorReference> error_reference;
};

/// Throws InvalidArgument for inconsistent settings.
void validate(const SvrgConfig& config);

struct EpochRecord {
  int epoch = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;  // step used by the epoch that starts here
  long long ifo_calls = 0;  // work spent to reach this point
  long long ro_calls = 0;
  double seconds = 0.0;
  double rel_err = 0.0;  // NaN without an error reference
};

struct RunTrace {
  std::vector<EpochRecord> epochs;
  RunStatus status = RunStatus::MaxEpochs;
  std::string error;
  long long reorthonormalizations = 0;
  std::optional<Schedule> schedule;

  /// Number of completed epochs, i.e. the index of the final record.
  int epochs_run() const;
};

struct RunResult {
  Matrix X;
  RunTrace trace;
};

/// D_rho(X_k, grad f(X_anchor) + (1/|B|) sum_{i in B} (grad f_i(X_k) - grad f_i(X_anchor))).
Matrix svrg_euclidean_gradient(const FiniteSumProblem& problem, const Matrix& Xk,
                               const Matrix& X_anchor, const Matrix& full_grad_anchor,
                               std::span<const Index> batch);
Matrix svrg_gradient(const FiniteSumProblem& problem, const Matrix& Xk, const Matrix& X_anchor,
                     const Matrix& full_grad_anchor, std::span<const Index> batch, double rho);

/// Safeguarded BB step divided by K: max(tau_min, min(<S,S>/|<S,Y>|, tau_max)) / K,
/// doubled before the safeguard for Gr. Falls back to tau_max / K if |<S,Y>| <= 1e-300.
double bb_step(const Matrix& X_s, const Matrix& X_prev, const Matrix& grad_s, const Matrix& grad_prev,
               long long K, double tau_min, double tau_max, RetractionKind kind);

/// Index k drawn with probability p[k].
std::size_t sample_index(std::span<const double> p, Rng& rng);

/// LastIterate returns the final entry; the sampled modes draw by p.
Matrix select_output(std::span<const Matrix> iterates, std::span<const double> p, OutputMode mode,
                     Rng& rng);

/// Random orthonormal start from the (seed, run_id) stream, optionally refined
/// by single-sample S-SGD steps with a small fixed step.
Matrix initial_point(const FiniteSumProblem& problem, const SvrgConfig& config);
Matrix warm_start(const FiniteSumProblem& problem, const SvrgConfig& config);

/// Certified constants for Pd/Qr, otherwise an empirical estimate.
L1L2Estimate retraction_constants(const Retraction& retraction);

/// Schedule for a problem under Scheduled mode.
Schedule schedule_for(const FiniteSumProblem& problem, const SvrgConfig& config);

RunResult run_s_svrg(const FiniteSumProblem& problem, const SvrgConfig& config);
RunResult run_rgd(const FiniteSumProblem& problem, const SvrgConfig& config);

/// Same as the above, filling `trace` as it goes so a failed run keeps its
/// history. Errors are rethrown.
Matrix run_s_svrg_into(const FiniteSumProblem& problem, const SvrgConfig& config, RunTrace& trace);
Matrix run_rgd_into(const FiniteSumProblem& problem, const SvrgConfig& config, RunTrace& trace);

struct SgdOptions {
  long long N = 1;
  double tilde_D = 1.0;
  std::optional<double> sigma;  // estimated at the start point if empty
  long long record_every = 0;   // 0: every n steps
  bool full_horizon = false;    // keep stepping past the returned index for tracing
};

struct SgdResult {
  Matrix X;              // iterate at the drawn index
  long long j_bar = 0;
  double step = 0.0;
  double sigma = 0.0;
  RunTrace trace;
};

/// max over probes of ||D_rho(X, grad f_i(X)) - grad f(X)||_F.
double estimate_sigma(const FiniteSumProblem& problem, const Matrix& X, double rho, int probes, Rng& rng);

/// min(nu / L_hat, tilde_D / (sigma sqrt(N))).
double sgd_step_rule(double nu, double L_hat, double tilde_D, double sigma, long long N);

/// Single-sample steps. Fixed step mode uses config.tau; otherwise the
/// sgd_step_rule above.
SgdResult run_s_sgd(const FiniteSumProblem& problem, const SvrgConfig& config, const SgdOptions& options);

/// |f - f_limit|^(1/2) / ||grad f|| per record; NaN where ||grad f|| < 1e-12.
std::vector<double> loj_ratio_probe(std::span<const EpochRecord> records, double f_limit);

struct TailFit {
  double slope = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log(rel_err) against epoch over the last `window`
/// records with floor < rel_err <= ceiling.
TailFit tail_log_fit(std::span<const EpochRecord> records, std::size_t window = 20, double floor = 1e-13,
                     double ceiling = std::numeric_limits<double>::infinity());

}  // namespace ssvrg
