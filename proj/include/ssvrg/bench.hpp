#pragma once

// Multi-seed experiment harness: builds a problem, runs one method from
// `runs` seeded starting points, aggregates a summary row and writes trace,
// per-run and summary CSVs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssvrg/optimizer.hpp"

namespace ssvrg {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ProblemKind { Pca, Mc };
enum class Method { SSvrg, SSvrgBb, SSgd, Rgd };

std::string_view to_string(ProblemKind kind);
std::string_view to_string(Method method);
ProblemKind parse_problem(std::string_view name);
Method parse_method(std::string_view name);

/// "fixed:<tau>", "bb", "bb:<tau0>" or "thm1:<mu>,<kappa>".
struct StepSpec {
  StepMode mode = StepMode::BB;
  double tau = 1.0;
  double mu = 0.0;
  double kappa = 1.0;
};

StepSpec parse_step(std::string_view text);
std::string format_step(const StepSpec& step);

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::Pca;
  Method method = Method::SSvrgBb;
  RetractionKind retraction = RetractionKind::Jd;
  JdPhi phi = JdPhi::Piecewise;
  Index d = 200;
  Index n = 2000;
  Index r = 5;
  double rho = 0.0;
  double cond = 10.0;            // MC only
  StepSpec step;
  double tau_min = 1e-8;
  double tau_max = 1e8;
  double batch_frac = 0.01;
  long long inner_k = 0;         // 0: auto = round(5 / batch_frac)
  int max_epochs = 200;
  double grad_tol = 1e-6;
  OutputMode output_mode = OutputMode::LastIterate;
  double alpha = 1.0;
  int runs = 20;
  std::uint64_t seed = 1;        // run i uses seed + i
  std::optional<std::uint64_t> data_seed;  // defaults to seed
  bool warm_start = true;
  long long sgd_steps = 0;       // 0: max_epochs * n
  double sgd_tilde_d = 1.0;
  int jobs = 1;
  std::string data_path;         // PCA matrix file or MC triples; empty: synthetic
  std::string out_dir;           // empty: write nothing
};

/// Sets one field from its config key. Dashes and underscores are
/// interchangeable. Throws InvalidArgument for unknown keys or bad values.
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Flat "key = value" lines; '#' starts a comment.
void apply_config_text(ExperimentSpec& spec, std::string_view text);
void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& path);

/// Every numeric-relevant setting as sorted "key=value" lines (no out/jobs).
std::string canonical_config(const ExperimentSpec& spec);

/// FNV-1a 64 of canonical_config, printed as 16 hex digits.
std::string config_hash(const ExperimentSpec& spec);

void validate(const ExperimentSpec& spec);

long long inner_iterations(const ExperimentSpec& spec);
long long batch_size(const ExperimentSpec& spec);

struct RunOutcome {
  int run_id = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::MaxEpochs;
  std::string error;
  int epochs = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double rel_err = 0.0;
  double recovery_err = 0.0;  // MC with ground truth, NaN otherwise
  double seconds = 0.0;
  RunTrace trace;
};

struct SummaryRow {
  std::string method;
  std::string retraction;
  double tau_star = 0.0;  // NaN unless grid-tuned
  int runs = 0;
  int converged = 0;
  int failed = 0;
  int epoch_min = 0;
  double epoch_avg = 0.0;
  int epoch_max = 0;
  double epoch_std = 0.0;
  double nrm_bar = 0.0;
  double err_bar = 0.0;
  double t_bar = 0.0;
};

/// Statistics over the runs that did not fail; NaN fields when all failed.
SummaryRow summarize(std::string_view method, std::string_view retraction,
                     const std::vector<RunOutcome>& runs);

struct ExperimentResult {
  SummaryRow summary;
  std::vector<RunOutcome> runs;
  double f_reference = 0.0;  // PCA optimum or 0 for MC
};

/// Runs the experiment; writes CSVs when spec.out_dir is set.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct TuneResult {
  double tau_star = 0.0;
  SummaryRow best;
  std::vector<SummaryRow> grid;
};

/// Runs every grid point as a fixed-step (or BB initial) tau and keeps the one
/// with the fewest average epochs among points whose runs all converge; ties
/// go to the smaller tau. Throws NoConvergentTau otherwise.
TuneResult grid_tune(const ExperimentSpec& spec, const std::vector<double>& grid);

std::vector<double> parse_grid(std::string_view text);

/// Aligned text table in the "epoch min/avg/max/std, nrm, err, t" layout.
std::string emit_table(const std::vector<SummaryRow>& rows);

/// "# key: value" lines recording the RNG family, seed, config hash, version
/// and the canonical config.
std::string repro_header(const ExperimentSpec& spec);

/// Reads back a header written by repro_header into a spec.
ExperimentSpec spec_from_header(std::string_view text);

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                       const std::string& header);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// One file per run: run_id, epoch, f, grad_norm, step_size, ifo_calls,
/// ro_calls, seconds, rel_err.
void write_trace_csv(const std::filesystem::path& path, const RunOutcome& run,
                     const std::string& header);
std::vector<EpochRecord> read_trace_csv(const std::filesystem::path& path, int* run_id = nullptr);

void write_runs_csv(const std::filesystem::path& path, const std::vector<RunOutcome>& runs,
                    const std::string& header);

}  // namespace ssvrg
