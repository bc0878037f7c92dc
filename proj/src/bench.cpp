#include "ssvrg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "ssvrg/data_io.hpp"
#include "ssvrg/error.hpp"
#include "ssvrg/mc.hpp"
#include "ssvrg/pca.hpp"

namespace ssvrg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  const std::string s(v);
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad(fmt::format("{}: '{}' is not a number", key, v));
  return x;
}

template <class Int>
Int to_int(std::string_view key, std::string_view v) {
  v = trim(v);
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad(fmt::format("{}: '{}' is not an integer", key, v));
  }
  return x;
}

bool to_bool(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

OutputMode parse_output(std::string_view v) {
  if (v == "last") return OutputMode::LastIterate;
  if (v == "psk") return OutputMode::SampledPsk;
  if (v == "linear") return OutputMode::SampledLinear;
  bad(fmt::format("output: unknown mode '{}'", v));
}

JdPhi parse_phi(std::string_view v) {
  if (v == "linear") return JdPhi::Linear;
  if (v == "piecewise") return JdPhi::Piecewise;
  bad(fmt::format("phi: unknown choice '{}'", v));
}

std::string_view phi_name(JdPhi phi) { return phi == JdPhi::Linear ? "linear" : "piecewise"; }

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Built {
  std::unique_ptr<FiniteSumProblem> problem;
  const McProblem* mc = nullptr;
  ErrorReference ref;
};

Built build_problem(const ExperimentSpec& spec) {
  const std::uint64_t data_seed = spec.data_seed.value_or(spec.seed);
  Built b;
  if (spec.problem == ProblemKind::Pca) {
    PcaInstance inst = spec.data_path.empty() ? pca_generate(spec.d, spec.n, spec.r, data_seed)
                                              : pca_from_data(read_matrix(spec.data_path), spec.r);
    auto p = std::make_unique<PcaProblem>(inst);
    const double f_star = pca_optimum(*p).f_star;
    b.ref = {f_star, f_star == 0.0 ? 1.0 : std::abs(f_star)};
    b.problem = std::move(p);
  } else {
    McInstance inst = spec.data_path.empty()
                          ? mc_generate(spec.d, spec.n, spec.r, spec.cond, data_seed)
                          : load_mc_instance(spec.data_path, spec.r, spec.d, spec.n);
    auto p = std::make_unique<McProblem>(std::move(inst));
    const double energy = p->observed_energy();
    b.ref = {0.0, energy > 0.0 ? energy : 1.0};
    b.mc = p.get();
    b.problem = std::move(p);
  }
  return b;
}

SvrgConfig make_config(const ExperimentSpec& spec, int run, const ErrorReference& ref) {
  SvrgConfig c;
  c.retraction = {spec.retraction, spec.phi};
  c.rho = spec.rho;
  c.step_mode = spec.step.mode;
  c.tau = spec.step.tau;
  c.mu = spec.step.mu;
  c.kappa = spec.step.kappa;
  c.tau_min = spec.tau_min;
  c.tau_max = spec.tau_max;
  c.K = inner_iterations(spec);
  c.batch = batch_size(spec);
  c.max_epochs = spec.max_epochs;
  c.grad_tol = spec.grad_tol;
  c.output_mode = spec.output_mode;
  c.alpha = spec.alpha;
  c.seed = spec.seed + static_cast<std::uint64_t>(run);
  c.run_id = static_cast<std::uint64_t>(run);
  c.warm_start = spec.warm_start;
  c.error_reference = ref;
  return c;
}

RunOutcome run_one(const ExperimentSpec& spec, const Built& built, int run) {
  const SvrgConfig config = make_config(spec, run, built.ref);
  RunOutcome out;
  out.run_id = run;
  out.seed = config.seed;
  out.recovery_err = kNaN;
  Matrix X;
  try {
    switch (spec.method) {
      case Method::SSvrg:
      case Method::SSvrgBb:
        X = run_s_svrg_into(*built.problem, config, out.trace);
        break;
      case Method::Rgd:
        X = run_rgd_into(*built.problem, config, out.trace);
        break;
      case Method::SSgd: {
        SgdOptions opt;
        opt.N = spec.sgd_steps > 0 ? spec.sgd_steps
                                   : static_cast<long long>(spec.max_epochs) * built.problem->count();
        opt.tilde_D = spec.sgd_tilde_d;
        opt.full_horizon = true;
        SgdResult res = run_s_sgd(*built.problem, config, opt);
        X = std::move(res.X);
        out.trace = std::move(res.trace);
        if (out.trace.epochs.back().grad_norm <= spec.grad_tol) out.trace.status = RunStatus::GradTol;
        break;
      }
    }
    out.status = out.trace.status;
  } catch (const std::exception& e) {
    out.status = RunStatus::Failed;
    out.trace.status = RunStatus::Failed;
    out.error = e.what();
  }
  out.epochs = out.trace.epochs_run();
  if (!out.trace.epochs.empty()) {
    const EpochRecord& last = out.trace.epochs.back();
    out.f = last.f;
    out.grad_norm = last.grad_norm;
    out.rel_err = last.rel_err;
    out.seconds = last.seconds;
  }
  if (out.status != RunStatus::Failed && built.mc && built.mc->instance().M_true) {
    out.recovery_err = recovery_error(*built.mc, X);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path,
                                                    std::vector<std::string>& header) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    for (std::string_view c : split(line, ',')) cells.emplace_back(c);
    if (!have_header) {
      header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != header.size()) throw Error(ErrorCode::Io, "ragged row in " + path.string());
      rows.push_back(std::move(cells));
    }
  }
  return rows;
}

}  // namespace

std::string_view to_string(ProblemKind kind) { return kind == ProblemKind::Pca ? "pca" : "mc"; }

std::string_view to_string(Method method) {
  switch (method) {
    case Method::SSvrg: return "s-svrg";
    case Method::SSvrgBb: return "s-svrg-bb";
    case Method::SSgd: return "s-sgd";
    case Method::Rgd: return "rgd";
  }
  return "?";
}

ProblemKind parse_problem(std::string_view name) {
  if (name == "pca") return ProblemKind::Pca;
  if (name == "mc") return ProblemKind::Mc;
  bad(fmt::format("unknown problem '{}'", name));
}

Method parse_method(std::string_view name) {
  if (name == "s-svrg") return Method::SSvrg;
  if (name == "s-svrg-bb") return Method::SSvrgBb;
  if (name == "s-sgd") return Method::SSgd;
  if (name == "rgd") return Method::Rgd;
  bad(fmt::format("unknown method '{}'", name));
}

StepSpec parse_step(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  StepSpec s;
  if (head == "fixed") {
    if (tail.empty()) bad("step: fixed needs a value, fixed:<tau>");
    s.mode = StepMode::Fixed;
    s.tau = to_double("step", tail);
  } else if (head == "bb") {
    s.mode = StepMode::BB;
    if (!tail.empty()) s.tau = to_double("step", tail);
  } else if (head == "thm1") {
    s.mode = StepMode::Scheduled;
    const auto parts = split(tail, ',');
    if (parts.size() != 2) bad("step: expected thm1:<mu>,<kappa>");
    s.mu = to_double("step", parts[0]);
    s.kappa = to_double("step", parts[1]);
  } else {
    bad(fmt::format("step: unknown form '{}'", text));
  }
  return s;
}

std::string format_step(const StepSpec& step) {
  switch (step.mode) {
    case StepMode::Fixed: return "fixed:" + num(step.tau);
    case StepMode::BB: return "bb:" + num(step.tau);
    case StepMode::Scheduled: return "thm1:" + num(step.mu) + "," + num(step.kappa);
  }
  return "?";
}

void apply_setting(ExperimentSpec& spec, std::string_view raw_key, std::string_view raw_value) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string_view v = trim(raw_value);
  if (key == "problem") spec.problem = parse_problem(v);
  else if (key == "method") spec.method = parse_method(v);
  else if (key == "retraction") spec.retraction = parse_retraction(v);
  else if (key == "phi") spec.phi = parse_phi(v);
  else if (key == "d") spec.d = to_int<Index>(key, v);
  else if (key == "n") spec.n = to_int<Index>(key, v);
  else if (key == "r") spec.r = to_int<Index>(key, v);
  else if (key == "rho") spec.rho = to_double(key, v);
  else if (key == "cond") spec.cond = to_double(key, v);
  else if (key == "step") spec.step = parse_step(v);
  else if (key == "tau_min") spec.tau_min = to_double(key, v);
  else if (key == "tau_max") spec.tau_max = to_double(key, v);
  else if (key == "batch_frac") spec.batch_frac = to_double(key, v);
  else if (key == "inner_k") spec.inner_k = v == "auto" ? 0 : to_int<long long>(key, v);
  else if (key == "max_epochs") spec.max_epochs = to_int<int>(key, v);
  else if (key == "grad_tol") spec.grad_tol = to_double(key, v);
  else if (key == "output") spec.output_mode = parse_output(v);
  else if (key == "alpha") spec.alpha = to_double(key, v);
  else if (key == "runs") spec.runs = to_int<int>(key, v);
  else if (key == "seed") spec.seed = to_int<std::uint64_t>(key, v);
  else if (key == "data_seed") {
    if (v == "seed") spec.data_seed.reset();
    else spec.data_seed = to_int<std::uint64_t>(key, v);
  }
  else if (key == "warm_start") spec.warm_start = to_bool(key, v);
  else if (key == "sgd_steps") spec.sgd_steps = to_int<long long>(key, v);
  else if (key == "sgd_tilde_d") spec.sgd_tilde_d = to_double(key, v);
  else if (key == "jobs") spec.jobs = to_int<int>(key, v);
  else if (key == "data") spec.data_path = std::string(v);
  else if (key == "out") spec.out_dir = std::string(v);
  else bad(fmt::format("unknown setting '{}'", raw_key));
}

void apply_config_text(ExperimentSpec& spec, std::string_view text) {
  int lineno = 0;
  for (std::string_view line : split(text, '\n')) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(fmt::format("config line {}: expected key = value", lineno));
    apply_setting(spec, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  apply_config_text(spec, ss.str());
}

std::string canonical_config(const ExperimentSpec& spec) {
  std::map<std::string, std::string> kv{
      {"alpha", num(spec.alpha)},
      {"batch_frac", num(spec.batch_frac)},
      {"cond", num(spec.cond)},
      {"d", std::to_string(spec.d)},
      {"data", spec.data_path},
      {"data_seed", spec.data_seed ? std::to_string(*spec.data_seed) : "seed"},
      {"grad_tol", num(spec.grad_tol)},
      {"inner_k", spec.inner_k > 0 ? std::to_string(spec.inner_k) : "auto"},
      {"max_epochs", std::to_string(spec.max_epochs)},
      {"method", std::string(to_string(spec.method))},
      {"n", std::to_string(spec.n)},
      {"output",
       spec.output_mode == OutputMode::LastIterate
           ? "last"
           : (spec.output_mode == OutputMode::SampledPsk ? "psk" : "linear")},
      {"phi", std::string(phi_name(spec.phi))},
      {"problem", std::string(to_string(spec.problem))},
      {"r", std::to_string(spec.r)},
      {"retraction", std::string(to_string(spec.retraction))},
      {"rho", num(spec.rho)},
      {"runs", std::to_string(spec.runs)},
      {"seed", std::to_string(spec.seed)},
      {"sgd_steps", std::to_string(spec.sgd_steps)},
      {"sgd_tilde_d", num(spec.sgd_tilde_d)},
      {"step", format_step(spec.step)},
      {"tau_max", num(spec.tau_max)},
      {"tau_min", num(spec.tau_min)},
      {"warm_start", spec.warm_start ? "true" : "false"},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string config_hash(const ExperimentSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(spec)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

void validate(const ExperimentSpec& spec) {
  if (spec.runs < 1) bad("runs must be >= 1");
  if (spec.jobs < 1) bad("jobs must be >= 1");
  if (spec.data_path.empty() && (spec.d < 1 || spec.n < 1)) bad("d and n must be >= 1");
  if (spec.r < 1) bad("r must be >= 1");
  if (!(spec.batch_frac > 0.0 && spec.batch_frac <= 1.0)) bad("batch_frac must lie in (0, 1]");
  if (spec.inner_k < 0) bad("inner_k must be positive or auto");
  if (spec.problem == ProblemKind::Mc && !(spec.cond >= 1.0)) bad("cond must be >= 1");
  if (spec.method == Method::SSvrgBb && spec.step.mode != StepMode::BB) {
    bad("s-svrg-bb needs a bb step");
  }
  if (spec.method == Method::SSvrg && spec.step.mode == StepMode::BB) {
    bad("s-svrg takes fixed:<tau> or thm1:<mu>,<kappa>; use s-svrg-bb for bb");
  }
  if (spec.method == Method::Rgd && spec.step.mode == StepMode::Scheduled) {
    bad("rgd takes fixed or bb steps");
  }
}

long long inner_iterations(const ExperimentSpec& spec) {
  if (spec.inner_k > 0) return spec.inner_k;
  return std::max(1LL, std::llround(5.0 / spec.batch_frac));
}

long long batch_size(const ExperimentSpec& spec) {
  return std::max(1LL, static_cast<long long>(std::ceil(spec.batch_frac * static_cast<double>(spec.n) - 1e-9)));
}

SummaryRow summarize(std::string_view method, std::string_view retraction,
                     const std::vector<RunOutcome>& runs) {
  SummaryRow row;
  row.method = std::string(method);
  row.retraction = std::string(retraction);
  row.tau_star = kNaN;
  row.runs = static_cast<int>(runs.size());
  std::vector<const RunOutcome*> ok;
  for (const RunOutcome& r : runs) {
    if (r.status == RunStatus::Failed) {
      ++row.failed;
      continue;
    }
    if (r.status == RunStatus::GradTol) ++row.converged;
    ok.push_back(&r);
  }
  if (ok.empty()) {
    row.epoch_avg = row.epoch_std = row.nrm_bar = row.err_bar = row.t_bar = kNaN;
    return row;
  }
  const double m = static_cast<double>(ok.size());
  row.epoch_min = std::numeric_limits<int>::max();
  for (const RunOutcome* r : ok) {
    row.epoch_min = std::min(row.epoch_min, r->epochs);
    row.epoch_max = std::max(row.epoch_max, r->epochs);
    row.epoch_avg += r->epochs;
    row.nrm_bar += r->grad_norm;
    row.err_bar += r->rel_err;
    row.t_bar += r->seconds;
  }
  row.epoch_avg /= m;
  row.nrm_bar /= m;
  row.err_bar /= m;
  row.t_bar /= m;
  for (const RunOutcome* r : ok) row.epoch_std += (r->epochs - row.epoch_avg) * (r->epochs - row.epoch_avg);
  row.epoch_std = std::sqrt(row.epoch_std / m);
  return row;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const Built built = build_problem(spec);
  ExperimentResult result;
  result.f_reference = built.ref.f_ref;
  result.runs.resize(static_cast<std::size_t>(spec.runs));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < spec.runs; i = next++) result.runs[static_cast<std::size_t>(i)] = run_one(spec, built, i);
  };
  const int threads = std::min(spec.jobs, spec.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  result.summary = summarize(to_string(spec.method), to_string(spec.retraction), result.runs);

  if (!spec.out_dir.empty()) {
    const std::filesystem::path dir(spec.out_dir);
    std::filesystem::create_directories(dir);
    const std::string header = repro_header(spec);
    for (const RunOutcome& r : result.runs) {
      write_trace_csv(dir / fmt::format("trace_{:03d}.csv", r.run_id), r, header);
    }
    write_runs_csv(dir / "runs.csv", result.runs, header);
    write_summary_csv(dir / "summary.csv", {result.summary}, header);
  }
  return result;
}

TuneResult grid_tune(const ExperimentSpec& spec, const std::vector<double>& grid) {
  if (grid.empty()) bad("tune: empty grid");
  if (spec.step.mode == StepMode::Scheduled) bad("tune: thm1 steps have no tau to tune");
  std::vector<double> taus = grid;
  std::sort(taus.begin(), taus.end());
  TuneResult out;
  std::optional<std::size_t> best;
  for (double tau : taus) {
    ExperimentSpec point = spec;
    point.step.tau = tau;
    point.out_dir.clear();
    SummaryRow row = run_experiment(point).summary;
    row.tau_star = tau;
    const bool all = row.converged == row.runs;
    if (all && (!best || row.epoch_avg < out.grid[*best].epoch_avg)) best = out.grid.size();
    out.grid.push_back(std::move(row));
  }
  if (!best) throw Error(ErrorCode::NoConvergentTau, "no grid point converged on every run");
  out.best = out.grid[*best];
  out.tau_star = out.best.tau_star;
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    ExperimentSpec tuned = spec;
    tuned.step.tau = out.tau_star;
    write_summary_csv(std::filesystem::path(spec.out_dir) / "tune.csv", out.grid, repro_header(tuned));
  }
  return out;
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> out;
  for (std::string_view part : split(text, ',')) {
    if (!part.empty()) out.push_back(to_double("grid", part));
  }
  if (out.empty()) bad("grid: no values");
  return out;
}

std::string emit_table(const std::vector<SummaryRow>& rows) {
  std::string out = fmt::format("{:<10} {:<5} {:>6}  {:>20} {:>6}  {:>6} {:>6} {:>8}  {:>5}\n", "method",
                                "retr", "tau*", "epoch min/avg/max", "std", "nrm", "err", "t", "conv");
  for (const SummaryRow& r : rows) {
    const std::string tau = std::isnan(r.tau_star) ? "-" : fmt::format("{:g}", r.tau_star);
    const std::string ep = fmt::format("{}/{:.1f}/{}", r.epoch_min, r.epoch_avg, r.epoch_max);
    out += fmt::format("{:<10} {:<5} {:>6}  {:>20} {:>6.1f}  {:>6.0e} {:>6.0e} {:>8.2f}  {:>2}/{:<2}\n", r.method,
                       r.retraction, tau, ep, r.epoch_std, r.nrm_bar, r.err_bar, r.t_bar, r.converged, r.runs);
  }
  return out;
}

std::string repro_header(const ExperimentSpec& spec) {
  std::string h;
  h += fmt::format("# rng: {}\n", kRngFamily);
  h += fmt::format("# seed: {}\n", spec.seed);
  h += fmt::format("# config_hash: {}\n", config_hash(spec));
  h += fmt::format("# version: {}\n", kVersion);
  const std::string config = canonical_config(spec);
  for (std::string_view line : split(config, '\n')) {
    if (!line.empty()) h += fmt::format("# config: {}\n", line);
  }
  return h;
}

ExperimentSpec spec_from_header(std::string_view text) {
  ExperimentSpec spec;
  constexpr std::string_view tag = "# config:";
  for (std::string_view line : split(text, '\n')) {
    if (!line.starts_with(tag)) continue;
    line = trim(line.substr(tag.size()));
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    apply_setting(spec, line.substr(0, eq), line.substr(eq + 1));
  }
  return spec;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows,
                       const std::string& header) {
  std::string text = header;
  text += "method,retraction,tau_star,runs,converged,failed,epoch_min,epoch_avg,epoch_max,epoch_std,"
          "nrm_bar,err_bar,t_bar\n";
  for (const SummaryRow& r : rows) {
    text += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.method, r.retraction, num(r.tau_star),
                        r.runs, r.converged, r.failed, r.epoch_min, num(r.epoch_avg), r.epoch_max,
                        num(r.epoch_std), num(r.nrm_bar), num(r.err_bar), num(r.t_bar));
  }
  write_file(path, text);
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_csv_rows(path, header);
  if (header.size() != 13 || header[0] != "method") throw Error(ErrorCode::Io, "not a summary file");
  std::vector<SummaryRow> out;
  for (const auto& c : rows) {
    SummaryRow r;
    r.method = c[0];
    r.retraction = c[1];
    r.tau_star = to_double("tau_star", c[2]);
    r.runs = to_int<int>("runs", c[3]);
    r.converged = to_int<int>("converged", c[4]);
    r.failed = to_int<int>("failed", c[5]);
    r.epoch_min = to_int<int>("epoch_min", c[6]);
    r.epoch_avg = to_double("epoch_avg", c[7]);
    r.epoch_max = to_int<int>("epoch_max", c[8]);
    r.epoch_std = to_double("epoch_std", c[9]);
    r.nrm_bar = to_double("nrm_bar", c[10]);
    r.err_bar = to_double("err_bar", c[11]);
    r.t_bar = to_double("t_bar", c[12]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_trace_csv(const std::filesystem::path& path, const RunOutcome& run, const std::string& header) {
  std::string text = header;
  text += "run_id,epoch,f,grad_norm,step_size,ifo_calls,ro_calls,seconds,rel_err\n";
  for (const EpochRecord& e : run.trace.epochs) {
    text += fmt::format("{},{},{},{},{},{},{},{},{}\n", run.run_id, e.epoch, num(e.f), num(e.grad_norm),
                        num(e.step_size), e.ifo_calls, e.ro_calls, num(e.seconds), num(e.rel_err));
  }
  write_file(path, text);
}

std::vector<EpochRecord> read_trace_csv(const std::filesystem::path& path, int* run_id) {
  std::vector<std::string> header;
  const auto rows = read_csv_rows(path, header);
  if (header.size() != 9 || header[0] != "run_id") throw Error(ErrorCode::Io, "not a trace file");
  std::vector<EpochRecord> out;
  for (const auto& c : rows) {
    if (run_id) *run_id = to_int<int>("run_id", c[0]);
    EpochRecord e;
    e.epoch = to_int<int>("epoch", c[1]);
    e.f = to_double("f", c[2]);
    e.grad_norm = to_double("grad_norm", c[3]);
    e.step_size = to_double("step_size", c[4]);
    e.ifo_calls = to_int<long long>("ifo_calls", c[5]);
    e.ro_calls = to_int<long long>("ro_calls", c[6]);
    e.seconds = to_double("seconds", c[7]);
    e.rel_err = to_double("rel_err", c[8]);
    out.push_back(e);
  }
  return out;
}

void write_runs_csv(const std::filesystem::path& path, const std::vector<RunOutcome>& runs,
                    const std::string& header) {
  std::string text = header;
  text += "run_id,seed,status,epochs,f,grad_norm,rel_err,recovery_err,seconds,reorth,error\n";
  for (const RunOutcome& r : runs) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    text += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.run_id, r.seed, to_string(r.status), r.epochs,
                        num(r.f), num(r.grad_norm), num(r.rel_err), num(r.recovery_err), num(r.seconds),
                        r.trace.reorthonormalizations, err);
  }
  write_file(path, text);
}

}  // namespace ssvrg
