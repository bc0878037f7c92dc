#include "ssvrg/schedule.hpp"

#include <cmath>
#include <numeric>

#include "ssvrg/error.hpp"

namespace ssvrg {

namespace {

// ceil that forgives pow() landing a few ulps above an integer.
long long robust_ceil(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<long long>(nearest);
  return static_cast<long long>(std::ceil(x));
}

}  // namespace

double gamma_fn(double z, long long i) {
  if (i < 1) throw Error(ErrorCode::InvalidArgument, "gamma_fn: i >= 1");
  if (z == 0.0) return static_cast<double>(i - 1);
  return std::expm1(static_cast<double>(i - 1) * std::log1p(z)) / z;
}

double c_condition(double ratio, double c) { return ratio * std::exp(c * c + 2.0 * c) * c; }

double solve_c(double ratio, bool* capped) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(ErrorCode::InvalidArgument, "solve_c: ratio must be positive");
  }
  if (capped) *capped = false;
  if (c_condition(ratio, 1.0) <= 1.0) {
    if (capped) *capped = true;
    return 1.0;
  }
  double lo = 1e-8;
  if (c_condition(ratio, lo) > 1.0) throw Error(ErrorCode::NoFeasibleC, "no c in (0, 1) satisfies the condition");
  double hi = 1.0;
  // h is increasing in c, so the feasible set is [0, c*].
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (c_condition(ratio, mid) <= 1.0 ? lo : hi) = mid;
  }
  return lo;
}

std::vector<double> delta_table(long long K, long long batch, double beta, double tau, double nu,
                                double L, double L_tilde, double L_hat) {
  const double v = L_tilde * L * L * tau * tau / (nu * nu * static_cast<double>(batch));
  const double z = 2.0 * beta * tau + v;
  const double amp = 1.0 + 2.0 / (L_tilde * beta * tau);
  std::vector<double> delta(static_cast<std::size_t>(K));
  for (long long k = 0; k < K; ++k) {
    const double g = gamma_fn(z, K - k);
    delta[k] = tau * (nu - 0.5 * L_hat * tau * (1.0 + amp * v * g));
  }
  return delta;
}

std::vector<double> psk_from_delta(const std::vector<double>& delta) {
  const double total = std::accumulate(delta.begin(), delta.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateSchedule, "sum of Delta is not positive");
  std::vector<double> p(delta.size() + 1, 0.0);
  for (std::size_t k = 0; k < delta.size(); ++k) p[k] = delta[k] / total;
  return p;
}

std::vector<double> psk_linear(const std::vector<double>& delta, double alpha) {
  const double a2 = alpha * alpha;
  const double total = std::accumulate(delta.begin(), delta.end(), 0.0) + a2;
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::vector<double> p(delta.size() + 1, 0.0);
    p.back() = 1.0;
    return p;
  }
  std::vector<double> p(delta.size() + 1);
  for (std::size_t k = 0; k < delta.size(); ++k) p[k] = delta[k] / total;
  p.back() = a2 / total;
  return p;
}

Schedule decrease_schedule(const ScheduleInputs& in) {
  if (!(in.mu >= 0.0 && in.mu <= 2.0 / 3.0)) throw Error(ErrorCode::InvalidArgument, "mu must lie in [0, 2/3]");
  if (!(in.kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be positive");
  if (in.n < 1 || in.r < 1) throw Error(ErrorCode::InvalidArgument, "n, r >= 1");
  if (!(in.L > 0.0 && in.C > 0.0 && in.L1 > 0.0 && in.L2 >= 0.0 && in.nu > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "schedule constants must be positive");
  }
  Schedule s;
  const double kn = in.kappa * static_cast<double>(in.n);
  s.K = std::max(1LL, robust_ceil(std::pow(kn, 1.0 / (3.0 * (1.0 - in.mu)))));
  const double K = static_cast<double>(s.K);
  s.batch = std::max(1LL, robust_ceil(std::pow(K, 2.0 - 3.0 * in.mu)));
  s.L_tilde = in.L1 * in.L1 + 4.0 * in.L2 * std::sqrt(static_cast<double>(in.r));
  s.L_hat = 2.0 * in.L2 * in.C + in.L1 * in.L1 * in.L;
  const double sqrtLt_L = std::sqrt(s.L_tilde) * in.L;
  s.c = solve_c(s.L_hat / sqrtLt_L, &s.c_capped);
  s.beta = sqrtLt_L / in.nu * std::pow(K, in.mu - 1.0);
  s.tau = s.c * in.nu / sqrtLt_L * std::pow(K, -in.mu);
  s.delta = delta_table(s.K, s.batch, s.beta, s.tau, in.nu, in.L, s.L_tilde, s.L_hat);
  for (double d : s.delta) {
    if (!(d > 0.0)) throw Error(ErrorCode::DegenerateSchedule, "a Delta_k is not positive");
  }
  s.p = psk_from_delta(s.delta);
  return s;
}

RecursionResult recursion_check(const RecursionCase& rc) {
  if (!(rc.b > 0.0)) throw Error(ErrorCode::InvalidArgument, "recursion: b must be positive");
  const auto K = static_cast<long long>(rc.a_seq.size());
  double f = rc.f0;
  double b = 0.0;
  for (long long k = 0; k < K; ++k) {
    const double ak = rc.a_seq[k];
    const double f_next = f - rc.c * ak + rc.d * b;
    const double b_next = rc.b * b + rc.a * ak;
    f = f_next;
    b = b_next;
  }
  RecursionResult res;
  res.f_K = f;
  double bound = rc.f0;
  double scale = std::abs(rc.f0);
  for (long long k = 0; k < K; ++k) {
    const double delta = rc.c - rc.a * rc.d * gamma_fn(rc.b, K - k);
    bound -= delta * rc.a_seq[k];
    scale += std::abs(delta * rc.a_seq[k]);
  }
  res.bound = bound;
  res.holds = res.f_K <= bound + 1e-12 * std::max(1.0, scale);
  return res;
}

}  // namespace ssvrg
