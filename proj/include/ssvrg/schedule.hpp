#pragma once

// Parameter schedule with guaranteed per-epoch decrease, the Delta/Gamma
// weights and the output-sampling probabilities derived from them.

#include <cstdint>
#include <vector>

namespace ssvrg {

/// Gamma(z, i) = ((1 + z)^(i - 1) - 1) / z, with the z -> 0 limit i - 1.
double gamma_fn(double z, long long i);

struct ScheduleInputs {
  long long n = 1;
  double mu = 0.0;     // in [0, 2/3]
  double kappa = 1.0;  // > 0
  double L = 1.0;      // component-gradient Lipschitz constant
  double C = 1.0;      // gradient bound
  double L1 = 1.0;     // retraction constants
  double L2 = 0.5;
  long long r = 1;
  double nu = 1.0;     // lower norm-equivalence constant of the metric
};

struct Schedule {
  long long K = 1;
  long long batch = 1;
  double beta = 0.0;
  double tau = 0.0;
  double c = 0.0;
  bool c_capped = false;  // condition already holds at c = 1
  double L_tilde = 0.0;   // L1^2 + 4 L2 sqrt(r)
  double L_hat = 0.0;     // 2 L2 C + L1^2 L
  std::vector<double> delta;  // Delta_k, k = 0..K-1
  std::vector<double> p;      // p_k, k = 0..K, p_K = 0
};

/// Largest c in (0, 1] with ratio * exp(c^2 + 2c) * c <= 1, by bisection.
/// Throws NoFeasibleC if even c = 1e-8 fails.
double solve_c(double ratio, bool* capped = nullptr);

/// Left-hand side of the c condition.
double c_condition(double ratio, double c);

/// Full schedule. Throws InvalidArgument on bad inputs and DegenerateSchedule
/// if any Delta_k <= 0.
Schedule decrease_schedule(const ScheduleInputs& in);

/// Delta_k for k = 0..K-1 at arbitrary (beta, tau, batch).
std::vector<double> delta_table(long long K, long long batch, double beta, double tau, double nu,
                                double L, double L_tilde, double L_hat);

/// Probabilities Delta_k / sum Delta for k < K, p_K = 0.
std::vector<double> psk_from_delta(const std::vector<double>& delta);

/// Variant that puts weight alpha^2 on k = K.
std::vector<double> psk_linear(const std::vector<double>& delta, double alpha);

struct RecursionCase {
  std::vector<double> a_seq;  // a_k >= 0, k = 0..K-1
  double a = 1.0;
  double b = 2.0;  // > 0
  double c = 1.0;
  double d = 1.0;
  double f0 = 0.0;
};

struct RecursionResult {
  double f_K = 0.0;      // recursion run with equality
  double bound = 0.0;    // f0 - sum Delta_k a_k
  bool holds = false;
};

/// Runs f_{k+1} = f_k - c a_k + d b_k, b_{k+1} = b b_k + a a_k from b_0 = 0
/// and compares f_K with f_0 - sum_k (c - a d Gamma(b, K - k)) a_k.
RecursionResult recursion_check(const RecursionCase& rc);

}  // namespace ssvrg
