#pragma once

// The end-to-end acceptance checks, shared by the acceptance test binary and
// `bench verify`. Each check prints nothing itself; callers render results.

#include <functional>
#include <string>
#include <vector>

namespace ssvrg {

enum class Verdict { Pass, Fail, Skipped };

struct CheckResult {
  int id = 0;
  std::string title;
  Verdict verdict = Verdict::Fail;
  std::string detail;
  double seconds = 0.0;
};

struct CheckOptions {
  bool large_scale = false;  // enable the large PCA spot check (8)
  int large_runs = 5;
  int jobs = 1;
  std::function<void(const CheckResult&)> on_result;  // called as each check finishes
};

inline constexpr int kCheckCount = 11;

/// Runs the listed checks (all when empty) in ascending order.
std::vector<CheckResult> run_checks(const CheckOptions& options, std::vector<int> ids = {});

/// "[PASS] 3 title: detail (1.2 s)".
std::string format_result(const CheckResult& r);

}  // namespace ssvrg
