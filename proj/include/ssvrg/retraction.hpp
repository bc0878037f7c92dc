#pragma once

// The retraction family on St(d,r) / Gr(d,r). Free retractions move along a
// tangent direction E; the gradient projection (Gp) and gradient reflection
// (Gr) retractions are driven by a Euclidean gradient instead.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>

#include "ssvrg/manifold.hpp"

namespace ssvrg {

enum class RetractionKind { Exp1, Qr, Pd, Wy, Jd, Gp, Gr, Exp2 };

inline constexpr std::array<RetractionKind, 8> kAllRetractions = {
    RetractionKind::Exp1, RetractionKind::Qr, RetractionKind::Pd, RetractionKind::Wy,
    RetractionKind::Jd,   RetractionKind::Gp, RetractionKind::Gr, RetractionKind::Exp2};

std::string_view to_string(RetractionKind kind);

/// Accepts exp (= exp1), exp1, exp2, qr, pd, wy, jd, gp, gr.
RetractionKind parse_retraction(std::string_view name);

/// True for Gp and Gr, whose direction is tied to a Euclidean gradient.
constexpr bool is_gradient_coupled(RetractionKind kind) {
  return kind == RetractionKind::Gp || kind == RetractionKind::Gr;
}

/// The phi function used by the Jd retraction.
///  Linear:    phi(t) = t / 2  (smooth; Jd then coincides with Wy)
///  Piecewise: phi(t) = t / 2 for t < 1e-10, 1/2 otherwise
enum class JdPhi { Linear, Piecewise };

double jd_phi(JdPhi phi, double t);

/// phi(0) = 0 and phi'(0) = 1/2, checked as |phi(h)/h - 1/2| <= 1e-4 at h = 1e-12.
bool jd_phi_admissible(JdPhi phi);

struct Retraction {
  RetractionKind kind = RetractionKind::Pd;
  JdPhi phi = JdPhi::Linear;
};

/// R(X, tE) for the free kinds. t must be nonnegative; for Exp2 E must be
/// horizontal. Throws InvalidArgument for Gp/Gr and SingularStep when the
/// small solve inside Wy/Jd is singular.
Matrix retract(const Retraction& retraction, const Matrix& X, const Matrix& E, double t);
Matrix retract(RetractionKind kind, const Matrix& X, const Matrix& E, double t);
StiefelPoint retract(const Retraction& retraction, const StiefelPoint& X, const TangentVector& E,
                     double t);

/// polar(X - t G): derivative at 0 is -D_{1/4}(X, G).
Matrix retract_gp(const Matrix& X, const Matrix& eucl_dir, double t);

/// (-I + 2 Xb (Xb^T Xb)^+ Xb^T) X with Xb = X - t G: derivative at 0 is -2 D_0(X, G).
Matrix retract_gr(const Matrix& X, const Matrix& eucl_dir, double t);

/// One descent step of size tau. Free kinds move along -rgrad; Gp/Gr consume the
/// Euclidean gradient directly and never need rgrad.
Matrix descent_step(const Retraction& retraction, const Matrix& X, const Matrix& egrad,
                    const Matrix* rgrad, double rho, double tau);

/// Declared R'(0) for a gradient-coupled retraction driven by G.
Matrix declared_velocity(RetractionKind kind, const Matrix& X, const Matrix& eucl_dir);

/// A retraction curve t -> R(t) through X with known velocity at t = 0. For
/// t < 0 the curve is continued through the negated direction.
struct RetractionCurve {
  Matrix X;
  Matrix velocity;
  std::function<Matrix(double)> at;
};

/// Random curve of the given kind on St(d, r): a Stiefel tangent for the free
/// kinds, a horizontal tangent for Exp2, a Gaussian Euclidean direction for
/// Gp/Gr. The direction is scaled log-uniformly in [0.1, 10].
RetractionCurve sample_curve(const Retraction& retraction, Index d, Index r, std::mt19937_64& rng);

struct L1L2Estimate {
  double L1_hat = 0.0;
  double L2_hat = 0.0;
};

/// Empirical suprema of ||R(t) - X|| / (t ||R'(0)||) and
/// ||R(t) - X - t R'(0)|| / (t^2 ||R'(0)||^2), with t log-uniform in [1e-2, 10].
L1L2Estimate estimate_l1_l2(const std::function<RetractionCurve(std::mt19937_64&)>& sampler,
                            int trials, std::uint64_t seed);
L1L2Estimate estimate_l1_l2(const Retraction& retraction, int trials, std::uint64_t seed,
                            Index d = 10, Index r = 3);

/// Certified (L1, L2) where known: Pd -> (1, 1/2), Qr -> (1 + sqrt(2)/2, sqrt(10)/2).
std::optional<L1L2Estimate> certified_l1_l2(RetractionKind kind);

}  // namespace ssvrg
