#include "ssvrg/retraction.hpp"

#include <cmath>
#include <string>

#include "ssvrg/error.hpp"
#include "ssvrg/rng.hpp"

namespace ssvrg {

namespace {

// Reciprocal condition below which the small Wy/Jd solve is declared singular.
constexpr double kSingularRcond = 1e-14;

void check_step_args(const Matrix& X, const Matrix& E, double t) {
  if (X.rows() != E.rows() || X.cols() != E.cols()) {
    throw Error(ErrorCode::InvalidArgument, "retract: shape mismatch");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidArgument, "retract: t must be finite and nonnegative");
  }
}

Matrix retract_exp1(const Matrix& X, const Matrix& E, double t) {
  const Index d = X.rows();
  const Index r = X.cols();
  if (d < 2 * r) {
    throw Error(ErrorCode::InvalidArgument, "exp1 retraction needs d >= 2r");
  }
  const Matrix XtE = X.transpose() * E;
  const Matrix D = E - X * XtE;

  // QR of [X D]: the trailing block gives an orthonormal basis Q2 orthogonal
  // to X together with upp(D), and stays well defined when D loses rank.
  Matrix XD(d, 2 * r);
  XD << X, D;
  Eigen::HouseholderQR<Matrix> qr(XD);
  const Matrix Qfull = qr.householderQ() * Matrix::Identity(d, 2 * r);
  Matrix Q2 = Qfull.rightCols(r);
  Matrix R22 = qr.matrixQR().block(r, r, r, r).triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j) {
    if (R22(j, j) < 0.0) {
      R22.row(j) *= -1.0;
      Q2.col(j) *= -1.0;
    }
  }

  Matrix M = Matrix::Zero(2 * r, 2 * r);
  M.topLeftCorner(r, r) = XtE;
  M.topRightCorner(r, r) = -R22.transpose();
  M.bottomLeftCorner(r, r) = R22;
  const Matrix expM = expm(t * M);
  return X * expM.topLeftCorner(r, r) + Q2 * expM.bottomLeftCorner(r, r);
}

Matrix retract_exp2(const Matrix& X, const Matrix& E, double t) {
  if (E.norm() == 0.0) return X;
  Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector st = svd.singularValues() * t;
  const Matrix& U = svd.matrixU();
  const Matrix& V = svd.matrixV();
  const Vector c = st.array().cos();
  const Vector s = st.array().sin();
  return (X * V * c.asDiagonal() + U * s.asDiagonal()) * V.transpose();
}

Matrix retract_wy(const Matrix& X, const Matrix& E, double t) {
  const Index d = X.rows();
  const Index r = X.cols();
  const Matrix PE = E - 0.5 * X * (X.transpose() * E);  // P_X E with P_X = I - X X^T / 2
  Matrix U(d, 2 * r);
  U << -PE, X;
  Matrix V(d, 2 * r);
  V << X, PE;
  const Matrix M = Matrix::Identity(2 * r, 2 * r) + (0.5 * t) * (V.transpose() * U);
  Eigen::PartialPivLU<Matrix> lu(M);
  if (!(lu.rcond() > kSingularRcond)) {
    throw Error(ErrorCode::SingularStep, "wy retraction: singular inner system");
  }
  return X - t * U * lu.solve(V.transpose() * X);
}

Matrix retract_jd(const Matrix& X, const Matrix& E, double t, JdPhi phi) {
  const Index r = X.cols();
  const Matrix XtE = X.transpose() * E;
  const Matrix D = E - X * XtE;
  const Matrix J = Matrix::Identity(r, r) + (0.25 * t * t) * (D.transpose() * D) -
                   jd_phi(phi, t) * XtE;
  // (2X + tD) J^{-1} = (J^{-T} (2X + tD)^T)^T
  const Matrix Jt = J.transpose();
  Eigen::PartialPivLU<Matrix> lu(Jt);
  if (!(lu.rcond() > kSingularRcond)) {
    throw Error(ErrorCode::SingularStep, "jd retraction: J(t) is singular");
  }
  const Matrix B = 2.0 * X + t * D;
  return lu.solve(B.transpose()).transpose() - X;
}

}  // namespace

std::string_view to_string(RetractionKind kind) {
  switch (kind) {
    case RetractionKind::Exp1: return "exp";
    case RetractionKind::Qr: return "qr";
    case RetractionKind::Pd: return "pd";
    case RetractionKind::Wy: return "wy";
    case RetractionKind::Jd: return "jd";
    case RetractionKind::Gp: return "gp";
    case RetractionKind::Gr: return "gr";
    case RetractionKind::Exp2: return "exp2";
  }
  return "?";
}

RetractionKind parse_retraction(std::string_view name) {
  if (name == "exp" || name == "exp1") return RetractionKind::Exp1;
  if (name == "exp2") return RetractionKind::Exp2;
  if (name == "qr") return RetractionKind::Qr;
  if (name == "pd") return RetractionKind::Pd;
  if (name == "wy") return RetractionKind::Wy;
  if (name == "jd") return RetractionKind::Jd;
  if (name == "gp") return RetractionKind::Gp;
  if (name == "gr") return RetractionKind::Gr;
  throw Error(ErrorCode::InvalidArgument, "unknown retraction '" + std::string(name) + "'");
}

double jd_phi(JdPhi phi, double t) {
  if (phi == JdPhi::Linear) return 0.5 * t;
  return t < 1e-10 ? 0.5 * t : 0.5;
}

bool jd_phi_admissible(JdPhi phi) {
  constexpr double h = 1e-12;
  return jd_phi(phi, 0.0) == 0.0 && std::abs(jd_phi(phi, h) / h - 0.5) <= 1e-4;
}

Matrix retract(const Retraction& retraction, const Matrix& X, const Matrix& E, double t) {
  check_step_args(X, E, t);
  if (t == 0.0) return X;
  switch (retraction.kind) {
    case RetractionKind::Exp1: return retract_exp1(X, E, t);
    case RetractionKind::Qr: return qr_positive(X + t * E).Q;
    case RetractionKind::Pd: return polar_project(X + t * E);
    case RetractionKind::Wy: return retract_wy(X, E, t);
    case RetractionKind::Jd: return retract_jd(X, E, t, retraction.phi);
    case RetractionKind::Exp2: return retract_exp2(X, E, t);
    case RetractionKind::Gp:
    case RetractionKind::Gr:
      break;
  }
  throw Error(ErrorCode::InvalidArgument,
              "retract: " + std::string(to_string(retraction.kind)) +
                  " takes a Euclidean gradient, use retract_gp / retract_gr");
}

Matrix retract(RetractionKind kind, const Matrix& X, const Matrix& E, double t) {
  return retract(Retraction{kind, JdPhi::Linear}, X, E, t);
}

StiefelPoint retract(const Retraction& retraction, const StiefelPoint& X, const TangentVector& E,
                     double t) {
  return StiefelPoint(retract(retraction, X.matrix(), E.matrix(), t), X.geometry());
}

Matrix retract_gp(const Matrix& X, const Matrix& eucl_dir, double t) {
  check_step_args(X, eucl_dir, t);
  if (t == 0.0) return X;
  return polar_project(X - t * eucl_dir);
}

Matrix retract_gr(const Matrix& X, const Matrix& eucl_dir, double t) {
  check_step_args(X, eucl_dir, t);
  if (t == 0.0) return X;
  const Matrix Xb = X - t * eucl_dir;
  const Matrix P = pinv_gram(Xb.transpose() * Xb);
  return 2.0 * (Xb * (P * (Xb.transpose() * X))) - X;
}

Matrix descent_step(const Retraction& retraction, const Matrix& X, const Matrix& egrad,
                    const Matrix* rgrad, double rho, double tau) {
  switch (retraction.kind) {
    case RetractionKind::Gp: return retract_gp(X, egrad, tau);
    case RetractionKind::Gr: return retract_gr(X, egrad, tau);
    default: break;
  }
  if (rgrad != nullptr) return retract(retraction, X, -*rgrad, tau);
  return retract(retraction, X, -d_rho_matrix(X, egrad, rho), tau);
}

Matrix declared_velocity(RetractionKind kind, const Matrix& X, const Matrix& eucl_dir) {
  if (kind == RetractionKind::Gp) return -d_rho_matrix(X, eucl_dir, 0.25);
  if (kind == RetractionKind::Gr) return -2.0 * d_rho_matrix(X, eucl_dir, 0.0);
  throw Error(ErrorCode::InvalidArgument, "declared_velocity: not a gradient-coupled kind");
}

RetractionCurve sample_curve(const Retraction& retraction, Index d, Index r, std::mt19937_64& rng) {
  const Matrix X = qr_positive(gaussian_matrix(d, r, rng)).Q;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = std::pow(10.0, -1.0 + 2.0 * unit(rng));
  const Matrix Z = gaussian_matrix(d, r, rng);

  RetractionCurve curve;
  curve.X = X;
  if (is_gradient_coupled(retraction.kind)) {
    const Matrix G = scale * Z / Z.norm();
    const RetractionKind kind = retraction.kind;
    curve.velocity = declared_velocity(kind, X, G);
    curve.at = [X, G, kind](double t) {
      const Matrix dir = t >= 0.0 ? G : Matrix(-G);
      return kind == RetractionKind::Gp ? retract_gp(X, dir, std::abs(t))
                                        : retract_gr(X, dir, std::abs(t));
    };
    return curve;
  }
  const TangentSpace space = retraction.kind == RetractionKind::Exp2
                                 ? TangentSpace::GrassmannHorizontal
                                 : TangentSpace::StiefelTangent;
  Matrix E = tangent_project_matrix(X, Z, space);
  E *= scale / E.norm();
  curve.velocity = E;
  curve.at = [X, E, retraction](double t) {
    const Matrix dir = t >= 0.0 ? E : Matrix(-E);
    return retract(retraction, X, dir, std::abs(t));
  };
  return curve;
}

L1L2Estimate estimate_l1_l2(const std::function<RetractionCurve(std::mt19937_64&)>& sampler,
                            int trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "estimate_l1_l2: trials < 1");
  Rng rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  L1L2Estimate est;
  for (int k = 0; k < trials; ++k) {
    const RetractionCurve curve = sampler(rng);
    const double t = std::pow(10.0, -2.0 + 3.0 * unit(rng));  // log-uniform in [1e-2, 10]
    const double vnorm = curve.velocity.norm();
    if (vnorm == 0.0) continue;
    const Matrix Rt = curve.at(t);
    const double l1 = (Rt - curve.X).norm() / (t * vnorm);
    const double l2 = (Rt - curve.X - t * curve.velocity).norm() / (t * t * vnorm * vnorm);
    est.L1_hat = std::max(est.L1_hat, l1);
    est.L2_hat = std::max(est.L2_hat, l2);
  }
  return est;
}

L1L2Estimate estimate_l1_l2(const Retraction& retraction, int trials, std::uint64_t seed, Index d,
                            Index r) {
  return estimate_l1_l2(
      [&](std::mt19937_64& rng) { return sample_curve(retraction, d, r, rng); }, trials, seed);
}

std::optional<L1L2Estimate> certified_l1_l2(RetractionKind kind) {
  if (kind == RetractionKind::Pd) return L1L2Estimate{1.0, 0.5};
  if (kind == RetractionKind::Qr) return L1L2Estimate{1.0 + std::sqrt(2.0) / 2.0, std::sqrt(10.0) / 2.0};
  return std::nullopt;
}

}  // namespace ssvrg
