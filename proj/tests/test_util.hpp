#pragma once

#include <random>

#include "ssvrg/linalg.hpp"
#include "ssvrg/manifold.hpp"
#include "ssvrg/oracles.hpp"
#include "ssvrg/rng.hpp"

namespace ssvrg::test {

inline Rng rng_for(std::uint64_t tag) { return Rng(splitmix64(tag)); }

/// Random point on St(d, r) built with the Gram-Schmidt oracle.
inline Matrix random_stiefel(Index d, Index r, Rng& rng) {
  return oracle::gram_schmidt_qr(gaussian_matrix(d, r, rng)).Q;
}

inline Matrix random_tangent(const Matrix& X, Rng& rng, TangentSpace space = TangentSpace::StiefelTangent) {
  const Matrix Z = gaussian_matrix(X.rows(), X.cols(), rng);
  const Matrix XtZ = X.transpose() * Z;
  if (space == TangentSpace::GrassmannHorizontal) return Z - X * XtZ;
  return Z - X * (0.5 * (XtZ + XtZ.transpose()));
}

inline Matrix random_spd(Index m, Rng& rng) {
  const Matrix G = gaussian_matrix(m, m, rng);
  return G * G.transpose() + 0.5 * Matrix::Identity(m, m);
}

}  // namespace ssvrg::test
