#pragma once

#include <cstdint>

#include "sdrcde/types.hpp"

namespace sdrcde {

/// Row-orthonormal d_z x d_x matrix representing a point on the Grassmann
/// manifold. Two representatives of the same subspace are not normalized to
/// each other; compare subspaces through projector().
class ProjectionMatrix {
 public:
  /// Throws ValidationError if ||W W^T - I||_F exceeds `tolerance`.
  explicit ProjectionMatrix(Matrix w, double tolerance = 1e-8);

  static ProjectionMatrix identity(Index dim);

  const Matrix& matrix() const { return w_; }
  Index rows() const { return w_.rows(); }
  Index cols() const { return w_.cols(); }

  /// W^T W, the d_x x d_x orthogonal projector onto the row space.
  Matrix projector() const { return w_.transpose() * w_; }

 private:
  Matrix w_;
};

/// ||W W^T - I||_F.
double orthonormality_error(const Matrix& w);

/// Rows of W re-orthonormalized by a thin QR of W^T (row space preserved).
Matrix reorthonormalize(const Matrix& w);

/// Orthonormal complement W_perp such that [W; W_perp] is orthogonal.
/// Returns a (d_x - d_z) x d_x matrix (possibly with zero rows).
Matrix complete_basis(const ProjectionMatrix& w);

/// G W_perp^T W_perp, the projection of an Euclidean gradient onto the
/// tangent space of the Grassmann manifold at W.
Matrix natural_gradient(const Matrix& grad, const ProjectionMatrix& w, const Matrix& w_perp);

/// exp(-t A) with A = [[0, G W_perp^T], [-W_perp G^T, 0]] expressed in the
/// basis [W; W_perp].
Matrix skew_block_exponential(const Matrix& grad, const ProjectionMatrix& w, const Matrix& w_perp,
                              double t);

/// Point at parameter t on the geodesic leaving W against the natural
/// gradient: W_t = [I, 0] exp(-t A) [W; W_perp]. Increasing t descends.
ProjectionMatrix geodesic_point(const ProjectionMatrix& w, const Matrix& w_perp, const Matrix& grad,
                                double t);

/// Orthonormalized seeded standard-normal draw (Haar distributed).
ProjectionMatrix random_orthonormal(Index dz, Index dx, std::uint64_t seed);

}  // namespace sdrcde
