#include "sdrcde/manifold.hpp"

#include <cmath>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "sdrcde/error.hpp"

namespace sdrcde {

namespace {

void check_shapes(const Matrix& grad, const ProjectionMatrix& w, const Matrix& w_perp) {
  if (grad.rows() != w.rows() || grad.cols() != w.cols()) {
    throw ValidationError("gradient shape does not match W");
  }
  if (w_perp.cols() != w.cols() || w_perp.rows() != w.cols() - w.rows()) {
    throw ValidationError("complement shape does not match W");
  }
}

}  // namespace

ProjectionMatrix::ProjectionMatrix(Matrix w, double tolerance) : w_(std::move(w)) {
  if (w_.rows() < 1 || w_.rows() > w_.cols()) {
    throw ValidationError("projection must satisfy 1 <= d_z <= d_x, got " +
                          std::to_string(w_.rows()) + "x" + std::to_string(w_.cols()));
  }
  if (!w_.allFinite()) {
    throw ValidationError("projection has non-finite entries");
  }
  const double err = orthonormality_error(w_);
  if (!(err <= tolerance)) {
    throw ValidationError("projection rows are not orthonormal (deviation " + std::to_string(err) +
                          ")");
  }
}

ProjectionMatrix ProjectionMatrix::identity(Index dim) {
  return ProjectionMatrix(Matrix::Identity(dim, dim));
}

double orthonormality_error(const Matrix& w) {
  return (w * w.transpose() - Matrix::Identity(w.rows(), w.rows())).norm();
}

Matrix reorthonormalize(const Matrix& w) {
  Eigen::HouseholderQR<Matrix> qr(w.transpose());
  Matrix q = qr.householderQ() * Matrix::Identity(w.cols(), w.rows());
  // Keep the orientation of each row so the representative barely moves.
  const Matrix r = qr.matrixQR().topRows(w.rows()).triangularView<Eigen::Upper>();
  for (Index j = 0; j < w.rows(); ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q.transpose();
}

Matrix complete_basis(const ProjectionMatrix& w) {
  const Index dz = w.rows();
  const Index dx = w.cols();
  if (dz == dx) return Matrix(0, dx);
  Eigen::HouseholderQR<Matrix> qr(w.matrix().transpose());
  const Matrix q = qr.householderQ();
  return q.rightCols(dx - dz).transpose();
}

Matrix natural_gradient(const Matrix& grad, const ProjectionMatrix& w, const Matrix& w_perp) {
  check_shapes(grad, w, w_perp);
  return grad * w_perp.transpose() * w_perp;
}

Matrix skew_block_exponential(const Matrix& grad, const ProjectionMatrix& w, const Matrix& w_perp,
                              double t) {
  check_shapes(grad, w, w_perp);
  if (!std::isfinite(t) || !grad.allFinite()) {
    throw ValidationError("geodesic inputs must be finite");
  }
  const Index dz = w.rows();
  const Index dx = w.cols();
  const Index dp = dx - dz;
  Matrix a = Matrix::Zero(dx, dx);
  if (dp > 0) {
    const Matrix block = grad * w_perp.transpose();
    a.topRightCorner(dz, dp) = block;
    a.bottomLeftCorner(dp, dz) = -block.transpose();
  }
  return (-t * a).exp();
}

ProjectionMatrix geodesic_point(const ProjectionMatrix& w, const Matrix& w_perp, const Matrix& grad,
                                double t) {
  const Matrix rotation = skew_block_exponential(grad, w, w_perp, t);
  if (t == 0.0) return w;
  Matrix stacked(w.cols(), w.cols());
  stacked.topRows(w.rows()) = w.matrix();
  stacked.bottomRows(w_perp.rows()) = w_perp;
  Matrix next = rotation.topRows(w.rows()) * stacked;
  // Floating-point drift over many steps; the exact map is orthogonal.
  if (orthonormality_error(next) > 1e-10) next = reorthonormalize(next);
  return ProjectionMatrix(std::move(next));
}

ProjectionMatrix random_orthonormal(Index dz, Index dx, std::uint64_t seed) {
  if (dz < 1 || dz > dx) {
    throw ValidationError("random_orthonormal requires 1 <= d_z <= d_x");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix draw(dz, dx);
  for (Index i = 0; i < dz; ++i) {
    for (Index j = 0; j < dx; ++j) draw(i, j) = normal(rng);
  }
  return ProjectionMatrix(reorthonormalize(draw));
}

}  // namespace sdrcde
