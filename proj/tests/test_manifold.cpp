#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sdrcde/error.hpp"
#include "sdrcde/manifold.hpp"

using namespace sdrcde;

namespace {

Matrix stacked(const Matrix& w, const Matrix& perp) {
  Matrix m(w.rows() + perp.rows(), w.cols());
  m << w, perp;
  return m;
}

}  // namespace

TEST(ProjectionMatrix, RejectsNonOrthonormalAndBadShapes) {
  EXPECT_THROW(ProjectionMatrix(Matrix::Ones(1, 3)), ValidationError);
  EXPECT_THROW(ProjectionMatrix(Matrix::Identity(3, 2)), ValidationError);
  EXPECT_THROW(ProjectionMatrix(Matrix(0, 3)), ValidationError);
  Matrix nan = Matrix::Identity(1, 2);
  nan(0, 1) = std::nan("");
  EXPECT_THROW(ProjectionMatrix{nan}, ValidationError);
  EXPECT_NO_THROW(ProjectionMatrix(Matrix::Identity(2, 4)));
}

TEST(CompleteBasis, TwoDimensionalExample) {
  Matrix w(1, 2);
  w << 1, 0;
  const Matrix perp = complete_basis(ProjectionMatrix(w));
  ASSERT_EQ(perp.rows(), 1);
  EXPECT_NEAR(std::abs(perp(0, 1)), 1.0, 1e-14);
  EXPECT_NEAR(perp(0, 0), 0.0, 1e-14);
}

TEST(CompleteBasis, FullDimensionGivesEmptyComplement) {
  const Matrix perp = complete_basis(ProjectionMatrix::identity(3));
  EXPECT_EQ(perp.rows(), 0);
  EXPECT_EQ(perp.cols(), 3);
}

TEST(CompleteBasis, RandomStackIsOrthogonal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ProjectionMatrix w = random_orthonormal(2, 5, seed);
    const Matrix m = stacked(w.matrix(), complete_basis(w));
    EXPECT_LT((m * m.transpose() - Matrix::Identity(5, 5)).norm(), 1e-10);
  }
}

TEST(NaturalGradient, GradientEqualToWVanishes) {
  const ProjectionMatrix w = random_orthonormal(2, 5, 3);
  const Matrix ng = natural_gradient(w.matrix(), w, complete_basis(w));
  EXPECT_LT(ng.norm(), 1e-12);
}

TEST(NaturalGradient, ComplementRowsUnchanged) {
  std::mt19937_64 rng(4);
  const ProjectionMatrix w = random_orthonormal(2, 5, 4);
  const Matrix perp = complete_basis(w);
  const Matrix g = oracle::gaussian_matrix(2, perp.rows(), rng) * perp;
  EXPECT_LT((natural_gradient(g, w, perp) - g).norm(), 1e-12);
}

TEST(NaturalGradient, MatchesProjectorFormulaAndIsIdempotent) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix wm = oracle::random_rows_orthonormal(2, 6, rng);
    const ProjectionMatrix w(wm);
    const Matrix perp = complete_basis(w);
    const Matrix g = oracle::gaussian_matrix(2, 6, rng);
    const Matrix ng = natural_gradient(g, w, perp);
    const Matrix expected = g * (Matrix::Identity(6, 6) - wm.transpose() * wm);
    EXPECT_LT((ng - expected).norm(), 1e-12);
    EXPECT_LT((natural_gradient(ng, w, perp) - ng).norm(), 1e-12);
  }
}

TEST(SkewBlockExponential, ZeroGradientIsIdentity) {
  const ProjectionMatrix w = random_orthonormal(2, 4, 1);
  const Matrix perp = complete_basis(w);
  for (double t : {0.0, 0.5, 7.0}) {
    EXPECT_LT((skew_block_exponential(Matrix::Zero(2, 4), w, perp, t) - Matrix::Identity(4, 4)).norm(),
              1e-15);
  }
}

TEST(SkewBlockExponential, PlanarRotation) {
  // d_z = d_x - d_z = 1, W = e1, W_perp = e2: A = [[0, theta], [-theta, 0]]
  // with theta = G W_perp^T.
  Matrix w(1, 2), perp(1, 2), g(1, 2);
  w << 1, 0;
  perp << 0, 1;
  const double theta = 0.7;
  g << 0, theta;
  // exp(-A) for A = [[0, th], [-th, 0]] is the rotation by +theta.
  const Matrix e = skew_block_exponential(g, ProjectionMatrix(w), perp, 1.0);
  Matrix rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  EXPECT_LT((e - rot).norm(), 1e-14);
}

TEST(SkewBlockExponential, MatchesTaylorSeries) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Index dz = 1 + trial % 2, dx = 3 + trial % 3;
    const ProjectionMatrix w(oracle::random_rows_orthonormal(dz, dx, rng));
    const Matrix perp = complete_basis(w);
    const Matrix g = oracle::gaussian_matrix(dz, dx, rng);
    const Matrix b = g * perp.transpose();
    Matrix a = Matrix::Zero(dx, dx);
    a.topRightCorner(dz, dx - dz) = b;
    a.bottomLeftCorner(dx - dz, dz) = -b.transpose();
    const double t = 0.3;
    EXPECT_LT((skew_block_exponential(g, w, perp, t) - oracle::taylor_exp(-t * a)).norm(), 1e-9);
  }
}

TEST(SkewBlockExponential, OneParameterGroup) {
  std::mt19937_64 rng(10);
  const ProjectionMatrix w(oracle::random_rows_orthonormal(2, 5, rng));
  const Matrix perp = complete_basis(w);
  const Matrix g = oracle::gaussian_matrix(2, 5, rng);
  const Matrix e12 = skew_block_exponential(g, w, perp, 1.9);
  const Matrix e1 = skew_block_exponential(g, w, perp, 0.7);
  const Matrix e2 = skew_block_exponential(g, w, perp, 1.2);
  EXPECT_LT((e12 - e1 * e2).norm(), 1e-9);
}

TEST(GeodesicPoint, TimeZeroReturnsWExactly) {
  std::mt19937_64 rng(11);
  const ProjectionMatrix w = random_orthonormal(2, 5, 11);
  const Matrix g = oracle::gaussian_matrix(2, 5, rng);
  const ProjectionMatrix w0 = geodesic_point(w, complete_basis(w), g, 0.0);
  EXPECT_TRUE(w0.matrix() == w.matrix());
}

TEST(GeodesicPoint, ZeroGradientStaysPut) {
  const ProjectionMatrix w = random_orthonormal(1, 4, 12);
  const ProjectionMatrix wt = geodesic_point(w, complete_basis(w), Matrix::Zero(1, 4), 3.0);
  EXPECT_LT((wt.matrix() - w.matrix()).norm(), 1e-14);
}

TEST(GeodesicPoint, TangentIsNegativeNaturalGradient) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const ProjectionMatrix w(oracle::random_rows_orthonormal(2, 5, rng));
    const Matrix perp = complete_basis(w);
    const Matrix g = oracle::gaussian_matrix(2, 5, rng);
    const double t = 1e-6;
    const Matrix tangent = (geodesic_point(w, perp, g, t).matrix() - w.matrix()) / t;
    EXPECT_LT((tangent + natural_gradient(g, w, perp)).norm(), 1e-5);
  }
}

TEST(GeodesicPoint, StaysOrthonormalForLongTimes) {
  std::mt19937_64 rng(14);
  const ProjectionMatrix w(oracle::random_rows_orthonormal(2, 6, rng));
  const Matrix perp = complete_basis(w);
  const Matrix g = oracle::gaussian_matrix(2, 6, rng);
  for (int i = 0; i <= 100; ++i) {
    const ProjectionMatrix wt = geodesic_point(w, perp, g, static_cast<double>(i));
    EXPECT_LT(orthonormality_error(wt.matrix()), 1e-10) << "t=" << i;
  }
}

TEST(RandomOrthonormal, Deterministic) {
  EXPECT_TRUE(random_orthonormal(2, 5, 42).matrix() == random_orthonormal(2, 5, 42).matrix());
  EXPECT_FALSE(random_orthonormal(2, 5, 42).matrix() == random_orthonormal(2, 5, 43).matrix());
}

TEST(RandomOrthonormal, SquareIsOrthogonal) {
  const Matrix q = random_orthonormal(3, 3, 7).matrix();
  EXPECT_NEAR(std::abs(q.determinant()), 1.0, 1e-10);
  EXPECT_LT(orthonormality_error(q), 1e-10);
}

TEST(RandomOrthonormal, SubspaceAngleIsUniform) {
  // A line in the plane: its angle mod pi should be uniform on [0, pi).
  const int draws = 1000;
  std::vector<double> u;
  for (int i = 0; i < draws; ++i) {
    const Matrix w = random_orthonormal(1, 2, 1000 + static_cast<std::uint64_t>(i)).matrix();
    double angle = std::atan2(w(0, 1), w(0, 0));
    if (angle < 0) angle += std::numbers::pi;
    if (angle >= std::numbers::pi) angle -= std::numbers::pi;
    u.push_back(angle / std::numbers::pi);
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (int i = 0; i < draws; ++i) {
    ks = std::max({ks, std::abs((i + 1.0) / draws - u[i]), std::abs(u[i] - static_cast<double>(i) / draws)});
  }
  EXPECT_LT(ks, 0.05);
}

TEST(Reorthonormalize, PreservesRowSpace) {
  std::mt19937_64 rng(15);
  const Matrix m = oracle::gaussian_matrix(2, 5, rng);
  const Matrix q = reorthonormalize(m);
  EXPECT_LT(orthonormality_error(q), 1e-12);
  const Matrix expected = oracle::gram_schmidt_rows(m);
  EXPECT_LT((q.transpose() * q - expected.transpose() * expected).norm(), 1e-12);
}
