#pragma once

// Independent reference computations for the test suites. Nothing here
// calls into the library's numerical kernels.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sdrcde/dataset.hpp"
#include "sdrcde/kernel_basis.hpp"
#include "sdrcde/types.hpp"

namespace oracle {

using sdrcde::Index;
using sdrcde::Matrix;
using sdrcde::Vector;

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

/// Row-orthonormal matrix by classical Gram-Schmidt (run twice).
inline Matrix gram_schmidt_rows(Matrix m) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < i; ++j) m.row(i) -= m.row(i).dot(m.row(j)) * m.row(j);
      m.row(i) /= m.row(i).norm();
    }
  }
  return m;
}

inline Matrix random_rows_orthonormal(Index dz, Index dx, std::mt19937_64& rng) {
  return gram_schmidt_rows(gaussian_matrix(dz, dx, rng));
}

/// Truncated Taylor series sum_{k<=terms} M^k / k!.
inline Matrix taylor_exp(const Matrix& m, int terms = 30) {
  Matrix sum = Matrix::Identity(m.rows(), m.cols());
  Matrix term = sum;
  for (int k = 1; k <= terms; ++k) {
    term = term * m / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

/// Adaptive Gauss-Kronrod quadrature on [a, b].
inline double quad(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

/// Nested adaptive quadrature over [a0, b0] x [a1, b1].
inline double quad2(const std::function<double(double, double)>& f, double a0, double b0, double a1,
                    double b1, double tol = 1e-11) {
  return quad([&](double s) { return quad([&](double t) { return f(s, t); }, a1, b1, tol); }, a0, b0,
              tol);
}

inline double sq(double v) { return v * v; }

/// phi_k(z, y) from the definition.
inline double phi(const Vector& z, const Vector& y, const Vector& u, const Vector& v, double sigma) {
  double d = 0.0;
  for (Index i = 0; i < z.size(); ++i) d += sq(z(i) - u(i));
  for (Index i = 0; i < y.size(); ++i) d += sq(y(i) - v(i));
  return std::exp(-d / (2.0 * sigma * sigma));
}

/// Closed-form integral over y of phi_k phi_k', written out term by term.
inline double phibar_entry(const Vector& z, const Vector& uk, const Vector& ukk, const Vector& vk,
                           const Vector& vkk, double sigma) {
  double a = 0.0, b = 0.0, c = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    a += sq(z(i) - uk(i));
    b += sq(z(i) - ukk(i));
  }
  for (Index i = 0; i < vk.size(); ++i) c += sq(vk(i) - vkk(i));
  const double pref = std::pow(std::sqrt(std::numbers::pi) * sigma, static_cast<double>(vk.size()));
  return pref * std::exp(-(2.0 * a + 2.0 * b + c) / (4.0 * sigma * sigma));
}

struct System {
  Matrix G;
  Vector h;
};

/// G = (1/n) sum_i Phibar(z_i), h = (1/n) sum_i phi(z_i, y_i) by explicit
/// loops. W may be any d_z x d_x matrix (no orthonormality needed).
inline System naive_system(const Matrix& x, const Matrix& y, const Matrix& cx, const Matrix& cy,
                           const Matrix& w, double sigma, const std::vector<Index>& rows) {
  const Index b = cx.rows();
  System s{Matrix::Zero(b, b), Vector::Zero(b)};
  for (Index i : rows) {
    const Vector z = w * x.row(i).transpose();
    const Vector yi = y.row(i).transpose();
    for (Index k = 0; k < b; ++k) {
      const Vector uk = w * cx.row(k).transpose();
      s.h(k) += phi(z, yi, uk, cy.row(k).transpose(), sigma);
      for (Index kk = 0; kk < b; ++kk) {
        const Vector ukk = w * cx.row(kk).transpose();
        s.G(k, kk) +=
            phibar_entry(z, uk, ukk, cy.row(k).transpose(), cy.row(kk).transpose(), sigma);
      }
    }
  }
  const double n = static_cast<double>(rows.size());
  s.G /= n;
  s.h /= n;
  return s;
}

inline std::vector<Index> all_rows(Index n) {
  std::vector<Index> r(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = i;
  return r;
}

/// Solve by full-pivot LU (different factorization from the library).
inline Vector solve(const System& s, double lambda) {
  const Index b = s.G.rows();
  return (s.G + lambda * Matrix::Identity(b, b)).fullPivLu().solve(s.h);
}

inline double objective(const System& s, const Vector& a) {
  double quadratic = 0.0, linear = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    linear += s.h(k) * a(k);
    for (Index kk = 0; kk < a.size(); ++kk) quadratic += a(k) * s.G(k, kk) * a(kk);
  }
  return 0.5 * quadratic - linear;
}

/// S(W) with alpha re-solved at W.
inline double sce(const Matrix& x, const Matrix& y, const Matrix& cx, const Matrix& cy,
                  const Matrix& w, double sigma, double lambda) {
  const System s = naive_system(x, y, cx, cy, w, sigma, all_rows(x.rows()));
  return objective(s, solve(s, lambda));
}

/// K-fold CV by explicit loops over folds.
inline double naive_cv(const Matrix& x, const Matrix& y, const Matrix& cx, const Matrix& cy,
                       const Matrix& w, double sigma, double lambda, const std::vector<int>& folds) {
  int k_max = 0;
  for (int f : folds) k_max = std::max(k_max, f + 1);
  double total = 0.0;
  for (int j = 0; j < k_max; ++j) {
    std::vector<Index> train, test;
    for (std::size_t i = 0; i < folds.size(); ++i) {
      (folds[i] == j ? test : train).push_back(static_cast<Index>(i));
    }
    const System tr = naive_system(x, y, cx, cy, w, sigma, train);
    const System te = naive_system(x, y, cx, cy, w, sigma, test);
    total += objective(te, solve(tr, lambda));
  }
  return total / k_max;
}

/// Central finite-difference gradient of f at W.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& w,
                          double step = 1e-5) {
  Matrix g(w.rows(), w.cols());
  for (Index l = 0; l < w.rows(); ++l) {
    for (Index ll = 0; ll < w.cols(); ++ll) {
      Matrix p = w, m = w;
      p(l, ll) += step;
      m(l, ll) -= step;
      g(l, ll) = (f(p) - f(m)) / (2.0 * step);
    }
  }
  return g;
}

/// Random dataset with standard-normal inputs and outputs correlated with
/// the first input, plus a basis on the first b samples.
struct Instance {
  sdrcde::Dataset data;
  sdrcde::BasisSpec basis;
};

inline Instance random_instance(Index n, Index dx, Index dy, Index b, double sigma,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.data.X = gaussian_matrix(n, dx, rng);
  inst.data.Y = 0.5 * gaussian_matrix(n, dy, rng);
  for (Index i = 0; i < n; ++i) inst.data.Y.row(i).array() += inst.data.X(i, 0);
  inst.data.name = "random";
  inst.basis.center_inputs = inst.data.X.topRows(b);
  inst.basis.center_outputs = inst.data.Y.topRows(b);
  inst.basis.sigma = sigma;
  for (Index k = 0; k < b; ++k) inst.basis.sample_indices.push_back(k);
  return inst;
}

/// Relative error with an absolute floor.
inline double rel_err(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

}  // namespace oracle
