#include "sdrcde/kernel_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "sdrcde/error.hpp"

namespace sdrcde {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("bandwidth must be positive and finite, got " + std::to_string(sigma));
  }
}

void check_query(const Vector& z, const BasisSpec& basis, const ProjectionMatrix& w) {
  check_sigma(basis.sigma);
  if (w.cols() != basis.center_inputs.cols()) {
    throw ValidationError("W columns do not match center input dimension");
  }
  if (z.size() != w.rows()) throw ValidationError("z dimension does not match W rows");
}

void column_stats(const Matrix& m, Vector& mean, Vector& scale, std::vector<bool>& degenerate) {
  const Index n = m.rows();
  mean = m.colwise().mean().transpose();
  scale.resize(m.cols());
  degenerate.assign(static_cast<std::size_t>(m.cols()), false);
  for (Index c = 0; c < m.cols(); ++c) {
    const double var = (m.col(c).array() - mean(c)).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd > 0.0 && std::isfinite(sd)) {
      scale(c) = sd;
    } else {
      scale(c) = 1.0;
      degenerate[static_cast<std::size_t>(c)] = true;
    }
  }
}

}  // namespace

bool StandardizationStats::has_degenerate() const {
  return std::ranges::any_of(x_degenerate, [](bool b) { return b; }) ||
         std::ranges::any_of(y_degenerate, [](bool b) { return b; });
}

Vector StandardizationStats::standardize_x(const Vector& x) const {
  if (x.size() != x_mean.size()) throw ValidationError("x dimension mismatch");
  return ((x - x_mean).array() / x_scale.array()).matrix();
}

Vector StandardizationStats::standardize_y(const Vector& y) const {
  if (y.size() != y_mean.size()) throw ValidationError("y dimension mismatch");
  return ((y - y_mean).array() / y_scale.array()).matrix();
}

double StandardizationStats::y_jacobian() const { return 1.0 / y_scale.prod(); }

StandardizationStats StandardizationStats::identity(Index dx, Index dy) {
  StandardizationStats s;
  s.x_mean = Vector::Zero(dx);
  s.x_scale = Vector::Ones(dx);
  s.y_mean = Vector::Zero(dy);
  s.y_scale = Vector::Ones(dy);
  s.x_degenerate.assign(static_cast<std::size_t>(dx), false);
  s.y_degenerate.assign(static_cast<std::size_t>(dy), false);
  return s;
}

StandardizationStats fit_standardizer(const Dataset& data) {
  data.validate();
  if (data.size() < 2) throw ValidationError("standardization needs at least 2 samples");
  StandardizationStats s;
  column_stats(data.X, s.x_mean, s.x_scale, s.x_degenerate);
  column_stats(data.Y, s.y_mean, s.y_scale, s.y_degenerate);
  return s;
}

Dataset apply_standardizer(const StandardizationStats& stats, const Dataset& data) {
  if (data.dx() != stats.x_mean.size() || data.dy() != stats.y_mean.size()) {
    throw ValidationError("dataset dimensions do not match standardization statistics");
  }
  Dataset out = data;
  out.X = ((data.X.rowwise() - stats.x_mean.transpose()).array().rowwise() /
           stats.x_scale.transpose().array())
              .matrix();
  out.Y = ((data.Y.rowwise() - stats.y_mean.transpose()).array().rowwise() /
           stats.y_scale.transpose().array())
              .matrix();
  return out;
}

Dataset invert_standardizer(const StandardizationStats& stats, const Dataset& data) {
  Dataset out = data;
  out.X = ((data.X.array().rowwise() * stats.x_scale.transpose().array()).matrix().rowwise() +
           stats.x_mean.transpose());
  out.Y = ((data.Y.array().rowwise() * stats.y_scale.transpose().array()).matrix().rowwise() +
           stats.y_mean.transpose());
  return out;
}

BasisSpec BasisSpec::with_sigma(double s) const {
  check_sigma(s);
  BasisSpec out = *this;
  out.sigma = s;
  return out;
}

BasisSpec select_centers(const Dataset& data, Index max_centers, std::uint64_t seed) {
  if (max_centers < 1) throw ValidationError("max_centers must be >= 1");
  const Index n = data.size();
  if (n == 0) throw ValidationError("cannot select centers from an empty dataset");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (max_centers < n) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(max_centers));
  }
  BasisSpec basis;
  basis.center_inputs = data.X(idx, Eigen::all);
  basis.center_outputs = data.Y(idx, Eigen::all);
  basis.sample_indices = std::move(idx);
  return basis;
}

Vector eval_phi(const Vector& z, const Vector& y, const BasisSpec& basis, const ProjectionMatrix& w) {
  check_query(z, basis, w);
  if (y.size() != basis.center_outputs.cols()) throw ValidationError("y dimension mismatch");
  const Matrix u = basis.projected_centers(w.matrix());
  const double denom = 2.0 * basis.sigma * basis.sigma;
  Vector phi(basis.count());
  for (Index k = 0; k < basis.count(); ++k) {
    const double d2 = (z - u.row(k).transpose()).squaredNorm() +
                      (y - basis.center_outputs.row(k).transpose()).squaredNorm();
    phi(k) = std::exp(-d2 / denom);
  }
  return phi;
}

Matrix eval_phibar(const Vector& z, const BasisSpec& basis, const ProjectionMatrix& w) {
  check_query(z, basis, w);
  const Matrix u = basis.projected_centers(w.matrix());
  const Matrix& v = basis.center_outputs;
  const double s2 = basis.sigma * basis.sigma;
  const double scale = std::pow(std::sqrt(std::numbers::pi) * basis.sigma,
                                static_cast<double>(v.cols()));
  const Index b = basis.count();
  Vector dz(b);
  for (Index k = 0; k < b; ++k) dz(k) = (z - u.row(k).transpose()).squaredNorm();
  Matrix out(b, b);
  for (Index k = 0; k < b; ++k) {
    for (Index kk = k; kk < b; ++kk) {
      const double dv = (v.row(k) - v.row(kk)).squaredNorm();
      const double e = std::exp(-(2.0 * dz(k) + 2.0 * dz(kk) + dv) / (4.0 * s2));
      out(k, kk) = scale * e;
      out(kk, k) = out(k, kk);
    }
  }
  return out;
}

double eval_normalizer(const Vector& z, const Vector& weights, const BasisSpec& basis,
                       const ProjectionMatrix& w) {
  check_query(z, basis, w);
  if (weights.size() != basis.count()) throw ValidationError("weight count mismatch");
  if ((weights.array() < 0.0).any()) throw ValidationError("normalizer weights must be >= 0");
  const Matrix u = basis.projected_centers(w.matrix());
  const double s2 = basis.sigma * basis.sigma;
  double sum = 0.0;
  for (Index k = 0; k < basis.count(); ++k) {
    if (weights(k) == 0.0) continue;
    sum += weights(k) * std::exp(-(z - u.row(k).transpose()).squaredNorm() / (2.0 * s2));
  }
  const double scale = std::pow(std::sqrt(2.0 * std::numbers::pi) * basis.sigma,
                                static_cast<double>(basis.center_outputs.cols()));
  return scale * sum;
}

}  // namespace sdrcde
