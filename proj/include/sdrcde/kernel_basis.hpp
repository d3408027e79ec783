#pragma once

#include <cstdint>
#include <vector>

#include "sdrcde/dataset.hpp"
#include "sdrcde/manifold.hpp"
#include "sdrcde/types.hpp"

namespace sdrcde {

/// Per-coordinate location and scale for inputs and outputs. Scales are the
/// (1/n) standard deviations; constant coordinates get scale 1 and a flag.
struct StandardizationStats {
  Vector x_mean;
  Vector x_scale;
  Vector y_mean;
  Vector y_scale;
  std::vector<bool> x_degenerate;
  std::vector<bool> y_degenerate;

  bool has_degenerate() const;

  Vector standardize_x(const Vector& x) const;
  Vector standardize_y(const Vector& y) const;

  /// Product of 1/y_scale: converts a density over standardized y into one
  /// over raw y.
  double y_jacobian() const;

  /// Identity transform for data that is already standardized.
  static StandardizationStats identity(Index dx, Index dy);
};

StandardizationStats fit_standardizer(const Dataset& data);
Dataset apply_standardizer(const StandardizationStats& stats, const Dataset& data);
Dataset invert_standardizer(const StandardizationStats& stats, const Dataset& data);

/// Gaussian centers. Inputs are stored in the full (standardized) x space;
/// projected centers u_k = W x~_k are recomputed from them for every W.
struct BasisSpec {
  Matrix center_inputs;   // b x d_x
  Matrix center_outputs;  // b x d_y
  double sigma = 1.0;
  std::vector<Index> sample_indices;

  Index count() const { return center_inputs.rows(); }

  BasisSpec with_sigma(double s) const;
  Matrix projected_centers(const Matrix& w) const { return center_inputs * w.transpose(); }
};

inline constexpr Index kDefaultMaxCenters = 100;

/// min(n, max_centers) distinct samples drawn without replacement.
BasisSpec select_centers(const Dataset& data, Index max_centers, std::uint64_t seed);

/// phi_k(z, y) = exp(-(|z - u_k|^2 + |y - v_k|^2) / (2 sigma^2)).
Vector eval_phi(const Vector& z, const Vector& y, const BasisSpec& basis, const ProjectionMatrix& w);

/// Analytic integral over y of phi(z, y) phi(z, y)^T.
Matrix eval_phibar(const Vector& z, const BasisSpec& basis, const ProjectionMatrix& w);

/// Analytic integral over y of weights^T phi(z, y); weights must be >= 0.
double eval_normalizer(const Vector& z, const Vector& weights, const BasisSpec& basis,
                       const ProjectionMatrix& w);

}  // namespace sdrcde
