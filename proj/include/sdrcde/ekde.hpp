#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdrcde/dataset.hpp"
#include "sdrcde/kernel_basis.hpp"
#include "sdrcde/manifold.hpp"

namespace sdrcde {

/// epsilon-neighbor KDE: a Gaussian KDE over y built from the training
/// samples whose conditioning coordinates (W x, or x without a projection)
/// lie within epsilon of the query. An empty neighborhood falls back to the
/// single nearest sample.
struct EkdeModel {
  Matrix cond;  // n x d conditioning coordinates of the training samples
  Matrix Y;     // n x d_y standardized outputs
  double epsilon = 0.0;
  double bandwidth = 1.0;
  std::optional<Matrix> W;
  StandardizationStats stats;

  Vector condition(const Vector& x_std) const;
};

EkdeModel make_ekde(const Dataset& data_std, const StandardizationStats& stats,
                    const std::optional<ProjectionMatrix>& w, double epsilon, double bandwidth);

/// Indices of the samples in the neighborhood of a standardized input.
std::vector<Index> ekde_neighbors(const EkdeModel& model, const Vector& x_std);

double ekde_density_std(const EkdeModel& model, const Vector& x_std, const Vector& y_std);

/// Raw inputs, density with respect to raw y.
double ekde_density(const EkdeModel& model, const Vector& x, const Vector& y);

/// Integral over standardized y of p(y|x)^2 (closed form of a Gaussian
/// mixture L2 norm).
double ekde_density_l2_std(const EkdeModel& model, const Vector& x_std);

/// Per-query squared norms and densities for many standardized queries.
struct EkdeBatch {
  Vector l2;
  Vector density;
};
EkdeBatch ekde_batch(const EkdeModel& model, const Matrix& x_std, const Matrix& y_std);

/// Quantiles {5, 10, 25, 50, 100}% of pairwise distances between rows.
std::vector<double> default_epsilon_grid(const Matrix& cond);

/// Same candidates as the LSCDE width grid, so both estimators search the
/// same Gaussian scales (standardized y units).
std::vector<double> default_bandwidth_grid();

struct EkdeFitOptions {
  std::vector<double> epsilons;    // empty: default_epsilon_grid
  std::vector<double> bandwidths;  // empty: default_bandwidth_grid
  int folds = 5;
  std::uint64_t seed = 0;
};

/// Picks (epsilon, h) minimizing the held-out squared-loss score
/// mean(0.5 int p^2 dy - p(y_i|x_i)) over K folds; ties go to the larger
/// epsilon, then the larger h.
EkdeModel fit_ekde(const Dataset& data_std, const StandardizationStats& stats,
                   const std::optional<ProjectionMatrix>& w, const EkdeFitOptions& opts);

/// Held-out score for one (epsilon, h) pair.
double ekde_cv_score(const Dataset& data_std, const std::optional<ProjectionMatrix>& w,
                     double epsilon, double bandwidth, const std::vector<int>& folds);

}  // namespace sdrcde
