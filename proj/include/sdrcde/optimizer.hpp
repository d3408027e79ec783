#pragma once

#include <cstdint>
#include <vector>

#include "sdrcde/dataset.hpp"
#include "sdrcde/kernel_basis.hpp"
#include "sdrcde/lscde.hpp"
#include "sdrcde/model_selection.hpp"

namespace sdrcde {

struct OptimizerConfig {
  int restarts = 20;
  int cv_every = 5;  // accepted steps between (sigma, lambda) refreshes
  int max_iters = 100;
  double convergence_tol = 1e-6;  // on ||W'^T W' - W^T W||_F
  // Line search tries t = 2^e / ||natural gradient||_F for e in [min, max];
  // when nothing improves, the range is shifted down by one, up to
  // max_halvings times.
  int line_search_min_exp = -9;
  int line_search_max_exp = 3;
  int max_halvings = 10;
  std::uint64_t seed = 0;
  Index max_centers = kDefaultMaxCenters;
  int threads = 0;  // 0: SDRCDE_THREADS or hardware concurrency
  std::vector<std::uint64_t> restart_seeds;  // explicit init seeds; overrides `restarts`

  void validate() const;
};

struct RestartTrace {
  std::uint64_t init_seed = 0;
  // Score after initialization, after every accepted step and after every
  // (sigma, lambda) refresh. `refreshes` holds the positions in `sce` that
  // directly follow a refresh; the sequence is non-increasing in between.
  std::vector<double> sce;
  std::vector<std::size_t> refreshes;
  std::vector<ModelChoice> choices;
  int iterations = 0;
  bool converged = false;
  bool stalled_at_first_iteration = false;
  double initial_gradient_norm = 0.0;
  Matrix W;
  double final_sce = 0.0;
};

struct FitReport {
  std::vector<RestartTrace> restarts;
  std::size_t chosen = 0;
  double wall_seconds = 0.0;

  const RestartTrace& best() const { return restarts[chosen]; }
};

struct FitResult {
  CdeModel model;
  FitReport report;
};

/// Minimizes the SCE approximation over d_z-dimensional subspaces by
/// natural-gradient descent along geodesics, with random restarts and
/// periodic cross-validation of (sigma, lambda). `data_std` must already be
/// standardized with `stats`.
FitResult optimize_projection(const Dataset& data_std, const StandardizationStats& stats, Index dz,
                              const ModelGrid& grid, const OptimizerConfig& cfg);

/// LSCDE at a fixed projection: cross-validates (sigma, lambda) and solves.
/// The report holds a single zero-iteration trace.
FitResult fit_fixed_projection(const Dataset& data_std, const StandardizationStats& stats,
                               const ProjectionMatrix& w, const ModelGrid& grid,
                               const OptimizerConfig& cfg);

struct DimensionChoice {
  Index dz = 0;
  std::vector<Index> candidates;
  std::vector<double> cv_scores;
  std::vector<FitResult> fits;

  const FitResult& chosen() const;
};

/// Runs optimize_projection for each candidate with the same seed and keeps
/// the candidate whose final model has the lowest held-out CV score (ties go
/// to the smaller d_z).
DimensionChoice select_dimension(const Dataset& data_std, const StandardizationStats& stats,
                                 const std::vector<Index>& candidates, const ModelGrid& grid,
                                 const OptimizerConfig& cfg);

}  // namespace sdrcde
