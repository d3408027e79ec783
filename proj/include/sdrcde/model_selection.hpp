#pragma once

#include <cstdint>
#include <vector>

#include "sdrcde/dataset.hpp"
#include "sdrcde/kernel_basis.hpp"
#include "sdrcde/manifold.hpp"

namespace sdrcde {

/// Candidate bandwidths and regularizers for K-fold cross-validation.
struct ModelGrid {
  std::vector<double> sigmas;
  std::vector<double> lambdas;
  int folds = 5;

  /// Nine log-spaced sigmas on [0.1, 10], lambdas {1e-3, ..., 10}, K = 5.
  static ModelGrid defaults();

  /// Throws ValidationError unless both grids are non-empty, entries are
  /// valid, and 2 <= K <= n.
  void validate(Index n) const;
};

/// Fold id in [0, K) per sample: a seeded permutation dealt round-robin, so
/// fold sizes differ by at most one.
std::vector<int> make_folds(Index n, int k, std::uint64_t seed);

/// Mean over folds of 0.5 a^T G_test a - h_test^T a, with a fitted on the
/// complement of each fold. Centers are fixed by `basis`; its sigma is
/// replaced by `sigma`.
double cv_score(const Dataset& data_std, const BasisSpec& basis, const ProjectionMatrix& w,
                double sigma, double lambda, const std::vector<int>& folds);

struct ModelChoice {
  double sigma = 0.0;
  double lambda = 0.0;
  double score = 0.0;
};

/// Exhaustive grid search. Ties go to the larger sigma, then the larger
/// lambda. Candidates whose solve fails are skipped; if all fail a
/// SolverError is thrown.
ModelChoice select_model(const Dataset& data_std, const BasisSpec& basis, const ProjectionMatrix& w,
                         const ModelGrid& grid, const std::vector<int>& folds);

}  // namespace sdrcde
