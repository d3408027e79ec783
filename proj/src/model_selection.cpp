#include "sdrcde/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "sdrcde/error.hpp"
#include "sdrcde/lscde.hpp"

namespace sdrcde {

namespace {

struct FoldRows {
  std::vector<Index> train;
  std::vector<Index> test;
};

std::vector<FoldRows> fold_rows(const std::vector<int>& folds, Index n) {
  if (static_cast<Index>(folds.size()) != n) {
    throw ValidationError("fold assignment length does not match sample count");
  }
  int k = 0;
  for (int f : folds) {
    if (f < 0) throw ValidationError("negative fold id");
    k = std::max(k, f + 1);
  }
  std::vector<FoldRows> out(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      auto& rows = out[static_cast<std::size_t>(j)];
      (folds[static_cast<std::size_t>(i)] == j ? rows.test : rows.train).push_back(i);
    }
  }
  for (int j = 0; j < k; ++j) {
    const auto& rows = out[static_cast<std::size_t>(j)];
    if (rows.test.empty() || rows.train.empty()) {
      throw ValidationError("fold " + std::to_string(j) + " leaves an empty train or test set");
    }
  }
  return out;
}

double cv_with_system(const std::vector<FoldRows>& rows,
                      const std::vector<SystemMatrices>& train,
                      const std::vector<SystemMatrices>& test, double lambda) {
  double total = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const Vector alpha = solve_alpha(train[j], lambda);
    total += sce_score(test[j], alpha);
  }
  return total / static_cast<double>(rows.size());
}

}  // namespace

ModelGrid ModelGrid::defaults() {
  ModelGrid g;
  for (int i = 0; i < 9; ++i) g.sigmas.push_back(std::pow(10.0, -1.0 + 0.25 * i));
  g.lambdas = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  g.folds = 5;
  return g;
}

void ModelGrid::validate(Index n) const {
  if (sigmas.empty() || lambdas.empty()) throw ValidationError("model grid is empty");
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("sigma candidates must be > 0");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("lambda candidates must be >= 0");
  }
  if (folds < 2 || folds > n) {
    throw ValidationError("fold count must satisfy 2 <= K <= n (K=" + std::to_string(folds) +
                          ", n=" + std::to_string(n) + ")");
  }
}

std::vector<int> make_folds(Index n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw ValidationError("fold count must satisfy 2 <= K <= n");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> folds(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    folds[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return folds;
}

double cv_score(const Dataset& data_std, const BasisSpec& basis, const ProjectionMatrix& w,
                double sigma, double lambda, const std::vector<int>& folds) {
  const auto rows = fold_rows(folds, data_std.size());
  const KernelSystem ks(data_std.X, data_std.Y, basis.with_sigma(sigma), w.matrix());
  std::vector<SystemMatrices> train;
  std::vector<SystemMatrices> test;
  for (const auto& r : rows) {
    train.push_back(ks.assemble(r.train));
    test.push_back(ks.assemble(r.test));
  }
  return cv_with_system(rows, train, test, lambda);
}

ModelChoice select_model(const Dataset& data_std, const BasisSpec& basis, const ProjectionMatrix& w,
                         const ModelGrid& grid, const std::vector<int>& folds) {
  if (grid.sigmas.empty() || grid.lambdas.empty()) throw ValidationError("model grid is empty");
  const auto rows = fold_rows(folds, data_std.size());

  ModelChoice best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  bool found = false;
  const auto better = [&](double sigma, double lambda, double score) {
    if (!found || score < best.score) return true;
    if (score > best.score) return false;
    if (sigma != best.sigma) return sigma > best.sigma;
    return lambda > best.lambda;
  };

  for (double sigma : grid.sigmas) {
    const KernelSystem ks(data_std.X, data_std.Y, basis.with_sigma(sigma), w.matrix());
    std::vector<SystemMatrices> train;
    std::vector<SystemMatrices> test;
    for (const auto& r : rows) {
      train.push_back(ks.assemble(r.train));
      test.push_back(ks.assemble(r.test));
    }
    for (double lambda : grid.lambdas) {
      double score = 0.0;
      try {
        score = cv_with_system(rows, train, test, lambda);
      } catch (const SolverError&) {
        continue;
      }
      if (!std::isfinite(score)) continue;
      if (better(sigma, lambda, score)) {
        best = {sigma, lambda, score};
        found = true;
      }
    }
  }
  if (!found) throw SolverError("every (sigma, lambda) candidate failed to solve");
  return best;
}

}  // namespace sdrcde
