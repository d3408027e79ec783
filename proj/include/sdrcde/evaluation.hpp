#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdrcde/dataset.hpp"
#include "sdrcde/ekde.hpp"
#include "sdrcde/lscde.hpp"
#include "sdrcde/model_selection.hpp"
#include "sdrcde/optimizer.hpp"

namespace sdrcde {

/// ||W_hat^T W_hat - W_star^T W_star||_F. The ranks may differ; only d_x
/// has to match.
double error_dr(const Matrix& w_hat, const Matrix& w_star);

/// Held-out squared-loss score (1/2n') sum int p^2 dy - (1/n') sum p(y_i|x_i),
/// evaluated in the model's standardized space.
struct CdeError {
  double value = 0.0;
  Index points = 0;
  // Queries whose normalizer fell below the floor; they are scored with the
  // x-independent mixture sum_k alpha~_k N(y; v_k, sigma^2) instead.
  Index degenerate_points = 0;
};

CdeError error_cde(const CdeModel& model, const Dataset& test);
CdeError error_cde(const EkdeModel& model, const Dataset& test);

struct MonotonicityReport {
  double sce_true = 0.0;
  std::vector<double> sce_random;
  double tolerance = 0.0;
  double fraction = 0.0;  // share of random W with S(random) >= S(true) - tolerance
  ModelChoice choice;     // (sigma, lambda) cross-validated at the true W
};

/// Compares the SCE approximation at the true subspace with `trials` random
/// subspaces of the same dimension, all under the (sigma, lambda) chosen by
/// cross-validation at the true subspace.
MonotonicityReport sce_monotonicity_check(const Dataset& data_std, const Matrix& w_true, int trials,
                                          std::uint64_t seed, double tolerance = 0.01,
                                          const ModelGrid& grid = ModelGrid::defaults(),
                                          Index max_centers = kDefaultMaxCenters);

// ---------------------------------------------------------------------------
// Benchmark harness

struct BenchmarkDataset {
  std::string name;  // generator name, or a label for CSV input
  std::string path;  // CSV path; empty for generated data
};

struct BenchmarkPlan {
  std::vector<BenchmarkDataset> datasets;
  std::vector<std::string> schemes;  // "none/lscde", "lsce/lscde", "none/ekde", "lsce/ekde"
  std::vector<std::uint64_t> seeds;
  Index n_train = 400;
  Index n_test = 1000;
  Index dz = 1;  // <= 0 selects d_z by cross-validation
  ModelGrid grid = ModelGrid::defaults();
  OptimizerConfig optimizer;
  double scale = 1.0;
  bool record_timing = false;
  int threads = 0;

  void validate() const;
};

struct BenchmarkRecord {
  std::string dataset;
  std::string scheme;     // none | lsce
  std::string estimator;  // lscde | ekde
  Index n = 0;
  std::uint64_t seed = 0;
  Index dz = 0;
  // For ekde rows `sigma` is the output bandwidth h and `lambda` is epsilon.
  double sigma = 0.0;
  double lambda = 0.0;
  std::optional<double> error_dr;
  std::optional<double> error_cde;
  std::optional<double> wall_seconds;
  std::string failure;
};

struct AggregateRow {
  std::string dataset;
  std::string scheme;
  std::string estimator;
  Index runs = 0;
  double mean = 0.0;
  std::optional<double> stderr_;  // absent for a single run
  bool best = false;
  bool comparable = false;  // best, or not different from it (paired t-test, 5%)
  double scale = 1.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRecord> records;
  std::vector<AggregateRow> rows;
};

BenchmarkResult run_benchmark(const BenchmarkPlan& plan);

/// Two-sided paired t-test p-value; 1 when all differences are zero.
double paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Mean and standard error per (dataset, scheme, estimator) with best and
/// comparable methods marked per dataset.
std::vector<AggregateRow> aggregate(const std::vector<BenchmarkRecord>& records,
                                    const std::vector<std::string>& scheme_order, double scale);

void write_results_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_aggregate_text(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace sdrcde
