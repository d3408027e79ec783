#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "sdrcde/dataset.hpp"
#include "sdrcde/error.hpp"
#include "sdrcde/evaluation.hpp"

using namespace sdrcde;

namespace {

/// p(y|x) = N(y; 0, 1) for every x (single kernel at the origin, sigma = 1).
CdeModel standard_normal_model() {
  BasisSpec b;
  b.center_inputs = Matrix::Zero(1, 1);
  b.center_outputs = Matrix::Zero(1, 1);
  b.sigma = 1.0;
  b.sample_indices = {0};
  return make_cde_model(ProjectionMatrix::identity(1), b, 0.0, Vector::Ones(1),
                        StandardizationStats::identity(1, 1), 0.0);
}

}  // namespace

TEST(ErrorDr, BasicCases) {
  const Matrix w = random_orthonormal(2, 5, 1).matrix();
  EXPECT_LT(error_dr(w, w), 1e-15);
  const Matrix r = random_orthonormal(2, 2, 2).matrix();
  EXPECT_LT(error_dr(r * w, w), 1e-14);
  Matrix a(1, 2), b(1, 2);
  a << 0, 1;
  b << 1, 0;
  EXPECT_NEAR(error_dr(a, b), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(error_dr(a, Matrix::Identity(1, 3)), ValidationError);
}

TEST(ErrorDr, SymmetricRotationInvariantAndBounded) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Index dz = 1 + static_cast<Index>(s % 3);
    const Matrix a = random_orthonormal(dz, 6, 10 + s).matrix();
    const Matrix b = random_orthonormal(dz, 6, 100 + s).matrix();
    const Matrix r = random_orthonormal(dz, dz, 1000 + s).matrix();
    EXPECT_NEAR(error_dr(a, b), error_dr(b, a), 1e-15);
    EXPECT_NEAR(error_dr(r * a, b), error_dr(a, b), 1e-13);
    EXPECT_LE(error_dr(a, b), std::sqrt(2.0 * static_cast<double>(dz)) + 1e-12);
  }
  // Unequal ranks are allowed.
  EXPECT_NEAR(error_dr(Matrix::Identity(2, 4), Matrix::Identity(1, 4)), 1.0, 1e-15);
}

TEST(ErrorCde, TrueGaussianPopulationValue) {
  const CdeModel m = standard_normal_model();
  std::mt19937_64 rng(3);
  Dataset test;
  test.X = oracle::gaussian_matrix(100000, 1, rng);
  test.Y = oracle::gaussian_matrix(100000, 1, rng);
  const CdeError e = error_cde(m, test);
  // Per-point terms 0.5 int p^2 - p(y_i), for the standard error.
  const double l2 = 1.0 / (2.0 * std::sqrt(std::numbers::pi));
  Vector terms(100000);
  for (Index i = 0; i < 100000; ++i) {
    terms(i) = 0.5 * l2 - std::exp(-0.5 * oracle::sq(test.Y(i, 0))) / std::sqrt(2 * std::numbers::pi);
  }
  const double se = std::sqrt((terms.array() - terms.mean()).square().sum() / 99999.0 / 100000.0);
  EXPECT_NEAR(e.value, terms.mean(), 1e-12);
  EXPECT_LT(std::abs(e.value + 1.0 / (4.0 * std::sqrt(std::numbers::pi))), 3 * se);
  EXPECT_EQ(e.degenerate_points, 0);
}

TEST(ErrorCde, PureAndAveragingInvariant) {
  const Dataset train = gen_artificial_b(120, 4);
  const StandardizationStats st = fit_standardizer(train);
  const Dataset d = apply_standardizer(st, train);
  const BasisSpec basis = select_centers(d, 50, 4).with_sigma(0.3);
  const ProjectionMatrix w = random_orthonormal(1, 5, 4);
  const SystemMatrices sys = assemble_system(d, basis, w);
  const CdeModel m = make_cde_model(w, basis, 0.01, solve_alpha(sys, 0.01), st, 0.0);
  const Dataset test = gen_artificial_b(200, 5);
  Dataset twice = test;
  twice.X = test.X.replicate(2, 1);
  twice.Y = test.Y.replicate(2, 1);
  EXPECT_EQ(error_cde(m, test).value, error_cde(m, test).value);
  EXPECT_NEAR(error_cde(m, twice).value, error_cde(m, test).value, 1e-12);
}

TEST(ErrorCde, TrueDensityScoresNoWorseThanFit) {
  const Dataset train = gen_artificial_b(200, 6);
  const Dataset test = gen_artificial_b(1000, 7);
  const StandardizationStats st = fit_standardizer(train);
  const Dataset d = apply_standardizer(st, train);
  OptimizerConfig cfg;
  cfg.restarts = 2;
  cfg.seed = 6;
  const FitResult fit = optimize_projection(d, st, 1, ModelGrid::defaults(), cfg);

  // True p(y|x) = N(y; x2 + x2^2 + x2^3, 0.25^2), expressed over standardized y.
  const double s = st.y_scale(0), mu0 = st.y_mean(0), sd = kArtificialNoiseSd / s;
  const Dataset t = apply_standardizer(st, test);
  Vector diff(1000);
  for (Index i = 0; i < 1000; ++i) {
    const double x = test.X(i, 1);
    const double mean = (x + x * x + x * x * x - mu0) / s;
    const double p_true = std::exp(-0.5 * oracle::sq((t.Y(i, 0) - mean) / sd)) /
                          (std::sqrt(2 * std::numbers::pi) * sd);
    const double true_term = 0.5 / (2.0 * std::sqrt(std::numbers::pi) * sd) - p_true;
    // Single-point score, so degenerate queries get the same fallback as error_cde.
    const double fit_term = error_cde(fit.model, test.subset({i})).value;
    diff(i) = fit_term - true_term;
  }
  const double se = std::sqrt((diff.array() - diff.mean()).square().sum() / 999.0 / 1000.0);
  EXPECT_GE(diff.mean(), -3 * se);
}

TEST(Monotonicity, FullDimensionAndRepresentativeInvariance) {
  const Dataset raw = gen_artificial_b(120, 8);
  const Dataset d = apply_standardizer(fit_standardizer(raw), raw);
  const ModelGrid grid{{0.3, 1.0}, {1e-2}, 5};
  const MonotonicityReport full = sce_monotonicity_check(d, Matrix::Identity(5, 5), 5, 8, 0.01, grid, 40);
  EXPECT_EQ(full.fraction, 1.0);
  for (double v : full.sce_random) EXPECT_NEAR(v, full.sce_true, 1e-10);

  // Same subspace, different representative: identical score.
  Matrix flipped = -*raw.true_W;
  const MonotonicityReport a = sce_monotonicity_check(d, *raw.true_W, 3, 8, 0.01, grid, 40);
  const MonotonicityReport b = sce_monotonicity_check(d, flipped, 3, 8, 0.01, grid, 40);
  EXPECT_NEAR(a.sce_true, b.sce_true, 1e-12);
}

TEST(Monotonicity, DatasetBFavorsTrueSubspace) {
  const Dataset raw = gen_artificial_b(400, 9);
  const Dataset d = apply_standardizer(fit_standardizer(raw), raw);
  const MonotonicityReport r = sce_monotonicity_check(d, *raw.true_W, 50, 9);
  EXPECT_GE(r.fraction, 0.9);
}

TEST(PairedTTest, KnownValueAndDegenerateCases) {
  // Differences {1, 2, 3, 4, 5.5}: t = 3.969, df = 4, two-sided p = 0.0165505.
  EXPECT_NEAR(paired_t_test({1, 2, 3, 4, 5.5}, {0, 0, 0, 0, 0}), 0.016550539701028162, 1e-9);
  EXPECT_EQ(paired_t_test({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_THROW(paired_t_test({1}, {2}), ValidationError);
  EXPECT_THROW(paired_t_test({1, 2}, {2}), ValidationError);
}

TEST(Aggregate, SingleAndIdenticalRuns) {
  BenchmarkRecord r;
  r.dataset = "d";
  r.scheme = "lsce";
  r.estimator = "lscde";
  r.seed = 1;
  r.error_cde = -1.5;
  auto rows = aggregate({r}, {"lsce/lscde"}, 1.0);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].mean, -1.5);
  EXPECT_FALSE(rows[0].stderr_.has_value());
  std::ostringstream text;
  write_aggregate_text(text, rows);
  EXPECT_NE(text.str().find("n/a"), std::string::npos);

  BenchmarkRecord r2 = r;
  r2.seed = 2;
  rows = aggregate({r, r2}, {"lsce/lscde"}, 1.0);
  ASSERT_TRUE(rows[0].stderr_.has_value());
  EXPECT_EQ(*rows[0].stderr_, 0.0);
}

TEST(Aggregate, MarksBestAndComparable) {
  std::vector<BenchmarkRecord> recs;
  for (std::uint64_t s = 0; s < 8; ++s) {
    for (const char* scheme : {"lsce", "none"}) {
      BenchmarkRecord r;
      r.dataset = "d";
      r.scheme = scheme;
      r.estimator = "lscde";
      r.seed = s;
      r.error_cde = (std::string(scheme) == "lsce" ? -2.0 : -1.0) + 0.01 * static_cast<double>(s % 3);
      recs.push_back(r);
    }
  }
  const auto rows = aggregate(recs, {"lsce/lscde", "none/lscde"}, 1.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].best);
  EXPECT_TRUE(rows[0].comparable);
  EXPECT_FALSE(rows[1].best);
  EXPECT_FALSE(rows[1].comparable);
}

TEST(RunBenchmark, RecordsDeterminismAndFailures) {
  BenchmarkPlan plan;
  plan.datasets = {{"artificial-b", ""}, {"broken", "/nonexistent/data.csv"}};
  plan.schemes = {"none/lscde", "lsce/lscde", "lsce/ekde"};
  plan.seeds = {1, 2};
  plan.n_train = 60;
  plan.n_test = 100;
  plan.grid = ModelGrid{{0.3, 1.0}, {1e-2, 1e-1}, 5};
  plan.optimizer.restarts = 1;
  plan.optimizer.max_iters = 5;
  plan.optimizer.max_centers = 30;
  const BenchmarkResult a = run_benchmark(plan);
  const BenchmarkResult b = run_benchmark(plan);
  ASSERT_EQ(a.records.size(), 12u);
  std::ostringstream ca, cb;
  write_results_csv(ca, a.records);
  write_results_csv(cb, b.records);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str().substr(0, ca.str().find('\n')),
            "dataset,scheme,estimator,n,seed,d_z,sigma,lambda,error_dr,error_cde,wall_s");
  int failed = 0;
  for (const auto& r : a.records) {
    if (r.dataset == "broken") {
      EXPECT_FALSE(r.failure.empty());
      ++failed;
    } else {
      EXPECT_TRUE(r.failure.empty()) << r.failure;
      EXPECT_TRUE(r.error_cde.has_value());
      EXPECT_TRUE(r.error_dr.has_value());
      EXPECT_FALSE(r.wall_seconds.has_value());
    }
  }
  EXPECT_EQ(failed, 6);
  ASSERT_EQ(a.rows.size(), 6u);
  for (const auto& row : a.rows) EXPECT_EQ(row.runs, row.dataset == "broken" ? 0 : 2);
}
