#include "sdrcde/evaluation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "sdrcde/error.hpp"
#include "sdrcde/parallel.hpp"

namespace sdrcde {

namespace {

struct Pieces {
  double l2;
  double density;
};

/// x-independent mixture used when the conditional normalizer vanishes.
Pieces unconditional_fallback(const CdeModel& model, const Vector& y_std) {
  const Matrix& v = model.basis.center_outputs;
  const Index dy = v.cols();
  const double weight_sum = model.alpha_tilde.sum();
  if (!(weight_sum > 0.0)) {
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(dy));
    return {std::pow(4.0 * std::numbers::pi, -0.5 * static_cast<double>(dy)),
            norm * std::exp(-0.5 * y_std.squaredNorm())};
  }
  const double s2 = model.basis.sigma * model.basis.sigma;
  const Vector w = model.alpha_tilde / weight_sum;
  const double n1 = std::pow(2.0 * std::numbers::pi * s2, -0.5 * static_cast<double>(dy));
  const double n2 = std::pow(4.0 * std::numbers::pi * s2, -0.5 * static_cast<double>(dy));
  double l2 = 0.0;
  double density = 0.0;
  for (Index k = 0; k < v.rows(); ++k) {
    if (w(k) == 0.0) continue;
    density += w(k) * n1 * std::exp(-(y_std - v.row(k).transpose()).squaredNorm() / (2.0 * s2));
    for (Index kk = 0; kk < v.rows(); ++kk) {
      if (w(kk) == 0.0) continue;
      l2 += w(k) * w(kk) * n2 * std::exp(-(v.row(k) - v.row(kk)).squaredNorm() / (4.0 * s2));
    }
  }
  return {l2, density};
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::pair<std::string, std::string> split_scheme(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) throw ValidationError("scheme must look like 'lsce/lscde': " + s);
  return {s.substr(0, slash), s.substr(slash + 1)};
}

struct Cell {
  std::size_t dataset;
  std::uint64_t seed;
};

std::vector<BenchmarkRecord> failed_cell(const BenchmarkPlan& plan, const BenchmarkDataset& source,
                                         std::uint64_t seed, const std::string& why) {
  std::vector<BenchmarkRecord> out;
  for (const auto& scheme_name : plan.schemes) {
    const auto [scheme, estimator] = split_scheme(scheme_name);
    BenchmarkRecord rec;
    rec.dataset = source.name;
    rec.scheme = scheme;
    rec.estimator = estimator;
    rec.n = plan.n_train;
    rec.seed = seed;
    rec.failure = why;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<BenchmarkRecord> run_cell(const BenchmarkPlan& plan, const BenchmarkDataset& source,
                                      const Dataset* csv_data, std::uint64_t seed) {
  Dataset train;
  Dataset test;
  StandardizationStats stats;
  Dataset train_std;
  try {
    if (csv_data) {
      if (csv_data->size() < 3) throw DataError("dataset has fewer than 3 rows");
      auto parts = split(*csv_data, std::min(plan.n_train, csv_data->size() - 1), seed);
      train = std::move(parts.first);
      test = std::move(parts.second);
      if (test.size() > plan.n_test) {
        std::vector<Index> keep(static_cast<std::size_t>(plan.n_test));
        for (Index i = 0; i < plan.n_test; ++i) keep[static_cast<std::size_t>(i)] = i;
        test = test.subset(keep);
      }
    } else {
      train = generate_named(source.name, plan.n_train, seed);
      test = generate_named(source.name, plan.n_test, derive_seed(seed, 77));
    }
    stats = fit_standardizer(train);
    train_std = apply_standardizer(stats, train);
  } catch (const std::exception& e) {
    return failed_cell(plan, source, seed, e.what());
  }

  OptimizerConfig opt = plan.optimizer;
  opt.seed = seed;
  opt.threads = 1;

  std::optional<FitResult> lsce;
  std::optional<FitResult> none;
  std::vector<BenchmarkRecord> out;
  for (const auto& scheme_name : plan.schemes) {
    const auto [scheme, estimator] = split_scheme(scheme_name);
    BenchmarkRecord rec;
    rec.dataset = source.name;
    rec.scheme = scheme;
    rec.estimator = estimator;
    rec.n = train.size();
    rec.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      const FitResult* fit = nullptr;
      if (scheme == "lsce") {
        if (!lsce) {
          if (plan.dz > 0) {
            lsce = optimize_projection(train_std, stats, plan.dz, plan.grid, opt);
          } else {
            std::vector<Index> cands;
            for (Index d = 1; d <= std::min<Index>(train.dx(), 10); ++d) cands.push_back(d);
            lsce = select_dimension(train_std, stats, cands, plan.grid, opt).chosen();
          }
        }
        fit = &*lsce;
      } else if (scheme == "none") {
        if (!none) {
          none = fit_fixed_projection(train_std, stats, ProjectionMatrix::identity(train.dx()),
                                      plan.grid, opt);
        }
        fit = &*none;
      } else {
        throw ValidationError("unknown reduction scheme '" + scheme + "'");
      }
      const ProjectionMatrix& w = fit->model.W;
      rec.dz = w.rows();
      if (train.true_W) rec.error_dr = error_dr(w.matrix(), *train.true_W);
      if (estimator == "lscde") {
        rec.sigma = fit->model.basis.sigma;
        rec.lambda = fit->model.lambda;
        rec.error_cde = error_cde(fit->model, test).value;
      } else if (estimator == "ekde") {
        EkdeFitOptions eo;
        eo.folds = plan.grid.folds;
        eo.seed = derive_seed(seed, 303);
        const std::optional<ProjectionMatrix> wopt =
            scheme == "none" ? std::nullopt : std::optional<ProjectionMatrix>(w);
        const EkdeModel ek = fit_ekde(train_std, stats, wopt, eo);
        rec.sigma = ek.bandwidth;
        rec.lambda = ek.epsilon;
        rec.error_cde = error_cde(ek, test).value;
      } else {
        throw ValidationError("unknown estimator '" + estimator + "'");
      }
    } catch (const std::exception& e) {
      rec.failure = e.what();
    }
    if (plan.record_timing) {
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

double error_dr(const Matrix& w_hat, const Matrix& w_star) {
  if (w_hat.cols() != w_star.cols()) {
    throw ValidationError("error_dr needs equal d_x (" + std::to_string(w_hat.cols()) + " vs " +
                          std::to_string(w_star.cols()) + ")");
  }
  return (w_hat.transpose() * w_hat - w_star.transpose() * w_star).norm();
}

CdeError error_cde(const CdeModel& model, const Dataset& test) {
  if (test.size() == 0) throw ValidationError("test set is empty");
  const Dataset t = apply_standardizer(model.stats, test);
  CdeError out;
  double l2_sum = 0.0;
  double density_sum = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    const Vector x = t.X.row(i).transpose();
    const Vector y = t.Y.row(i).transpose();
    try {
      const double l2 = density_l2_std(model, x);
      const double p = conditional_density_std(model, x, y);
      l2_sum += l2;
      density_sum += p;
    } catch (const DegenerateDensityError&) {
      const Pieces f = unconditional_fallback(model, y);
      l2_sum += f.l2;
      density_sum += f.density;
      ++out.degenerate_points;
    }
  }
  const double n = static_cast<double>(t.size());
  out.points = t.size();
  out.value = l2_sum / (2.0 * n) - density_sum / n;
  return out;
}

CdeError error_cde(const EkdeModel& model, const Dataset& test) {
  if (test.size() == 0) throw ValidationError("test set is empty");
  const Dataset t = apply_standardizer(model.stats, test);
  const EkdeBatch b = ekde_batch(model, t.X, t.Y);
  CdeError out;
  out.points = t.size();
  out.value = 0.5 * b.l2.mean() - b.density.mean();
  return out;
}

MonotonicityReport sce_monotonicity_check(const Dataset& data_std, const Matrix& w_true, int trials,
                                          std::uint64_t seed, double tolerance,
                                          const ModelGrid& grid, Index max_centers) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  grid.validate(data_std.size());
  const ProjectionMatrix truth(w_true);
  const BasisSpec centers = select_centers(data_std, max_centers, derive_seed(seed, 101));
  const std::vector<int> folds = make_folds(data_std.size(), grid.folds, derive_seed(seed, 202));

  MonotonicityReport rep;
  rep.tolerance = tolerance;
  rep.choice = select_model(data_std, centers, truth, grid, folds);
  const BasisSpec basis = centers.with_sigma(rep.choice.sigma);
  const auto score = [&](const ProjectionMatrix& w) {
    const SystemMatrices sys = assemble_system(data_std, basis, w);
    return sce_score(sys, solve_alpha(sys, rep.choice.lambda));
  };
  rep.sce_true = score(truth);
  Index hits = 0;
  for (int t = 0; t < trials; ++t) {
    const ProjectionMatrix w = random_orthonormal(truth.rows(), truth.cols(),
                                                  derive_seed(seed, 5000 + static_cast<std::uint64_t>(t)));
    const double s = score(w);
    rep.sce_random.push_back(s);
    if (s >= rep.sce_true - tolerance) ++hits;
  }
  rep.fraction = static_cast<double>(hits) / static_cast<double>(trials);
  return rep;
}

void BenchmarkPlan::validate() const {
  if (datasets.empty()) throw ValidationError("benchmark plan lists no datasets");
  if (schemes.empty()) throw ValidationError("benchmark plan lists no schemes");
  if (seeds.empty()) throw ValidationError("benchmark plan lists no seeds");
  for (const auto& s : schemes) {
    const auto [scheme, est] = split_scheme(s);
    if ((scheme != "none" && scheme != "lsce") || (est != "lscde" && est != "ekde")) {
      throw ValidationError("unsupported scheme '" + s + "'");
    }
  }
  if (n_train < 2) throw ValidationError("n_train must be >= 2");
  if (n_test < 1) throw ValidationError("n_test must be >= 1");
  optimizer.validate();
}

BenchmarkResult run_benchmark(const BenchmarkPlan& plan) {
  plan.validate();
  std::vector<std::optional<Dataset>> loaded(plan.datasets.size());
  std::vector<std::string> load_errors(plan.datasets.size());
  for (std::size_t d = 0; d < plan.datasets.size(); ++d) {
    if (plan.datasets[d].path.empty()) continue;
    try {
      loaded[d] = load_csv(plan.datasets[d].path);
    } catch (const std::exception& e) {
      load_errors[d] = e.what();
    }
  }

  std::vector<Cell> cells;
  for (std::size_t d = 0; d < plan.datasets.size(); ++d) {
    for (std::uint64_t seed : plan.seeds) cells.push_back({d, seed});
  }
  std::vector<std::vector<BenchmarkRecord>> per_cell(cells.size());
  parallel_for(cells.size(), worker_count(plan.threads), [&](std::size_t c) {
    const auto& cell = cells[c];
    const auto& data = loaded[cell.dataset];
    if (!load_errors[cell.dataset].empty()) {
      per_cell[c] = failed_cell(plan, plan.datasets[cell.dataset], cell.seed,
                                load_errors[cell.dataset]);
      return;
    }
    per_cell[c] = run_cell(plan, plan.datasets[cell.dataset], data ? &*data : nullptr, cell.seed);
  });

  BenchmarkResult result;
  for (auto& recs : per_cell) {
    for (auto& r : recs) result.records.push_back(std::move(r));
  }
  result.rows = aggregate(result.records, plan.schemes, plan.scale);
  return result;
}

double paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("paired samples differ in size");
  const std::size_t m = a.size();
  if (m < 2) throw ValidationError("paired t-test needs at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) ss += std::pow(a[i] - b[i] - mean, 2);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  if (sd == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / (sd / std::sqrt(static_cast<double>(m)));
  const boost::math::students_t dist(static_cast<double>(m - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::vector<AggregateRow> aggregate(const std::vector<BenchmarkRecord>& records,
                                    const std::vector<std::string>& scheme_order, double scale) {
  std::vector<std::string> datasets;
  for (const auto& r : records) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& ds : datasets) {
    std::vector<std::map<std::uint64_t, double>> values;
    const std::size_t first = rows.size();
    for (const auto& s : scheme_order) {
      const auto [scheme, est] = split_scheme(s);
      std::map<std::uint64_t, double> by_seed;
      for (const auto& r : records) {
        if (r.dataset == ds && r.scheme == scheme && r.estimator == est && r.error_cde) {
          by_seed[r.seed] = *r.error_cde;
        }
      }
      AggregateRow row;
      row.dataset = ds;
      row.scheme = scheme;
      row.estimator = est;
      row.scale = scale;
      row.runs = static_cast<Index>(by_seed.size());
      if (!by_seed.empty()) {
        double sum = 0.0;
        for (const auto& [seed, v] : by_seed) sum += v;
        row.mean = sum / static_cast<double>(by_seed.size());
        if (by_seed.size() > 1) {
          double ss = 0.0;
          for (const auto& [seed, v] : by_seed) ss += std::pow(v - row.mean, 2);
          row.stderr_ = std::sqrt(ss / static_cast<double>(by_seed.size() - 1)) /
                        std::sqrt(static_cast<double>(by_seed.size()));
        }
      }
      rows.push_back(row);
      values.push_back(std::move(by_seed));
    }
    std::optional<std::size_t> best;
    for (std::size_t i = first; i < rows.size(); ++i) {
      if (rows[i].runs == 0) continue;
      if (!best || rows[i].mean < rows[*best].mean) best = i;
    }
    if (!best) continue;
    rows[*best].best = true;
    rows[*best].comparable = true;
    const auto& best_vals = values[*best - first];
    for (std::size_t i = first; i < rows.size(); ++i) {
      if (i == *best || rows[i].runs == 0) continue;
      std::vector<double> a;
      std::vector<double> b;
      for (const auto& [seed, v] : values[i - first]) {
        auto it = best_vals.find(seed);
        if (it == best_vals.end()) continue;
        a.push_back(v);
        b.push_back(it->second);
      }
      if (a.size() >= 2) rows[i].comparable = paired_t_test(a, b) >= 0.05;
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records) {
  out << "dataset,scheme,estimator,n,seed,d_z,sigma,lambda,error_dr,error_cde,wall_s\n";
  for (const auto& r : records) {
    out << r.dataset << ',' << r.scheme << ',' << r.estimator << ',' << r.n << ',' << r.seed << ','
        << r.dz << ',' << fmt(r.sigma) << ',' << fmt(r.lambda) << ',' << fmt_opt(r.error_dr) << ','
        << fmt_opt(r.error_cde) << ',' << fmt_opt(r.wall_seconds) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "dataset,scheme,estimator,runs,mean,stderr,best,comparable,scale\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.scheme << ',' << r.estimator << ',' << r.runs << ','
        << (r.runs > 0 ? fmt(r.mean * r.scale) : "") << ',' << (r.stderr_ ? fmt(*r.stderr_ * r.scale) : "") << ','
        << (r.best ? 1 : 0) << ',' << (r.comparable ? 1 : 0) << ',' << fmt(r.scale) << '\n';
  }
}

void write_aggregate_text(std::ostream& out, const std::vector<AggregateRow>& rows) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"dataset", "method", "runs", "error_cde", "scale"});
  for (const auto& r : rows) {
    std::ostringstream v;
    if (r.runs == 0) {
      v << "no successful runs";
    } else {
      v << std::fixed << std::setprecision(4) << r.mean * r.scale << " ("
      << (r.stderr_ ? [&] {
           std::ostringstream e;
           e << std::fixed << std::setprecision(4) << *r.stderr_ * r.scale;
           return e.str();
         }()
                    : std::string("n/a"))
        << ")" << (r.comparable ? " *" : "");
    }
    std::ostringstream sc;
    sc << "x " << r.scale;
    cells.push_back({r.dataset, r.scheme + "/" + r.estimator, std::to_string(r.runs), v.str(), sc.str()});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(width[c])) << row[c]
          << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  out << "* best mean, or not significantly different from it (paired t-test, 5%)\n";
}

}  // namespace sdrcde
