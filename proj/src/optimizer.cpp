#include "sdrcde/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "sdrcde/error.hpp"
#include "sdrcde/parallel.hpp"
#include "sdrcde/sce_gradient.hpp"

namespace sdrcde {

namespace {

constexpr double kZeroGradient = 1e-12;

struct Setup {
  const Dataset& data;
  const BasisSpec& centers;
  const ModelGrid& grid;
  const std::vector<int>& folds;
  const OptimizerConfig& cfg;
};

double score_at(const Setup& s, const Matrix& w, const ModelChoice& choice) {
  const KernelSystem ks(s.data.X, s.data.Y, s.centers.with_sigma(choice.sigma), w);
  const SystemMatrices sys = ks.assemble();
  return sce_score(sys, solve_alpha(sys, choice.lambda));
}

RestartTrace run_restart(const Setup& s, Index dz, std::uint64_t init_seed) {
  RestartTrace trace;
  trace.init_seed = init_seed;
  ProjectionMatrix w = random_orthonormal(dz, s.data.dx(), init_seed);

  ModelChoice choice = select_model(s.data, s.centers, w, s.grid, s.folds);
  trace.choices.push_back(choice);
  trace.refreshes.push_back(0);
  int accepted_since_refresh = 0;

  for (int iter = 1; iter <= s.cfg.max_iters; ++iter) {
    trace.iterations = iter;
    const KernelSystem ks(s.data.X, s.data.Y, s.centers.with_sigma(choice.sigma), w.matrix());
    const GradientWorkspace ws = evaluate_with_gradient(ks, choice.lambda);
    if (trace.sce.size() == trace.refreshes.back()) trace.sce.push_back(ws.score);
    const double current = ws.score;

    const Matrix w_perp = complete_basis(w);
    const Matrix nat = natural_gradient(ws.dSCE_dW, w, w_perp);
    const double gnorm = nat.norm();
    if (iter == 1) trace.initial_gradient_norm = gnorm;
    if (!(gnorm > kZeroGradient)) {
      trace.converged = true;
      break;
    }

    // Memoized by exponent so shifting the range only evaluates one new t.
    std::map<int, std::pair<double, Matrix>> tried;
    bool improved = false;
    int best_exp = 0;
    for (int shift = 0; shift <= s.cfg.max_halvings && !improved; ++shift) {
      double best = std::numeric_limits<double>::infinity();
      for (int e = s.cfg.line_search_min_exp - shift; e <= s.cfg.line_search_max_exp - shift; ++e) {
        auto it = tried.find(e);
        if (it == tried.end()) {
          const double t = std::ldexp(1.0, e) / gnorm;
          ProjectionMatrix wt = geodesic_point(w, w_perp, ws.dSCE_dW, t);
          double sc = std::numeric_limits<double>::infinity();
          try {
            sc = score_at(s, wt.matrix(), choice);
          } catch (const SolverError&) {
          }
          it = tried.emplace(e, std::make_pair(sc, wt.matrix())).first;
        }
        if (it->second.first < best) {
          best = it->second.first;
          best_exp = e;
        }
      }
      improved = best < current;
    }
    if (!improved) {
      if (iter == 1) trace.stalled_at_first_iteration = true;
      trace.converged = true;
      break;
    }

    const auto& [next_score, next_w] = tried.at(best_exp);
    ProjectionMatrix next(next_w);
    const double delta = (next.projector() - w.projector()).norm();
    w = std::move(next);
    trace.sce.push_back(next_score);
    ++accepted_since_refresh;

    if (accepted_since_refresh >= s.cfg.cv_every) {
      choice = select_model(s.data, s.centers, w, s.grid, s.folds);
      trace.choices.push_back(choice);
      trace.refreshes.push_back(trace.sce.size());
      accepted_since_refresh = 0;
    }
    if (delta < s.cfg.convergence_tol) {
      trace.converged = true;
      break;
    }
  }

  // Refit (sigma, lambda) at the final subspace unless that just happened.
  if (accepted_since_refresh > 0) {
    choice = select_model(s.data, s.centers, w, s.grid, s.folds);
    trace.choices.push_back(choice);
    trace.refreshes.push_back(trace.sce.size());
  }
  if (trace.sce.size() == trace.refreshes.back()) {
    trace.sce.push_back(score_at(s, w.matrix(), choice));
  }
  trace.final_sce = trace.sce.back();
  trace.W = w.matrix();
  return trace;
}

CdeModel build_model(const Setup& s, const Matrix& w, const ModelChoice& choice,
                     const StandardizationStats& stats) {
  BasisSpec basis = s.centers.with_sigma(choice.sigma);
  const KernelSystem ks(s.data.X, s.data.Y, basis, w);
  const SystemMatrices sys = ks.assemble();
  Vector alpha = solve_alpha(sys, choice.lambda);
  const double score = sce_score(sys, alpha);
  return make_cde_model(ProjectionMatrix(w), std::move(basis), choice.lambda, std::move(alpha),
                        stats, score);
}

}  // namespace

void OptimizerConfig::validate() const {
  if (restarts < 1 && restart_seeds.empty()) throw ValidationError("restarts must be >= 1");
  if (cv_every < 1) throw ValidationError("cv_every must be >= 1");
  if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (!(convergence_tol > 0.0)) throw ValidationError("convergence_tol must be > 0");
  if (line_search_min_exp > line_search_max_exp) {
    throw ValidationError("line search exponent range is empty");
  }
  if (max_halvings < 0) throw ValidationError("max_halvings must be >= 0");
  if (max_centers < 1) throw ValidationError("max_centers must be >= 1");
}

FitResult optimize_projection(const Dataset& data_std, const StandardizationStats& stats, Index dz,
                              const ModelGrid& grid, const OptimizerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  data_std.validate();
  cfg.validate();
  if (dz < 1 || dz > data_std.dx()) {
    throw ValidationError("d_z must satisfy 1 <= d_z <= d_x (d_z=" + std::to_string(dz) +
                          ", d_x=" + std::to_string(data_std.dx()) + ")");
  }
  grid.validate(data_std.size());

  const BasisSpec centers = select_centers(data_std, cfg.max_centers, derive_seed(cfg.seed, 101));
  const std::vector<int> folds = make_folds(data_std.size(), grid.folds, derive_seed(cfg.seed, 202));
  const Setup setup{data_std, centers, grid, folds, cfg};

  std::vector<std::uint64_t> seeds = cfg.restart_seeds;
  if (seeds.empty()) {
    for (int r = 0; r < cfg.restarts; ++r) {
      seeds.push_back(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(r)));
    }
  }

  FitReport report;
  report.restarts.resize(seeds.size());
  parallel_for(seeds.size(), worker_count(cfg.threads), [&](std::size_t r) {
    report.restarts[r] = run_restart(setup, dz, seeds[r]);
  });

  bool all_stalled = true;
  for (std::size_t r = 0; r < report.restarts.size(); ++r) {
    const auto& tr = report.restarts[r];
    if (!tr.stalled_at_first_iteration) all_stalled = false;
    if (tr.final_sce < report.restarts[report.chosen].final_sce) report.chosen = r;
  }
  if (all_stalled) {
    std::ostringstream msg;
    msg << "optimizer stalled: no line-search candidate improved the objective at the first "
           "iteration of any restart (initial natural-gradient norms:";
    for (const auto& tr : report.restarts) msg << ' ' << tr.initial_gradient_norm;
    msg << ")";
    throw OptimizerStalledError(msg.str());
  }

  const RestartTrace& best = report.best();
  CdeModel model = build_model(setup, best.W, best.choices.back(), stats);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

FitResult fit_fixed_projection(const Dataset& data_std, const StandardizationStats& stats,
                               const ProjectionMatrix& w, const ModelGrid& grid,
                               const OptimizerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  data_std.validate();
  cfg.validate();
  grid.validate(data_std.size());
  if (w.cols() != data_std.dx()) throw ValidationError("W columns do not match d_x");

  const BasisSpec centers = select_centers(data_std, cfg.max_centers, derive_seed(cfg.seed, 101));
  const std::vector<int> folds = make_folds(data_std.size(), grid.folds, derive_seed(cfg.seed, 202));
  const Setup setup{data_std, centers, grid, folds, cfg};

  RestartTrace trace;
  trace.choices.push_back(select_model(data_std, centers, w, grid, folds));
  trace.refreshes.push_back(0);
  trace.W = w.matrix();
  trace.converged = true;
  CdeModel model = build_model(setup, w.matrix(), trace.choices.back(), stats);
  trace.sce.push_back(model.sce_score);
  trace.final_sce = model.sce_score;

  FitReport report;
  report.restarts.push_back(std::move(trace));
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

const FitResult& DimensionChoice::chosen() const {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] == dz) return fits[i];
  }
  throw ValidationError("dimension choice is empty");
}

DimensionChoice select_dimension(const Dataset& data_std, const StandardizationStats& stats,
                                 const std::vector<Index>& candidates, const ModelGrid& grid,
                                 const OptimizerConfig& cfg) {
  if (candidates.empty()) throw ValidationError("no candidate dimensions given");
  for (Index dz : candidates) {
    if (dz < 1 || dz > data_std.dx()) {
      throw ValidationError("candidate d_z=" + std::to_string(dz) + " outside [1, d_x]");
    }
  }
  DimensionChoice out;
  double best = std::numeric_limits<double>::infinity();
  for (Index dz : candidates) {
    FitResult fit = optimize_projection(data_std, stats, dz, grid, cfg);
    const double score = fit.report.best().choices.back().score;
    out.candidates.push_back(dz);
    out.cv_scores.push_back(score);
    if (score < best || (score == best && dz < out.dz)) {
      best = score;
      out.dz = dz;
    }
    out.fits.push_back(std::move(fit));
  }
  return out;
}

}  // namespace sdrcde
