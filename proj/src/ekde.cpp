#include "sdrcde/ekde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sdrcde/error.hpp"
#include "sdrcde/model_selection.hpp"

namespace sdrcde {

namespace {

Matrix conditioning(const Matrix& x, const std::optional<Matrix>& w) {
  return w ? Matrix(x * w->transpose()) : x;
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  Matrix d(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  }
  return d;
}

/// Row-normalized neighborhood weights: 1/|N| on neighbors, 0 elsewhere.
Matrix neighborhood_weights(const Matrix& cond_dist2, double epsilon) {
  Matrix p = Matrix::Zero(cond_dist2.rows(), cond_dist2.cols());
  for (Index i = 0; i < cond_dist2.rows(); ++i) {
    Index count = 0;
    for (Index j = 0; j < cond_dist2.cols(); ++j) {
      if (std::sqrt(cond_dist2(i, j)) <= epsilon) {
        p(i, j) = 1.0;
        ++count;
      }
    }
    if (count == 0) {
      Index nearest = 0;
      cond_dist2.row(i).minCoeff(&nearest);
      p(i, nearest) = 1.0;
      count = 1;
    }
    p.row(i) /= static_cast<double>(count);
  }
  return p;
}

double gauss_norm(double h, Index dy, double var_mult) {
  return std::pow(2.0 * std::numbers::pi * var_mult * h * h, -0.5 * static_cast<double>(dy));
}

/// Squared-loss score pieces from neighborhood weights and y distances.
EkdeBatch batch_from(const Matrix& weights, const Matrix& train_pair_d2, const Matrix& cross_d2,
                     double h, Index dy) {
  const Matrix pair_kernel =
      gauss_norm(h, dy, 2.0) * (-train_pair_d2.array() / (4.0 * h * h)).exp().matrix();
  const Matrix cross_kernel =
      gauss_norm(h, dy, 1.0) * (-cross_d2.array() / (2.0 * h * h)).exp().matrix();
  EkdeBatch out;
  out.l2 = (weights * pair_kernel).cwiseProduct(weights).rowwise().sum();
  out.density = weights.cwiseProduct(cross_kernel).rowwise().sum();
  return out;
}

void check_params(double epsilon, double bandwidth) {
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be >= 0");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError("bandwidth must be positive and finite");
  }
}

}  // namespace

Vector EkdeModel::condition(const Vector& x_std) const {
  return W ? Vector(*W * x_std) : x_std;
}

EkdeModel make_ekde(const Dataset& data_std, const StandardizationStats& stats,
                    const std::optional<ProjectionMatrix>& w, double epsilon, double bandwidth) {
  check_params(epsilon, bandwidth);
  data_std.validate();
  if (data_std.size() == 0) throw ValidationError("epsilon-KDE needs training samples");
  EkdeModel m;
  if (w) m.W = w->matrix();
  m.cond = conditioning(data_std.X, m.W);
  m.Y = data_std.Y;
  m.epsilon = epsilon;
  m.bandwidth = bandwidth;
  m.stats = stats;
  return m;
}

std::vector<Index> ekde_neighbors(const EkdeModel& model, const Vector& x_std) {
  const Vector c = model.condition(x_std);
  std::vector<Index> out;
  Index nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < model.cond.rows(); ++i) {
    const double d = (model.cond.row(i).transpose() - c).norm();
    if (d <= model.epsilon) out.push_back(i);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  if (out.empty()) out.push_back(nearest);
  return out;
}

double ekde_density_std(const EkdeModel& model, const Vector& x_std, const Vector& y_std) {
  const auto nbrs = ekde_neighbors(model, x_std);
  const double h = model.bandwidth;
  double sum = 0.0;
  for (Index i : nbrs) {
    sum += std::exp(-(model.Y.row(i).transpose() - y_std).squaredNorm() / (2.0 * h * h));
  }
  return gauss_norm(h, model.Y.cols(), 1.0) * sum / static_cast<double>(nbrs.size());
}

double ekde_density(const EkdeModel& model, const Vector& x, const Vector& y) {
  return ekde_density_std(model, model.stats.standardize_x(x), model.stats.standardize_y(y)) *
         model.stats.y_jacobian();
}

double ekde_density_l2_std(const EkdeModel& model, const Vector& x_std) {
  const auto nbrs = ekde_neighbors(model, x_std);
  const double h = model.bandwidth;
  double sum = 0.0;
  for (Index i : nbrs) {
    for (Index j : nbrs) {
      sum += std::exp(-(model.Y.row(i) - model.Y.row(j)).squaredNorm() / (4.0 * h * h));
    }
  }
  const double m = static_cast<double>(nbrs.size());
  return gauss_norm(h, model.Y.cols(), 2.0) * sum / (m * m);
}

EkdeBatch ekde_batch(const EkdeModel& model, const Matrix& x_std, const Matrix& y_std) {
  const Matrix q = conditioning(x_std, model.W);
  const Matrix weights = neighborhood_weights(squared_distances(q, model.cond), model.epsilon);
  return batch_from(weights, squared_distances(model.Y, model.Y), squared_distances(y_std, model.Y),
                    model.bandwidth, model.Y.cols());
}

std::vector<double> default_epsilon_grid(const Matrix& cond) {
  std::vector<double> d;
  for (Index i = 0; i < cond.rows(); ++i) {
    for (Index j = i + 1; j < cond.rows(); ++j) d.push_back((cond.row(i) - cond.row(j)).norm());
  }
  if (d.empty()) return {0.0};
  std::sort(d.begin(), d.end());
  std::vector<double> grid;
  for (double q : {0.05, 0.10, 0.25, 0.50, 1.0}) {
    const auto pos = static_cast<std::size_t>(std::ceil(q * static_cast<double>(d.size()))) - 1;
    grid.push_back(d[std::min(pos, d.size() - 1)]);
  }
  return grid;
}

std::vector<double> default_bandwidth_grid() { return ModelGrid::defaults().sigmas; }

double ekde_cv_score(const Dataset& data_std, const std::optional<ProjectionMatrix>& w,
                     double epsilon, double bandwidth, const std::vector<int>& folds) {
  check_params(epsilon, bandwidth);
  const std::optional<Matrix> wm = w ? std::optional<Matrix>(w->matrix()) : std::nullopt;
  const Matrix cond = conditioning(data_std.X, wm);
  const int k = *std::max_element(folds.begin(), folds.end()) + 1;
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    std::vector<Index> train;
    std::vector<Index> test;
    for (Index i = 0; i < data_std.size(); ++i) {
      (folds[static_cast<std::size_t>(i)] == j ? test : train).push_back(i);
    }
    const Matrix ytr = data_std.Y(train, Eigen::all);
    const Matrix yte = data_std.Y(test, Eigen::all);
    const Matrix weights = neighborhood_weights(
        squared_distances(cond(test, Eigen::all), cond(train, Eigen::all)),
        epsilon);
    const EkdeBatch b = batch_from(weights, squared_distances(ytr, ytr),
                                   squared_distances(yte, ytr), bandwidth, data_std.dy());
    total += 0.5 * b.l2.mean() - b.density.mean();
  }
  return total / static_cast<double>(k);
}

EkdeModel fit_ekde(const Dataset& data_std, const StandardizationStats& stats,
                   const std::optional<ProjectionMatrix>& w, const EkdeFitOptions& opts) {
  data_std.validate();
  const std::optional<Matrix> wm = w ? std::optional<Matrix>(w->matrix()) : std::nullopt;
  const Matrix cond = conditioning(data_std.X, wm);
  const std::vector<double> eps = opts.epsilons.empty() ? default_epsilon_grid(cond) : opts.epsilons;
  const std::vector<double> hs =
      opts.bandwidths.empty() ? default_bandwidth_grid() : opts.bandwidths;
  if (eps.empty() || hs.empty()) throw ValidationError("epsilon-KDE grids must be non-empty");
  for (double e : eps) check_params(e, 1.0);
  for (double h : hs) check_params(0.0, h);
  const std::vector<int> folds = make_folds(data_std.size(), opts.folds, opts.seed);

  // Distances are shared by every grid point; only the kernels change with h.
  struct FoldData {
    Matrix cond_d2;
    Matrix pair_d2;
    Matrix cross_d2;
  };
  std::vector<FoldData> fd;
  for (int j = 0; j < opts.folds; ++j) {
    std::vector<Index> train;
    std::vector<Index> test;
    for (Index i = 0; i < data_std.size(); ++i) {
      (folds[static_cast<std::size_t>(i)] == j ? test : train).push_back(i);
    }
    const Matrix ytr = data_std.Y(train, Eigen::all);
    fd.push_back({squared_distances(cond(test, Eigen::all),
                                    cond(train, Eigen::all)),
                  squared_distances(ytr, ytr),
                  squared_distances(data_std.Y(test, Eigen::all), ytr)});
  }

  double best_score = std::numeric_limits<double>::infinity();
  double best_eps = eps.front();
  double best_h = hs.front();
  bool found = false;
  for (double e : eps) {
    std::vector<Matrix> weights;
    for (const auto& f : fd) weights.push_back(neighborhood_weights(f.cond_d2, e));
    for (double h : hs) {
      double total = 0.0;
      for (std::size_t j = 0; j < fd.size(); ++j) {
        const EkdeBatch b = batch_from(weights[j], fd[j].pair_d2, fd[j].cross_d2, h, data_std.dy());
        total += 0.5 * b.l2.mean() - b.density.mean();
      }
      const double score = total / static_cast<double>(fd.size());
      const bool better = !found || score < best_score ||
                          (score == best_score && (e > best_eps || (e == best_eps && h > best_h)));
      if (better) {
        best_score = score;
        best_eps = e;
        best_h = h;
        found = true;
      }
    }
  }
  return make_ekde(data_std, stats, w, best_eps, best_h);
}

}  // namespace sdrcde
