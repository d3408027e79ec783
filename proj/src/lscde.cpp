#include "sdrcde/lscde.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "sdrcde/error.hpp"

namespace sdrcde {

namespace {

class Fnv {
 public:
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h_ ^= (v >> (8 * b)) & 0xffU;
      h_ *= 1099511628211ULL;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  void add(const Matrix& m) {
    add(static_cast<std::uint64_t>(m.rows()));
    add(static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.size(); ++i) add(m.data()[i]);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

std::vector<double> to_std_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

KernelSystem::KernelSystem(const Matrix& x, const Matrix& y, const BasisSpec& basis,
                           const Matrix& w)
    : x_(x), w_(w), basis_(basis) {
  if (x.rows() != y.rows()) throw ValidationError("X and Y row counts differ");
  if (w.cols() != x.cols() || basis.center_inputs.cols() != x.cols()) {
    throw ValidationError("input dimension mismatch between data, basis and W");
  }
  if (basis.center_outputs.cols() != y.cols()) {
    throw ValidationError("output dimension mismatch between data and basis");
  }
  if (!(basis.sigma > 0.0)) throw ValidationError("bandwidth must be positive");

  const Index n = x.rows();
  const Index b = basis.count();
  const double s2 = basis.sigma * basis.sigma;
  z_ = x * w.transpose();
  u_ = basis.projected_centers(w);
  const Matrix& v = basis.center_outputs;

  ez_.resize(n, b);
  ey_.resize(n, b);
  for (Index k = 0; k < b; ++k) {
    for (Index i = 0; i < n; ++i) {
      ez_(i, k) = std::exp(-(z_.row(i) - u_.row(k)).squaredNorm() / (2.0 * s2));
      ey_(i, k) = std::exp(-(y.row(i) - v.row(k)).squaredNorm() / (2.0 * s2));
    }
  }
  vv_.resize(b, b);
  for (Index k = 0; k < b; ++k) {
    for (Index kk = k; kk < b; ++kk) {
      vv_(k, kk) = std::exp(-(v.row(k) - v.row(kk)).squaredNorm() / (4.0 * s2));
      vv_(kk, k) = vv_(k, kk);
    }
  }
  phibar_scale_ =
      std::pow(std::sqrt(std::numbers::pi) * basis.sigma, static_cast<double>(y.cols()));

  Fnv fnv;
  fnv.add(w);
  fnv.add(basis.sigma);
  fnv.add(basis.center_inputs);
  fnv.add(static_cast<std::uint64_t>(n));
  state_ = fnv.value();
}

SystemMatrices KernelSystem::assemble() const {
  const Index n = samples();
  if (n == 0) throw ValidationError("cannot assemble a system from zero samples");
  SystemMatrices sys;
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix gram = Matrix::Zero(centers(), centers());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(ez_.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  sys.G = (phibar_scale_ * inv_n) * vv_.cwiseProduct(gram);
  sys.h = inv_n * ez_.cwiseProduct(ey_).colwise().sum().transpose();
  sys.n = n;
  sys.state = state_;
  return sys;
}

SystemMatrices KernelSystem::assemble(const std::vector<Index>& rows) const {
  if (rows.empty()) throw ValidationError("cannot assemble a system from zero samples");
  const Matrix e = ez_(rows, Eigen::all);
  const Matrix ey = ey_(rows, Eigen::all);
  SystemMatrices sys;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  Matrix gram = Matrix::Zero(centers(), centers());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(e.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  sys.G = (phibar_scale_ * inv_n) * vv_.cwiseProduct(gram);
  sys.h = inv_n * e.cwiseProduct(ey).colwise().sum().transpose();
  sys.n = static_cast<Index>(rows.size());
  sys.state = state_;
  return sys;
}

SystemMatrices assemble_system(const Dataset& data_std, const BasisSpec& basis,
                               const ProjectionMatrix& w) {
  if (data_std.size() == 0) throw ValidationError("cannot assemble a system from zero samples");
  return KernelSystem(data_std.X, data_std.Y, basis, w.matrix()).assemble();
}

Vector solve_alpha(const SystemMatrices& sys, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("regularization must be finite and non-negative");
  }
  if (sys.G.rows() != sys.h.size() || sys.G.cols() != sys.h.size()) {
    throw ValidationError("system shape mismatch");
  }
  Matrix a = sys.G;
  a.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SolverError("(G + lambda I) is not positive definite (lambda=" + std::to_string(lambda) +
                      ")");
  }
  Vector alpha = llt.solve(sys.h);
  const double residual = (a * alpha - sys.h).lpNorm<Eigen::Infinity>();
  if (!alpha.allFinite() || !(residual < 1e-8)) {
    throw SolverError("linear solve residual " + std::to_string(residual) +
                      " exceeds 1e-8 (lambda=" + std::to_string(lambda) + ")");
  }
  return alpha;
}

double sce_score(const SystemMatrices& sys, const Vector& alpha) {
  if (alpha.size() != sys.h.size() || sys.G.rows() != alpha.size()) {
    throw ValidationError("score shape mismatch");
  }
  return 0.5 * alpha.dot(sys.G * alpha) - sys.h.dot(alpha);
}

CdeModel make_cde_model(ProjectionMatrix w, BasisSpec basis, double lambda, Vector alpha_hat,
                        StandardizationStats stats, double score) {
  if (alpha_hat.size() != basis.count()) throw ValidationError("alpha size mismatch");
  Vector tilde = alpha_hat.cwiseMax(0.0);
  return CdeModel{std::move(w),         std::move(basis), lambda, std::move(alpha_hat),
                  std::move(tilde),     std::move(stats), score};
}

double conditional_density_std(const CdeModel& model, const Vector& x_std, const Vector& y_std) {
  const Vector z = model.W.matrix() * x_std;
  const double norm = eval_normalizer(z, model.alpha_tilde, model.basis, model.W);
  if (!(norm >= kNormalizerFloor)) {
    throw DegenerateDensityError("conditional density normalizer below floor at query", to_std_vector(x_std));
  }
  return model.alpha_tilde.dot(eval_phi(z, y_std, model.basis, model.W)) / norm;
}

double eval_conditional_density(const CdeModel& model, const Vector& x, const Vector& y) {
  return conditional_density_std(model, model.stats.standardize_x(x),
                                 model.stats.standardize_y(y)) *
         model.stats.y_jacobian();
}

double density_l2_std(const CdeModel& model, const Vector& x_std) {
  const Vector z = model.W.matrix() * x_std;
  const double norm = eval_normalizer(z, model.alpha_tilde, model.basis, model.W);
  if (!(norm >= kNormalizerFloor)) {
    throw DegenerateDensityError("conditional density normalizer below floor at query", to_std_vector(x_std));
  }
  const Matrix phibar = eval_phibar(z, model.basis, model.W);
  return model.alpha_tilde.dot(phibar * model.alpha_tilde) / (norm * norm);
}

double density_l2(const CdeModel& model, const Vector& x) {
  return density_l2_std(model, model.stats.standardize_x(x)) * model.stats.y_jacobian();
}

}  // namespace sdrcde
