#pragma once

#include <cstdint>
#include <vector>

#include "sdrcde/kernel_basis.hpp"
#include "sdrcde/manifold.hpp"
#include "sdrcde/types.hpp"

namespace sdrcde {

/// Sample averages G = (1/n) sum Phibar(z_i), h = (1/n) sum phi(z_i, y_i).
struct SystemMatrices {
  Matrix G;
  Vector h;
  Index n = 0;
  std::uint64_t state = 0;  // identifies the (data, basis, W) the system came from
};

/// Gaussian factors for one (data, basis, W) state, shared by the system
/// assembly, cross-validation and the gradient.
///
/// Phibar(z_i) factors as c * diag(e_i) V diag(e_i) with
/// e_ik = exp(-|z_i - u_k|^2 / (2 sigma^2)), V_kk' = exp(-|v_k - v_k'|^2 / (4 sigma^2))
/// and c = (sqrt(pi) sigma)^{d_y}, so G is c * V o (E^T E) / n.
class KernelSystem {
 public:
  KernelSystem(const Matrix& x, const Matrix& y, const BasisSpec& basis, const Matrix& w);

  Index samples() const { return x_.rows(); }
  Index centers() const { return basis_.count(); }

  const Matrix& x() const { return x_; }
  const Matrix& w() const { return w_; }
  const Matrix& z() const { return z_; }
  const Matrix& u() const { return u_; }
  const BasisSpec& basis() const { return basis_; }
  const Matrix& ez() const { return ez_; }
  const Matrix& ey() const { return ey_; }
  const Matrix& vv() const { return vv_; }
  double phibar_scale() const { return phibar_scale_; }
  std::uint64_t state() const { return state_; }

  SystemMatrices assemble() const;
  SystemMatrices assemble(const std::vector<Index>& rows) const;

 private:
  Matrix x_;
  Matrix w_;
  BasisSpec basis_;
  Matrix z_;
  Matrix u_;
  Matrix ez_;
  Matrix ey_;
  Matrix vv_;
  double phibar_scale_ = 1.0;
  std::uint64_t state_ = 0;
};

SystemMatrices assemble_system(const Dataset& data_std, const BasisSpec& basis,
                               const ProjectionMatrix& w);

/// alpha = (G + lambda I)^{-1} h via a Cholesky factorization. Throws
/// SolverError when the system is singular or the residual exceeds 1e-8.
Vector solve_alpha(const SystemMatrices& sys, double lambda);

/// 0.5 alpha^T G alpha - h^T alpha.
double sce_score(const SystemMatrices& sys, const Vector& alpha);

/// Normalizers below this are reported as degenerate instead of 0/0.
inline constexpr double kNormalizerFloor = 1e-12;

/// Fitted conditional density estimator. Densities are evaluated in the
/// standardized space and converted to raw output units on request.
struct CdeModel {
  ProjectionMatrix W;
  BasisSpec basis;
  double lambda = 0.0;
  Vector alpha_hat;
  Vector alpha_tilde;  // max(alpha_hat, 0)
  StandardizationStats stats;
  double sce_score = 0.0;
};

CdeModel make_cde_model(ProjectionMatrix w, BasisSpec basis, double lambda, Vector alpha_hat,
                        StandardizationStats stats, double score);

/// p(y|x) for standardized inputs, with respect to standardized y.
double conditional_density_std(const CdeModel& model, const Vector& x_std, const Vector& y_std);

/// p(y|x) for raw inputs, with respect to raw y.
double eval_conditional_density(const CdeModel& model, const Vector& x, const Vector& y);

/// Integral over standardized y of p(y|x)^2 for a standardized input.
double density_l2_std(const CdeModel& model, const Vector& x_std);

/// Integral over raw y of p(y|x)^2 for a raw input.
double density_l2(const CdeModel& model, const Vector& x);

}  // namespace sdrcde
