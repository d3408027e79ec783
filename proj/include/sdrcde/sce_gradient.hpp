#pragma once

#include <cstdint>
#include <vector>

#include "sdrcde/lscde.hpp"
#include "sdrcde/types.hpp"

namespace sdrcde {

/// Derivative of G_{k,k'} with respect to W_{l,l'} evaluated entrywise.
double grad_G_entry(const KernelSystem& ks, Index k, Index kk, Index l, Index ll);

/// Derivative of h_k with respect to W_{l,l'}.
double grad_h_entry(const KernelSystem& ks, Index k, Index l, Index ll);

/// dG/dW and dh/dW materialized for every W entry (l, l'), row-major in
/// (l, l'). Memory is b^2 d_z d_x; intended for checks and small problems.
struct DerivativeTensors {
  std::vector<Matrix> dG;
  std::vector<Vector> dh;
  Index dz = 0;
  Index dx = 0;
  std::uint64_t state = 0;

  const Matrix& G(Index l, Index ll) const { return dG[static_cast<std::size_t>(l * dx + ll)]; }
  const Vector& h(Index l, Index ll) const { return dh[static_cast<std::size_t>(l * dx + ll)]; }
};

DerivativeTensors derivative_tensors(const KernelSystem& ks);

/// beta = (G + lambda I)^{-1} G alpha.
Vector compute_beta(const SystemMatrices& sys, const Vector& alpha, double lambda);

/// dS/dW = alpha^T dG (1.5 alpha - beta) + dh^T (beta - 2 alpha) contracted
/// from materialized tensors. Throws ValidationError when the tensors were
/// computed for a different state than `sys`.
Matrix grad_sce(const SystemMatrices& sys, const Vector& alpha, const Vector& beta,
                const DerivativeTensors& tensors);

/// Same contraction without materializing the tensors: per-sample weights
/// are accumulated into a d_x x d_x moment matrix M so that the gradient is
/// -(1/(sigma^2 n)) W M. Samples are reduced in index order.
Matrix grad_sce(const KernelSystem& ks, const Vector& alpha, const Vector& beta);

/// Everything one optimizer step needs at a fixed (W, sigma, lambda).
struct GradientWorkspace {
  SystemMatrices sys;
  Vector alpha_hat;
  Vector beta_hat;
  double score = 0.0;
  Matrix dSCE_dW;
};

GradientWorkspace evaluate_with_gradient(const KernelSystem& ks, double lambda);

}  // namespace sdrcde
