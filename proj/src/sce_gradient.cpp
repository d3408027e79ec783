#include "sdrcde/sce_gradient.hpp"

#include <string>
#include <utility>

#include "sdrcde/error.hpp"

namespace sdrcde {

namespace {

void check_indices(const KernelSystem& ks, Index k, Index kk, Index l, Index ll) {
  const Index b = ks.centers();
  if (k < 0 || k >= b || kk < 0 || kk >= b) throw ValidationError("center index out of range");
  if (l < 0 || l >= ks.w().rows() || ll < 0 || ll >= ks.w().cols()) {
    throw ValidationError("W index out of range");
  }
}

}  // namespace

double grad_G_entry(const KernelSystem& ks, Index k, Index kk, Index l, Index ll) {
  check_indices(ks, k, kk, l, ll);
  // Fixed evaluation order so the entry is exactly symmetric in (k, kk).
  if (kk < k) std::swap(k, kk);
  const Matrix& x = ks.x();
  const Matrix& xc = ks.basis().center_inputs;
  const double s2 = ks.basis().sigma * ks.basis().sigma;
  const double common = ks.phibar_scale() * ks.vv()(k, kk);
  double sum = 0.0;
  for (Index i = 0; i < ks.samples(); ++i) {
    const double phibar = common * ks.ez()(i, k) * ks.ez()(i, kk);
    const double bracket = (ks.z()(i, l) - ks.u()(k, l)) * (x(i, ll) - xc(k, ll)) +
                           (ks.z()(i, l) - ks.u()(kk, l)) * (x(i, ll) - xc(kk, ll));
    sum += phibar * bracket;
  }
  return -sum / (s2 * static_cast<double>(ks.samples()));
}

double grad_h_entry(const KernelSystem& ks, Index k, Index l, Index ll) {
  check_indices(ks, k, k, l, ll);
  const Matrix& x = ks.x();
  const Matrix& xc = ks.basis().center_inputs;
  const double s2 = ks.basis().sigma * ks.basis().sigma;
  double sum = 0.0;
  for (Index i = 0; i < ks.samples(); ++i) {
    const double phi = ks.ez()(i, k) * ks.ey()(i, k);
    sum += phi * (ks.z()(i, l) - ks.u()(k, l)) * (x(i, ll) - xc(k, ll));
  }
  return -sum / (s2 * static_cast<double>(ks.samples()));
}

DerivativeTensors derivative_tensors(const KernelSystem& ks) {
  DerivativeTensors t;
  t.dz = ks.w().rows();
  t.dx = ks.w().cols();
  t.state = ks.state();
  const Index b = ks.centers();
  for (Index l = 0; l < t.dz; ++l) {
    for (Index ll = 0; ll < t.dx; ++ll) {
      Matrix dg(b, b);
      Vector dh(b);
      for (Index k = 0; k < b; ++k) {
        dh(k) = grad_h_entry(ks, k, l, ll);
        for (Index kk = k; kk < b; ++kk) {
          dg(k, kk) = grad_G_entry(ks, k, kk, l, ll);
          dg(kk, k) = dg(k, kk);
        }
      }
      t.dG.push_back(std::move(dg));
      t.dh.push_back(std::move(dh));
    }
  }
  return t;
}

Vector compute_beta(const SystemMatrices& sys, const Vector& alpha, double lambda) {
  SystemMatrices rhs{sys.G, sys.G * alpha, sys.n, sys.state};
  return solve_alpha(rhs, lambda);
}

Matrix grad_sce(const SystemMatrices& sys, const Vector& alpha, const Vector& beta,
                const DerivativeTensors& tensors) {
  if (sys.state != tensors.state) {
    throw ValidationError("derivative tensors belong to a different (W, sigma) state");
  }
  if (alpha.size() != sys.h.size() || beta.size() != sys.h.size()) {
    throw ValidationError("coefficient size mismatch");
  }
  const Vector gamma = 1.5 * alpha - beta;
  const Vector delta = beta - 2.0 * alpha;
  Matrix grad(tensors.dz, tensors.dx);
  for (Index l = 0; l < tensors.dz; ++l) {
    for (Index ll = 0; ll < tensors.dx; ++ll) {
      grad(l, ll) = alpha.dot(tensors.G(l, ll) * gamma) + tensors.h(l, ll).dot(delta);
    }
  }
  return grad;
}

Matrix grad_sce(const KernelSystem& ks, const Vector& alpha, const Vector& beta) {
  const Index b = ks.centers();
  if (alpha.size() != b || beta.size() != b) throw ValidationError("coefficient size mismatch");
  const Vector gamma = 1.5 * alpha - beta;
  const Vector delta = beta - 2.0 * alpha;
  const Matrix& ez = ks.ez();
  const double c = ks.phibar_scale();

  // (Phibar(z_i) a)_k = c e_ik (V (e_i o a))_k for every sample at once.
  const Matrix phibar_gamma =
      c * ez.cwiseProduct((ez * gamma.asDiagonal()) * ks.vv());
  const Matrix phibar_alpha =
      c * ez.cwiseProduct((ez * alpha.asDiagonal()) * ks.vv());

  // Per-sample, per-center weight on (z_i - u_k)(x_i - x~_k)^T.
  Matrix weight = phibar_gamma * alpha.asDiagonal();
  weight += phibar_alpha * gamma.asDiagonal();
  weight += ez.cwiseProduct(ks.ey()) * delta.asDiagonal();

  const Matrix& x = ks.x();
  const Matrix& xc = ks.basis().center_inputs;
  const Vector row_sums = weight.rowwise().sum();
  const Vector col_sums = weight.colwise().sum().transpose();
  const Matrix cross = x.transpose() * weight * xc;
  const Matrix moment = x.transpose() * row_sums.asDiagonal() * x - cross - cross.transpose() +
                        xc.transpose() * col_sums.asDiagonal() * xc;

  const double s2 = ks.basis().sigma * ks.basis().sigma;
  return -(1.0 / (s2 * static_cast<double>(ks.samples()))) * (ks.w() * moment);
}

GradientWorkspace evaluate_with_gradient(const KernelSystem& ks, double lambda) {
  GradientWorkspace ws;
  ws.sys = ks.assemble();
  ws.alpha_hat = solve_alpha(ws.sys, lambda);
  ws.beta_hat = compute_beta(ws.sys, ws.alpha_hat, lambda);
  ws.score = sce_score(ws.sys, ws.alpha_hat);
  ws.dSCE_dW = grad_sce(ks, ws.alpha_hat, ws.beta_hat);
  return ws;
}

}  // namespace sdrcde
