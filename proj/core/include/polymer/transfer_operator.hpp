#pragma once

#include <cstdint>
#include <vector>

#include "polymer/charge_model.hpp"

namespace polymer {

/// Transition kernel of the critical geometric Galton-Watson process:
/// q_kernel(0,j) = 1{j=0}, else binom(i+j-1, i-1) / 2^(i+j). Evaluated in
/// log space for large arguments.
double q_kernel(std::int64_t i, std::int64_t j);
double log_q_kernel(std::int64_t i, std::int64_t j);

/// Dense truncations of the three kernels built from the site weight gstar
/// and q_kernel, indices 0..trunc_n-1:
///   a_mat(i,j)       = exp(-mu(i+j+1) + gstar(i+j+1)) q(i+1,j)   (symmetric)
///   a_tilde_mat(i,j) = 0 for i=0, a_mat(i-1,j) for i>=1
///   a_hat_mat(i,j)   = exp(-mu(i+j) + gstar(i+j)) q(i+1,j)
struct OperatorBundle {
  int trunc_n = 0;
  std::vector<double> a_mat, a_tilde_mat, a_hat_mat;  // row-major trunc_n^2
  double mu = 0.0, delta = 0.0, beta = 0.0;
  const ChargeModel* model = nullptr;

  double a(int i, int j) const { return a_mat[static_cast<std::size_t>(i) * trunc_n + j]; }
  double a_tilde(int i, int j) const {
    return a_tilde_mat[static_cast<std::size_t>(i) * trunc_n + j];
  }
  double a_hat(int i, int j) const { return a_hat_mat[static_cast<std::size_t>(i) * trunc_n + j]; }
};

/// Throws NumericError if any entry overflows.
OperatorBundle build_operators(const ChargeModel& model, double mu, double delta, double beta,
                               int trunc_n);
/// Same, reusing a per-(delta,beta) gstar table.
OperatorBundle build_operators(GstarTable& table, double mu, int trunc_n);

struct SpectralSolution {
  double lambda = 0.0;
  std::vector<double> eigvec;  // positive, unit 2-norm (symmetric case)
  int trunc_n = 0;
  double residual = 0.0;
  double trunc_gap = 0.0;  // |lambda_N - lambda_{N/2}| from the adaptive driver
};

/// Perron root and positive unit eigenvector of a_mat by power iteration from
/// the uniform positive vector. Stops when the Rayleigh quotient changes by
/// less than 1e-13 and the residual is below 1e-10 (both relative to
/// max(1, lambda)); throws NumericError after max_iters.
SpectralSolution spectral_radius_sym(const OperatorBundle& bundle);

/// Dominant eigenvalue of a_tilde_mat (real, nonnegative) by power iteration
/// with a positive start supported on indices >= 1.
double spectral_radius_nonsym(const OperatorBundle& bundle);

/// Doubles the truncation from 64 until |lambda_2N - lambda_N| <=
/// rel_tol * lambda_2N, cap 4096. Records the last gap in trunc_gap.
SpectralSolution lambda_adaptive(const ChargeModel& model, double mu, double delta, double beta,
                                 double rel_tol = 1e-9);
SpectralSolution lambda_adaptive(GstarTable& table, double mu, double rel_tol = 1e-9,
                                 int n_start = 64, int n_cap = 4096);

/// Adaptive dominant eigenvalue of the shifted kernel.
double lambda_tilde_adaptive(GstarTable& table, double mu, double rel_tol = 1e-9,
                             int n_start = 64, int n_cap = 4096);

struct LambdaDerivs {
  double d_mu, d_delta, d_beta;
};

/// First-order derivatives of the Perron root via the eigenvector
/// (Hellmann-Feynman); exact at the truncated level:
///   d_mu    = -sum nu(i) (i+j+1) a(i,j) nu(j)
///   d_delta =  sum nu(i) [d_delta gstar(i+j+1)] a(i,j) nu(j)
///   d_beta  =  sum nu(i) [d_beta  gstar(i+j+1)] a(i,j) nu(j)
LambdaDerivs dlambda(const OperatorBundle& bundle, const SpectralSolution& solution);

}  // namespace polymer
