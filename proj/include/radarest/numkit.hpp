#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace radarest {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using cxd = std::complex<double>;

/// Hermitian PSD square root S with S S^H = A. Negative eigenvalues are
/// clipped at 1e-12 of the spectral scale; clipping more than 1e-8 of the
/// trace is reported as a NumericalFailure (the matrix was not close to PSD).
MatC psd_sqrt(const MatC& a);

/// R = H A H^H + sigma^2 I held in factored form; all algebra runs through
/// the Q x Q capacitance system so cost scales with Q, never with (L_r N)^2.
class LowRankCovariance {
 public:
  LowRankCovariance(MatC basis, MatC core, double noise);

  const MatC& basis() const { return basis_; }
  const MatC& core() const { return core_; }
  double noise() const { return noise_; }
  Eigen::Index dim() const { return basis_.rows(); }

  /// R^{-1} x for a vector or a stack of columns.
  VecC solve(const VecC& x) const;
  MatC solve(const MatC& x) const;

  double logdet() const;
  double trace_inverse() const;
  double trace_inverse_squared() const;

 private:
  MatC basis_;   // H, n x Q
  MatC core_;    // A, Q x Q Hermitian PSD
  double noise_; // sigma^2
  MatC u_;       // H * A^{1/2}
  Eigen::LLT<MatC> cap_; // sigma^2 I + U^H U
  MatC utu_;     // U^H U
};

/// Orthogonal-complement projector of range(H), applied without ever forming
/// the n x n matrix. Construction fails on rank-deficient H.
class OrthProjector {
 public:
  explicit OrthProjector(const MatC& h);
  VecC apply(const VecC& x) const;
  MatC apply(const MatC& x) const;
  /// Projection onto range(H) (the complement of apply()).
  VecC range_part(const VecC& x) const;

 private:
  MatC q1_;  // orthonormal basis of range(H)
};

VecC orth_projection_apply(const MatC& h, const VecC& x);

struct SchurResult {
  Mat value;
  bool used_pseudoinverse = false;
};

/// F11 - F12 F22^{-1} F21 for a symmetric F partitioned after `block_size`
/// leading rows. A singular trailing block falls back to the pseudo-inverse
/// and sets the flag.
SchurResult schur_complement(const Mat& f, Eigen::Index block_size);

/// Central differences, column p = (f(x0 + s_p e_p) - f(x0 - s_p e_p)) / (2 s_p).
MatC finite_difference_jacobian(const std::function<VecC(const Vec&)>& f, const Vec& x0,
                                const Vec& steps);

struct InformationInverse {
  Mat inverse;
  double condition = 0.0;
};

/// Inverts a symmetric information matrix through its eigendecomposition.
/// Refuses (throws NumericalFailure with the condition number) above
/// condition 1e12 instead of returning garbage.
InformationInverse invert_information(const Mat& info, double max_condition = 1e12);

}  // namespace radarest
