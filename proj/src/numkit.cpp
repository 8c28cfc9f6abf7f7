#include "radarest/numkit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "radarest/errors.hpp"

namespace radarest {

MatC psd_sqrt(const MatC& a) {
  if (a.rows() != a.cols()) throw NumericalFailure("psd_sqrt: matrix not square");
  if (a.rows() == 0) return a;
  Eigen::SelfAdjointEigenSolver<MatC> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalFailure("psd_sqrt: eigendecomposition failed");
  Vec lambda = eig.eigenvalues();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  const double floor = 1e-12 * scale;
  double clipped = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < floor) {
      if (lambda(i) < 0.0) clipped += -lambda(i);
      lambda(i) = (lambda(i) < 0.0) ? 0.0 : lambda(i);
    }
  }
  const double trace = std::abs(a.trace().real()) + 1e-300;
  if (clipped > 1e-8 * trace) {
    std::ostringstream msg;
    msg << "psd_sqrt: matrix is not PSD (clipped " << clipped << " of trace " << trace << ")";
    throw NumericalFailure(msg.str());
  }
  return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         eig.eigenvectors().adjoint();
}

LowRankCovariance::LowRankCovariance(MatC basis, MatC core, double noise)
    : basis_(std::move(basis)), core_(std::move(core)), noise_(noise) {
  if (noise_ <= 0.0) throw NumericalFailure("LowRankCovariance: noise power must be positive");
  if (core_.rows() != core_.cols() || core_.rows() != basis_.cols())
    throw NumericalFailure("LowRankCovariance: dimension mismatch");
  u_ = basis_ * psd_sqrt(core_);
  utu_ = u_.adjoint() * u_;
  MatC cap = utu_;
  cap.diagonal().array() += noise_;
  cap_.compute(cap);
  if (cap_.info() != Eigen::Success)
    throw NumericalFailure("LowRankCovariance: capacitance system is singular");
}

VecC LowRankCovariance::solve(const VecC& x) const {
  if (x.size() != dim()) throw NumericalFailure("LowRankCovariance::solve: size mismatch");
  return (x - u_ * cap_.solve(u_.adjoint() * x)) / noise_;
}

MatC LowRankCovariance::solve(const MatC& x) const {
  if (x.rows() != dim()) throw NumericalFailure("LowRankCovariance::solve: size mismatch");
  return (x - u_ * cap_.solve(u_.adjoint() * x)) / noise_;
}

double LowRankCovariance::logdet() const {
  // |R| = sigma^{2(n-Q)} |sigma^2 I + U^H U|
  const Eigen::Index n = dim();
  const Eigen::Index q = core_.rows();
  double ld = static_cast<double>(n - q) * std::log(noise_);
  for (Eigen::Index i = 0; i < q; ++i) ld += 2.0 * std::log(std::real(cap_.matrixLLT()(i, i)));
  return ld;
}

double LowRankCovariance::trace_inverse() const {
  const double n = static_cast<double>(dim());
  const MatC minv_utu = cap_.solve(utu_);
  return (n - minv_utu.trace().real()) / noise_;
}

double LowRankCovariance::trace_inverse_squared() const {
  // Tr{R^{-2}} = (n - 2 Tr{M^{-1} U^H U} + Tr{M^{-1} U^H U M^{-1} U^H U}) / sigma^4
  const double n = static_cast<double>(dim());
  const MatC minv_utu = cap_.solve(utu_);
  const double t1 = minv_utu.trace().real();
  const double t2 = (minv_utu * minv_utu).trace().real();
  return (n - 2.0 * t1 + t2) / (noise_ * noise_);
}

OrthProjector::OrthProjector(const MatC& h) {
  const Eigen::Index q = h.cols();
  Eigen::ColPivHouseholderQR<MatC> qr(h);
  qr.setThreshold(1e-12);
  if (qr.rank() < q) {
    std::ostringstream msg;
    msg << "OrthProjector: rank-deficient steering matrix (rank " << qr.rank() << " of " << q
        << ", |R_min/R_max| ~ " << std::abs(qr.matrixR()(q - 1, q - 1)) /
               std::max(std::abs(qr.matrixR()(0, 0)), 1e-300)
        << ")";
    throw NumericalFailure(msg.str());
  }
  q1_ = MatC(qr.householderQ() * MatC::Identity(h.rows(), q));
}

VecC OrthProjector::apply(const VecC& x) const { return x - q1_ * (q1_.adjoint() * x); }

MatC OrthProjector::apply(const MatC& x) const { return x - q1_ * (q1_.adjoint() * x); }

VecC OrthProjector::range_part(const VecC& x) const { return q1_ * (q1_.adjoint() * x); }

VecC orth_projection_apply(const MatC& h, const VecC& x) { return OrthProjector(h).apply(x); }

SchurResult schur_complement(const Mat& f, Eigen::Index block_size) {
  if (f.rows() != f.cols()) throw NumericalFailure("schur_complement: matrix not square");
  if (block_size <= 0 || block_size > f.rows())
    throw NumericalFailure("schur_complement: bad block size");
  const Eigen::Index n = f.rows();
  const Eigen::Index m = n - block_size;
  SchurResult out;
  if (m == 0) {
    out.value = f;
    return out;
  }
  const Mat f11 = f.topLeftCorner(block_size, block_size);
  const Mat f12 = f.topRightCorner(block_size, m);
  const Mat f21 = f.bottomLeftCorner(m, block_size);
  const Mat f22 = f.bottomRightCorner(m, m);
  Eigen::LDLT<Mat> ldlt(f22);
  const double scale = f22.cwiseAbs().maxCoeff();
  bool singular = ldlt.info() != Eigen::Success;
  if (!singular && scale > 0.0) {
    const Vec d = ldlt.vectorD().cwiseAbs();
    singular = d.minCoeff() < 1e-13 * d.maxCoeff();
  }
  if (!singular) {
    out.value = f11 - f12 * ldlt.solve(f21);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(f22);
    out.value = f11 - f12 * cod.pseudoInverse() * f21;
    out.used_pseudoinverse = true;
  }
  out.value = 0.5 * (out.value + out.value.transpose()).eval();
  return out;
}

MatC finite_difference_jacobian(const std::function<VecC(const Vec&)>& f, const Vec& x0,
                                const Vec& steps) {
  if (steps.size() != x0.size())
    throw NumericalFailure("finite_difference_jacobian: step vector size mismatch");
  MatC jac;
  for (Eigen::Index p = 0; p < x0.size(); ++p) {
    Vec hi = x0, lo = x0;
    hi(p) += steps(p);
    lo(p) -= steps(p);
    const VecC col = (f(hi) - f(lo)) / (2.0 * steps(p));
    if (!col.allFinite()) throw NumericalFailure("finite_difference_jacobian: non-finite values");
    if (jac.size() == 0) jac.resize(col.size(), x0.size());
    jac.col(p) = col;
  }
  return jac;
}

InformationInverse invert_information(const Mat& info, double max_condition) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (info + info.transpose()));
  if (eig.info() != Eigen::Success)
    throw NumericalFailure("invert_information: eigendecomposition failed");
  const Vec lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  const double lmin = lambda.minCoeff();
  const double cond = (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(lmin > 0.0) || cond > max_condition) {
    std::ostringstream msg;
    msg << "invert_information: information matrix condition " << cond << " exceeds "
        << max_condition << " (lambda_min " << lmin << ", lambda_max " << lmax << ")";
    throw NumericalFailure(msg.str());
  }
  InformationInverse out;
  out.condition = cond;
  out.inverse = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
                eig.eigenvectors().transpose();
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose()).eval();
  return out;
}

}  // namespace radarest
