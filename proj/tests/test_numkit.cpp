#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "radarest/errors.hpp"
#include "radarest/numkit.hpp"
#include "radarest/rng.hpp"

using namespace radarest;

namespace {

MatC random_complex(Rng& rng, int rows, int cols) {
  MatC m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.cnormal();
  return m;
}

MatC random_psd(Rng& rng, int n) {
  const MatC b = random_complex(rng, n, n);
  return b * b.adjoint() + 0.1 * MatC::Identity(n, n);
}

Mat random_real_psd(Rng& rng, int n) {
  Mat b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
  return b * b.transpose() + 0.1 * Mat::Identity(n, n);
}

VecC vec_of(const MatC& m) {
  VecC v(m.size());
  Eigen::Index idx = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) v(idx++) = m(r, c);
  return v;
}

MatC kron(const MatC& a, const MatC& b) {
  MatC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST_CASE("low-rank covariance reduces to white noise when A = 0") {
  Rng rng(1);
  const int n = 12, q = 2;
  const MatC h = random_complex(rng, n, q);
  const double sigma2 = 0.7;
  const LowRankCovariance cov(h, MatC::Zero(q, q), sigma2);
  const VecC x = random_complex(rng, n, 1);
  CHECK((cov.solve(x) - x / sigma2).norm() < 1e-14 * x.norm());
  CHECK(cov.logdet() == doctest::Approx(n * std::log(sigma2)).epsilon(1e-12));
}

TEST_CASE("low-rank solve and logdet match a dense factorization at n = 32") {
  Rng rng(2);
  const int n = 32, q = 3;
  const MatC h = random_complex(rng, n, q);
  const MatC a = random_psd(rng, q);
  const double sigma2 = 0.4;
  const LowRankCovariance cov(h, a, sigma2);

  MatC r = h * a * h.adjoint();
  r.diagonal().array() += sigma2;
  const Eigen::LLT<MatC> llt(r);

  const VecC x = random_complex(rng, n, 1);
  const VecC got = cov.solve(x);
  CHECK((r * got - x).norm() < 1e-10 * x.norm());
  CHECK((got - llt.solve(x)).norm() < 1e-9 * llt.solve(x).norm());

  double dense_logdet = 0.0;
  for (int i = 0; i < n; ++i) dense_logdet += 2.0 * std::log(std::real(llt.matrixLLT()(i, i)));
  CHECK(cov.logdet() == doctest::Approx(dense_logdet).epsilon(1e-9));

  const MatC rinv = llt.solve(MatC::Identity(n, n));
  CHECK(cov.trace_inverse() == doctest::Approx(rinv.trace().real()).epsilon(1e-9));
  CHECK(cov.trace_inverse_squared() ==
        doctest::Approx((rinv * rinv).trace().real()).epsilon(1e-9));
}

TEST_CASE("solving against a vector in the basis range uses the capacitance system") {
  Rng rng(3);
  const int n = 24, q = 2;
  const MatC h = random_complex(rng, n, q);
  const MatC a = random_psd(rng, q);
  const double sigma2 = 1.3;
  const LowRankCovariance cov(h, a, sigma2);
  const VecC coeff = random_complex(rng, q, 1);
  const VecC x = h * coeff;

  MatC r = h * a * h.adjoint();
  r.diagonal().array() += sigma2;
  const VecC expect = r.llt().solve(x);
  CHECK((cov.solve(x) - expect).norm() < 1e-10 * expect.norm());
}

TEST_CASE("scaling noise with A = 0 shifts logdet by n log c") {
  Rng rng(4);
  const int n = 16;
  const MatC h = random_complex(rng, n, 1);
  const LowRankCovariance a(h, MatC::Zero(1, 1), 1.0);
  const LowRankCovariance b(h, MatC::Zero(1, 1), 3.5);
  CHECK(b.logdet() - a.logdet() == doctest::Approx(n * std::log(3.5)).epsilon(1e-12));
}

TEST_CASE("orthogonal projector annihilates range(H) and fixes its complement") {
  Rng rng(5);
  const int n = 20, q = 3;
  const MatC h = random_complex(rng, n, q);
  const OrthProjector proj(h);

  const VecC in_range = h * random_complex(rng, q, 1);
  CHECK(proj.apply(in_range).norm() < 1e-10 * in_range.norm());

  VecC x = random_complex(rng, n, 1);
  const VecC perp = proj.apply(x);  // orthogonal to range(H) by construction
  CHECK((proj.apply(perp) - perp).norm() < 1e-10 * perp.norm());  // idempotent
  CHECK((h.adjoint() * perp).norm() < 1e-10 * x.norm());
}

TEST_CASE("rank-deficient H is refused with a condition estimate") {
  Rng rng(6);
  const int n = 10;
  MatC h(n, 2);
  h.col(0) = random_complex(rng, n, 1);
  h.col(1) = 2.0 * h.col(0);
  CHECK_THROWS_AS(OrthProjector{h}, NumericalFailure);
}

TEST_CASE("schur complement of a block-diagonal matrix returns the leading block") {
  Rng rng(7);
  Mat f = Mat::Zero(6, 6);
  f.topLeftCorner(2, 2) = random_real_psd(rng, 2);
  f.bottomRightCorner(4, 4) = random_real_psd(rng, 4);
  const SchurResult s = schur_complement(f, 2);
  CHECK(!s.used_pseudoinverse);
  CHECK((s.value - f.topLeftCorner(2, 2)).norm() < 1e-12);
}

TEST_CASE("2x2 scalar schur complement is a - b^2/d") {
  Mat f(2, 2);
  f << 4.0, 1.5, 1.5, 2.0;
  const SchurResult s = schur_complement(f, 1);
  CHECK(s.value(0, 0) == doctest::Approx(4.0 - 1.5 * 1.5 / 2.0).epsilon(1e-14));
}

TEST_CASE("inverse of the schur complement equals the leading block of the inverse") {
  Rng rng(8);
  const Mat f = random_real_psd(rng, 8);
  const SchurResult s = schur_complement(f, 3);
  const Mat finv = f.inverse();
  const Mat lead = finv.topLeftCorner(3, 3);
  CHECK((s.value.inverse() - lead).norm() < 1e-9 * lead.norm());
}

TEST_CASE("singular trailing block falls back to the pseudo-inverse") {
  Mat f = Mat::Zero(3, 3);
  f(0, 0) = 2.0;
  f(0, 1) = 1.0;
  f(1, 0) = 1.0;
  f(1, 1) = 1.0;  // trailing block has a zero row/column
  const SchurResult s = schur_complement(f, 1);
  CHECK(s.used_pseudoinverse);
  CHECK(s.value(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("finite differences: exact for linear maps, 2x for the square") {
  Mat a(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  const auto linear = [&](const Vec& x) -> VecC { return (a * x).cast<cxd>(); };
  const Vec x0 = Vec::Constant(2, 0.3);
  const MatC jac = finite_difference_jacobian(linear, x0, Vec::Constant(2, 0.05));
  CHECK((jac.real() - a).norm() < 1e-10);

  const auto square = [](const Vec& x) -> VecC {
    VecC out(1);
    out(0) = x(0) * x(0);
    return out;
  };
  const MatC j2 = finite_difference_jacobian(square, Vec::Constant(1, 1.0), Vec::Constant(1, 1e-4));
  CHECK(std::abs(j2(0, 0).real() - 2.0) < 1e-7);
}

TEST_CASE("finite differences match the analytic chirp phase derivative") {
  const double rate = 2.0 * std::numbers::pi * 0.17;
  const auto f = [&](const Vec& x) -> VecC {
    VecC out(1);
    out(0) = std::exp(cxd(0.0, rate * x(0) * x(0)));
    return out;
  };
  const double t0 = 0.83;
  const cxd expect = cxd(0.0, 2.0 * rate * t0) * std::exp(cxd(0.0, rate * t0 * t0));
  const MatC jac = finite_difference_jacobian(f, Vec::Constant(1, t0), Vec::Constant(1, 1e-5));
  CHECK(std::abs(jac(0, 0) - expect) < 1e-8);
}

TEST_CASE("vec and trace identities hold on random matrices") {
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng.raw() % 3);
    const MatC a = random_complex(rng, n, n);
    const MatC b = random_complex(rng, n, n);
    const MatC c = random_complex(rng, n, n);
    // Tr{AB} = (vec(A^H))^H vec(B)
    const cxd lhs = (a * b).trace();
    const cxd rhs = vec_of(a.adjoint()).dot(vec_of(b));
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs) + 1e-12);
    // vec(ABC) = (C^T kron A) vec(B)
    const VecC v1 = vec_of(a * b * c);
    const VecC v2 = kron(c.transpose(), a) * vec_of(b);
    CHECK((v1 - v2).norm() < 1e-12 * v1.norm() + 1e-12);
  }
}

TEST_CASE("quadratic form mean and variance match the closed forms") {
  Rng rng(10);
  const int n = 3;
  const MatC amat = random_psd(rng, n);
  const MatC sigma = random_psd(rng, n);
  const MatC sqrt_sigma = psd_sqrt(sigma);
  const VecC mu = random_complex(rng, n, 1);

  const double expect_mean = ((amat * sigma).trace() + mu.dot(amat * mu)).real();
  const double expect_var =
      ((amat * sigma * amat * sigma).trace() + 2.0 * mu.dot(amat * sigma * amat * mu)).real();

  const int batches = 100, per_batch = 1000;
  Vec batch_mean(batches), batch_var(batches);
  for (int b = 0; b < batches; ++b) {
    double s1 = 0.0, s2 = 0.0;
    for (int t = 0; t < per_batch; ++t) {
      const VecC x = mu + sample_cn(rng, sqrt_sigma);
      const double v = x.dot(amat * x).real();
      s1 += v;
      s2 += v * v;
    }
    batch_mean(b) = s1 / per_batch;
    batch_var(b) = (s2 - s1 * s1 / per_batch) / (per_batch - 1);
  }
  const double mean_of_means = batch_mean.mean();
  const double se_mean = std::sqrt((batch_mean.array() - mean_of_means).square().sum() /
                                   (batches - 1) / batches);
  CHECK(std::abs(mean_of_means - expect_mean) < 5.0 * se_mean);

  const double mean_of_vars = batch_var.mean();
  const double se_var =
      std::sqrt((batch_var.array() - mean_of_vars).square().sum() / (batches - 1) / batches);
  CHECK(std::abs(mean_of_vars - expect_var) < 5.0 * se_var);
}

TEST_CASE("trace and Von Neumann inequalities hold on random samples") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.raw() % 4);
    const MatC a = random_psd(rng, n);
    const MatC b = random_psd(rng, n);
    const double tab = (a * b).trace().real();
    CHECK(tab <= a.trace().real() * b.trace().real() + 1e-12);

    const MatC c = random_complex(rng, n, n);
    const MatC d = random_complex(rng, n, n);
    Eigen::JacobiSVD<MatC> svd_c(c), svd_d(d);
    const Vec sc = svd_c.singularValues();
    const Vec sd = svd_d.singularValues();
    const double bound = sc.cwiseProduct(sd).sum();
    CHECK(std::abs((c * d).trace()) <= bound * (1.0 + 1e-12) + 1e-12);
    CHECK(bound <= n * sc(0) * sd(0) * (1.0 + 1e-12));
  }
}

TEST_CASE("lndet B + Tr{B^-1 A} >= n + lndet A with equality at B = A") {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.raw() % 3);
    const MatC a = random_psd(rng, n);
    const MatC b = random_psd(rng, n);
    const auto lndet = [](const MatC& m) {
      return std::log(std::abs(Eigen::FullPivLU<MatC>(m).determinant()));
    };
    const double lhs = lndet(b) + (b.inverse() * a).trace().real();
    const double rhs = n + lndet(a);
    CHECK(lhs >= rhs - 1e-9);
    const double eq = lndet(a) + (a.inverse() * a).trace().real();
    CHECK(std::abs(eq - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("information inversion refuses ill-conditioned matrices") {
  Mat info = Mat::Identity(3, 3);
  info(2, 2) = 1e-14;
  CHECK_THROWS_AS(invert_information(info), NumericalFailure);
  info(2, 2) = 0.5;
  const InformationInverse inv = invert_information(info);
  CHECK(inv.condition == doctest::Approx(2.0));
  CHECK((inv.inverse * info - Mat::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("psd_sqrt clips slight negatives and rejects indefinite input") {
  Rng rng(13);
  const MatC a = random_psd(rng, 3);
  const MatC s = psd_sqrt(a);
  CHECK((s * s.adjoint() - a).norm() < 1e-10 * a.norm());

  MatC bad = MatC::Identity(2, 2);
  bad(1, 1) = -0.5;
  CHECK_THROWS_AS(psd_sqrt(bad), NumericalFailure);
}
