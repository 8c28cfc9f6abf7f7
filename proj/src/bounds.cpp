#include "radarest/bounds.hpp"

#include <cmath>
#include <sstream>

#include "radarest/errors.hpp"
#include "radarest/numkit.hpp"
#include "radarest/rng.hpp"

namespace radarest {

namespace {

constexpr std::complex<double> kJ{0.0, 1.0};

/// Partials of (delay, tx bearing, rx bearing, Doppler, loss) with respect to
/// the components of psi^q. Rows: the five geometric channels; columns: p.
struct GeoPartials {
  Eigen::VectorXd ddelay, dtheta_t, dtheta_r, ddoppler, dzeta;
};

GeoPartials geometric_partials(const Scenario& sc, int k, int q, int l, int P) {
  const Eigen::Vector2d to_tx = sc.tx_arrays[k].center - sc.targets[q].position;
  const Eigen::Vector2d to_rx = sc.rx_arrays[l].center - sc.targets[q].position;
  const double rt = to_tx.norm();
  const double rr = to_rx.norm();
  if (rt < 1e-9 || rr < 1e-9)
    throw DegenerateGeometry("geometric_partials: target coincides with an array center");
  const double phi_t = std::atan2(to_tx.y(), to_tx.x());
  const double phi_r = std::atan2(to_rx.y(), to_rx.x());
  const double ct = std::cos(phi_t), st = std::sin(phi_t);
  const double cr = std::cos(phi_r), sr = std::sin(phi_r);
  const double c = sc.wave_speed;
  const double dt = sc.sample_interval_s;
  const double sum = rt + rr;

  GeoPartials g;
  g.ddelay = Eigen::VectorXd::Zero(P);
  g.dtheta_t = Eigen::VectorXd::Zero(P);
  g.dtheta_r = Eigen::VectorXd::Zero(P);
  g.ddoppler = Eigen::VectorXd::Zero(P);
  g.dzeta = Eigen::VectorXd::Zero(P);

  // d(R_t + R_r)/d(x, y)
  const double dsum_dx = -(ct + cr);
  const double dsum_dy = -(st + sr);
  g.ddelay(0) = dsum_dx / (c * dt);
  g.ddelay(1) = dsum_dy / (c * dt);
  g.dzeta(0) = -2.0 * dsum_dx / (sum * sum * sum);
  g.dzeta(1) = -2.0 * dsum_dy / (sum * sum * sum);
  // Bearings move with the target-to-array direction.
  g.dtheta_t(0) = to_tx.y() / (rt * rt);
  g.dtheta_t(1) = -to_tx.x() / (rt * rt);
  g.dtheta_r(0) = to_rx.y() / (rr * rr);
  g.dtheta_r(1) = -to_rx.x() / (rr * rr);
  // Doppler depends on position through the phi angles and on velocity
  // directly.
  const double vx = sc.targets[q].velocity.x();
  const double vy = sc.targets[q].velocity.y();
  const double scale = sc.carrier_rad() * dt / c;
  const double dphit_dx = st / rt, dphit_dy = -ct / rt;
  const double dphir_dx = sr / rr, dphir_dy = -cr / rr;
  g.ddoppler(0) = scale * (vx * (-st * dphit_dx - sr * dphir_dx) +
                           vy * (ct * dphit_dx + cr * dphir_dx));
  g.ddoppler(1) = scale * (vx * (-st * dphit_dy - sr * dphir_dy) +
                           vy * (ct * dphit_dy + cr * dphir_dy));
  if (P >= 4) {
    g.ddoppler(2) = scale * (ct + cr);
    g.ddoppler(3) = scale * (st + sr);
  }
  return g;
}

/// The five channel vectors dh/d{n, theta_t, theta_r, omega, zeta} for one
/// (k, q, l) triple, from which every d_kl^{qp} is a linear combination.
struct SteeringChannels {
  Eigen::VectorXcd dh_ddelay, dh_dtheta_t, dh_dtheta_r, dh_ddoppler, dh_dzeta;
};

SteeringChannels steering_channels(const Scenario& sc, const LfmWaveformSet& set, int k, int l,
                                   const PathGeometry& g) {
  const ArraySpec& tx = sc.tx_arrays[k];
  const ArraySpec& rx = sc.rx_arrays[l];
  const Eigen::VectorXcd a_r = rx_steering(rx, g.rx_bearing);
  const Eigen::VectorXcd da_r = ula_steering_dbearing(rx, g.rx_bearing);
  const std::complex<double> gain = tx_beam_gain(tx, g.tx_bearing);
  const std::complex<double> dgain = tx_beam_gain_dbearing(tx, g.tx_bearing);
  const Eigen::VectorXcd b = temporal_steering(set, sc, k, g).values;
  const Eigen::VectorXcd db_dn = temporal_steering_ddelay(set, sc, k, g);
  const Eigen::VectorXcd db_dw = temporal_steering_ddoppler(set, sc, k, g);

  const int n = sc.samples;
  const Eigen::Index lr = a_r.size();
  SteeringChannels ch;
  ch.dh_ddelay.resize(lr * n);
  ch.dh_dtheta_t.resize(lr * n);
  ch.dh_dtheta_r.resize(lr * n);
  ch.dh_ddoppler.resize(lr * n);
  ch.dh_dzeta.resize(lr * n);
  for (Eigen::Index m = 0; m < lr; ++m) {
    ch.dh_ddelay.segment(m * n, n) = (g.path_loss * gain * a_r(m)) * db_dn;
    ch.dh_dtheta_t.segment(m * n, n) = (g.path_loss * dgain * a_r(m)) * b;
    ch.dh_dtheta_r.segment(m * n, n) = (g.path_loss * gain * da_r(m)) * b;
    ch.dh_ddoppler.segment(m * n, n) = (g.path_loss * gain * a_r(m)) * db_dw;
    ch.dh_dzeta.segment(m * n, n) = (gain * a_r(m)) * b;
  }
  return ch;
}

void check_dense_guard(const Scenario& sc) {
  for (int l = 0; l < sc.num_rx(); ++l) {
    if (sc.snapshot_dim(l) > 64) {
      std::ostringstream msg;
      msg << "dense FIM oracle restricted to L_r N <= 64, got " << sc.snapshot_dim(l);
      throw NumericalFailure(msg.str());
    }
  }
}

BoundResult bound_from_information(const Eigen::MatrixXd& info) {
  const InformationInverse inv = invert_information(info);
  BoundResult out;
  out.matrix = inv.inverse;
  out.per_param_variance = inv.inverse.diagonal();
  out.conditioning = inv.condition;
  return out;
}

}  // namespace

Eigen::VectorXcd steering_derivative(const Scenario& scenario, const LfmWaveformSet& set, int k,
                                     int q, int l, int component, int params_per_target) {
  const PathGeometry g = path_geometry(scenario, k, q, l);
  const SteeringChannels ch = steering_channels(scenario, set, k, l, g);
  const GeoPartials gp = geometric_partials(scenario, k, q, l, params_per_target);
  const int p = component;
  return ch.dh_ddelay * gp.ddelay(p) + ch.dh_dtheta_t * gp.dtheta_t(p) +
         ch.dh_dtheta_r * gp.dtheta_r(p) + ch.dh_ddoppler * gp.ddoppler(p) +
         ch.dh_dzeta * gp.dzeta(p);
}

Eigen::MatrixXcd steering_derivatives_all(const Scenario& scenario, const LfmWaveformSet& set,
                                          int k, int l, int params_per_target) {
  const int P = params_per_target;
  const int q_count = scenario.num_targets();
  Eigen::MatrixXcd d(scenario.snapshot_dim(l), P * q_count);
  for (int q = 0; q < q_count; ++q) {
    const PathGeometry g = path_geometry(scenario, k, q, l);
    const SteeringChannels ch = steering_channels(scenario, set, k, l, g);
    const GeoPartials gp = geometric_partials(scenario, k, q, l, P);
    for (int p = 0; p < P; ++p) {
      d.col(q * P + p) = ch.dh_ddelay * gp.ddelay(p) + ch.dh_dtheta_t * gp.dtheta_t(p) +
                         ch.dh_dtheta_r * gp.dtheta_r(p) + ch.dh_ddoppler * gp.ddoppler(p) +
                         ch.dh_dzeta * gp.dzeta(p);
    }
  }
  return d;
}

BoundResult stochastic_crlb(const Scenario& scenario, const LfmWaveformSet& set,
                            const Eigen::MatrixXcd& a_cov, double sigma2,
                            int params_per_target) {
  const int P = params_per_target;
  const int Q = scenario.num_targets();
  const int pq = P * Q;
  const int nu = Q * Q + 1;

  Eigen::MatrixXd s_psipsi = Eigen::MatrixXd::Zero(pq, pq);
  Eigen::MatrixXcd s_psinu = Eigen::MatrixXcd::Zero(pq, nu);
  Eigen::MatrixXcd s_nunu = Eigen::MatrixXcd::Zero(nu, nu);

  for (int k = 0; k < scenario.num_tx(); ++k) {
    for (int l = 0; l < scenario.num_rx(); ++l) {
      const Eigen::MatrixXcd h = build_H(scenario, set, k, l).columns;
      const Eigen::MatrixXcd d = steering_derivatives_all(scenario, set, k, l, P);
      const Eigen::MatrixXcd u = h * a_cov;  // columns H c^q
      const LowRankCovariance cov(h, a_cov, sigma2);

      const Eigen::MatrixXcd xh = cov.solve(h);
      const Eigen::MatrixXcd xd = cov.solve(d);
      const Eigen::MatrixXcd xu = cov.solve(u);

      const Eigen::MatrixXcd kmat = h.adjoint() * xh;   // H^H R^-1 H
      const Eigen::MatrixXcd k2 = xh.adjoint() * xh;    // H^H R^-2 H
      const Eigen::MatrixXcd hu = h.adjoint() * xu;     // h_i^H R^-1 u_q
      const Eigen::MatrixXcd hd = h.adjoint() * xd;     // h_i^H R^-1 d_m
      const Eigen::MatrixXcd du = d.adjoint() * xu;     // d_m^H R^-1 u_q
      const Eigen::MatrixXcd dd = d.adjoint() * xd;     // d_m^H R^-1 d_m'
      const Eigen::MatrixXcd uu = u.adjoint() * xu;     // u_q^H R^-1 u_q'
      const Eigen::MatrixXcd d2u = xd.adjoint() * xu;   // d_m^H R^-2 u_q
      const double tr2 = cov.trace_inverse_squared();

      // psi-psi Gram block: Tr{S_m R^-1 S_m' R^-1} with
      // S_m = u_q d_m^H + d_m u_q^H.
      for (int m = 0; m < pq; ++m) {
        const int q = m / P;
        for (int mp = 0; mp < pq; ++mp) {
          const int qp = mp / P;
          const std::complex<double> t1 = du(m, qp) * du(mp, q);
          const std::complex<double> t2 = dd(m, mp) * uu(qp, q);
          s_psipsi(m, mp) += 2.0 * (t1.real() + t2.real());
        }
      }

      // psi-nu block: conj(F_col^H G_m); rho column (i, j) sits at j Q + i.
      for (int m = 0; m < pq; ++m) {
        const int q = m / P;
        for (int i = 0; i < Q; ++i) {
          for (int j = 0; j < Q; ++j) {
            const std::complex<double> fg =
                hu(i, q) * std::conj(hd(j, m)) + hd(i, m) * std::conj(hu(j, q));
            s_psinu(m, j * Q + i) += std::conj(fg);
          }
        }
        s_psinu(m, nu - 1) += 2.0 * d2u(m, q).real();
      }

      // nu-nu block.
      for (int i = 0; i < Q; ++i)
        for (int j = 0; j < Q; ++j) {
          for (int ip = 0; ip < Q; ++ip)
            for (int jp = 0; jp < Q; ++jp)
              s_nunu(j * Q + i, jp * Q + ip) += kmat(i, ip) * kmat(jp, j);
          s_nunu(j * Q + i, nu - 1) += k2(i, j);
          s_nunu(nu - 1, j * Q + i) += std::conj(k2(i, j));
        }
      s_nunu(nu - 1, nu - 1) += tr2;
    }
  }

  Eigen::LDLT<Eigen::MatrixXcd> nunu(s_nunu);
  if (nunu.info() != Eigen::Success)
    throw NumericalFailure("stochastic_crlb: nuisance information block is singular");
  const Eigen::MatrixXcd correction = s_psinu * nunu.solve(s_psinu.adjoint());
  Eigen::MatrixXd info = s_psipsi - correction.real();
  info = 0.5 * (info + info.transpose()).eval();
  return bound_from_information(info);
}

std::vector<Eigen::MatrixXcd> hermitian_basis(int q) {
  std::vector<Eigen::MatrixXcd> basis;
  basis.reserve(q * q);
  for (int i = 0; i < q; ++i) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(q, q);
    b(i, i) = 1.0;
    basis.push_back(b);
  }
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      Eigen::MatrixXcd re = Eigen::MatrixXcd::Zero(q, q);
      re(i, j) = 1.0;
      re(j, i) = 1.0;
      basis.push_back(re);
      Eigen::MatrixXcd im = Eigen::MatrixXcd::Zero(q, q);
      im(i, j) = kJ;
      im(j, i) = -kJ;
      basis.push_back(im);
    }
  return basis;
}

Eigen::MatrixXd stochastic_fim_full(
    const Scenario& scenario, const LfmWaveformSet& set, const Eigen::MatrixXcd& a_cov,
    double sigma2, int params_per_target,
    const std::optional<std::vector<Eigen::MatrixXcd>>& rho_basis) {
  check_dense_guard(scenario);
  const int P = params_per_target;
  const int Q = scenario.num_targets();
  const int pq = P * Q;
  const std::vector<Eigen::MatrixXcd> basis = rho_basis ? *rho_basis : hermitian_basis(Q);
  const int nparam = pq + static_cast<int>(basis.size()) + 1;

  Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(nparam, nparam);
  for (int k = 0; k < scenario.num_tx(); ++k) {
    for (int l = 0; l < scenario.num_rx(); ++l) {
      const Eigen::MatrixXcd h = build_H(scenario, set, k, l).columns;
      const Eigen::MatrixXcd d = steering_derivatives_all(scenario, set, k, l, P);
      const Eigen::MatrixXcd u = h * a_cov;
      const Eigen::Index n = h.rows();
      Eigen::MatrixXcd r = h * a_cov * h.adjoint();
      r.diagonal().array() += sigma2;
      const Eigen::LLT<Eigen::MatrixXcd> llt(r);
      if (llt.info() != Eigen::Success)
        throw NumericalFailure("stochastic_fim_full: covariance not positive definite");

      std::vector<Eigen::MatrixXcd> w;  // R^-1 dR/dgamma_i
      w.reserve(nparam);
      for (int m = 0; m < pq; ++m) {
        const int q = m / P;
        const Eigen::MatrixXcd s =
            u.col(q) * d.col(m).adjoint() + d.col(m) * u.col(q).adjoint();
        w.push_back(llt.solve(s));
      }
      for (const auto& b : basis) w.push_back(llt.solve(h * b * h.adjoint()));
      w.push_back(llt.solve(Eigen::MatrixXcd::Identity(n, n)));

      for (int i = 0; i < nparam; ++i)
        for (int j = i; j < nparam; ++j) {
          const double v = (w[i] * w[j]).trace().real();
          fim(i, j) += v;
          if (i != j) fim(j, i) += v;
        }
    }
  }
  return fim;
}

BoundResult deterministic_crlb(const Scenario& scenario, const LfmWaveformSet& set,
                               const std::vector<Eigen::VectorXcd>& alphas, double sigma2,
                               int params_per_target) {
  const int P = params_per_target;
  const int Q = scenario.num_targets();
  const int pq = P * Q;
  if (alphas.size() != static_cast<std::size_t>(scenario.path_count()))
    throw std::invalid_argument("deterministic_crlb: one alpha vector per path required");

  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(pq, pq);
  for (int k = 0; k < scenario.num_tx(); ++k) {
    for (int l = 0; l < scenario.num_rx(); ++l) {
      const Eigen::MatrixXcd h = build_H(scenario, set, k, l).columns;
      const Eigen::MatrixXcd d = steering_derivatives_all(scenario, set, k, l, P);
      const OrthProjector proj(h);
      const Eigen::MatrixXcd w = d.adjoint() * proj.apply(d);
      const Eigen::VectorXcd& alpha = alphas[scenario.path_index(k, l)];
      for (int m = 0; m < pq; ++m) {
        const int q = m / P;
        for (int mp = 0; mp < pq; ++mp) {
          const int qp = mp / P;
          info(m, mp) +=
              2.0 / sigma2 * std::real(w(m, mp) * alpha(qp) * std::conj(alpha(q)));
        }
      }
    }
  }
  return bound_from_information(info);
}

Eigen::MatrixXd deterministic_fim_full(const Scenario& scenario, const LfmWaveformSet& set,
                                       const std::vector<Eigen::VectorXcd>& alphas, double sigma2,
                                       int params_per_target) {
  const int P = params_per_target;
  const int Q = scenario.num_targets();
  const int pq = P * Q;
  const int paths = scenario.path_count();
  const int nparam = pq + 2 * Q * paths + 1;
  if (alphas.size() != static_cast<std::size_t>(paths))
    throw std::invalid_argument("deterministic_fim_full: one alpha vector per path required");

  Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(nparam, nparam);
  const double pref = 2.0 / sigma2;
  for (int k = 0; k < scenario.num_tx(); ++k) {
    for (int l = 0; l < scenario.num_rx(); ++l) {
      const int path = scenario.path_index(k, l);
      const Eigen::MatrixXcd h = build_H(scenario, set, k, l).columns;
      const Eigen::MatrixXcd d = steering_derivatives_all(scenario, set, k, l, P);
      const Eigen::VectorXcd& alpha = alphas[path];

      // d mu / d psi = D P with P = diag(alpha kron 1_P).
      Eigen::VectorXcd pdiag(pq);
      for (int m = 0; m < pq; ++m) pdiag(m) = alpha(m / P);
      const Eigen::MatrixXcd dp = d * pdiag.asDiagonal();

      const Eigen::MatrixXcd dhd = dp.adjoint() * dp;
      fim.topLeftCorner(pq, pq) += pref * dhd.real();

      const Eigen::MatrixXcd dh_h = dp.adjoint() * h;
      const int col0 = pq + 2 * Q * path;
      fim.block(0, col0, pq, Q) += pref * dh_h.real();
      fim.block(0, col0 + Q, pq, Q) += -pref * dh_h.imag();
      fim.block(col0, 0, Q, pq) += pref * dh_h.real().transpose();
      fim.block(col0 + Q, 0, Q, pq) += -pref * dh_h.imag().transpose();

      const Eigen::MatrixXcd hh = h.adjoint() * h;
      fim.block(col0, col0, Q, Q) = pref * hh.real();
      fim.block(col0, col0 + Q, Q, Q) = -pref * hh.imag();
      fim.block(col0 + Q, col0, Q, Q) = pref * hh.imag();
      fim.block(col0 + Q, col0 + Q, Q, Q) = pref * hh.real();

      fim(nparam - 1, nparam - 1) += static_cast<double>(h.rows()) / (sigma2 * sigma2);
    }
  }
  return fim;
}

BoundResult emcb(const Scenario& scenario, const LfmWaveformSet& set,
                 const Eigen::MatrixXcd& a_cov, double sigma2, int trials, std::uint64_t seed,
                 int params_per_target) {
  if (trials < 1) throw std::invalid_argument("emcb: trials must be >= 1");
  const int P = params_per_target;
  const int Q = scenario.num_targets();
  const int pq = P * Q;
  const int paths = scenario.path_count();
  const Eigen::MatrixXcd sqrt_cov = psd_sqrt(a_cov);

  // The projected Gram D^H Pi_perp D does not depend on alpha; only the
  // Hadamard mask changes per draw.
  std::vector<Eigen::MatrixXcd> w_path;
  w_path.reserve(paths);
  for (int k = 0; k < scenario.num_tx(); ++k)
    for (int l = 0; l < scenario.num_rx(); ++l) {
      const Eigen::MatrixXcd h = build_H(scenario, set, k, l).columns;
      const Eigen::MatrixXcd d = steering_derivatives_all(scenario, set, k, l, P);
      const OrthProjector proj(h);
      w_path.push_back(d.adjoint() * proj.apply(d));
    }

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(pq, pq);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(pq, pq);
  int accepted = 0;
  int rejected = 0;
  double worst_condition = 0.0;

  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(pq, pq);
    for (int path = 0; path < paths; ++path) {
      Rng rng(derive_seed(seed, {2001, static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(path)}));
      const Eigen::VectorXcd alpha = sample_cn(rng, sqrt_cov);
      const Eigen::MatrixXcd& w = w_path[path];
      for (int m = 0; m < pq; ++m) {
        const int q = m / P;
        for (int mp = 0; mp < pq; ++mp) {
          const int qp = mp / P;
          info(m, mp) +=
              2.0 / sigma2 * std::real(w(m, mp) * alpha(qp) * std::conj(alpha(q)));
        }
      }
    }
    try {
      const InformationInverse inv = invert_information(info);
      ++accepted;
      worst_condition = std::max(worst_condition, inv.condition);
      const Eigen::MatrixXd delta = inv.inverse - mean;
      mean += delta / static_cast<double>(accepted);
      m2 += delta.cwiseProduct(inv.inverse - mean);
    } catch (const NumericalFailure&) {
      ++rejected;
    }
  }

  if (rejected > 0 && rejected > trials / 100) {
    std::ostringstream msg;
    msg << "emcb: " << rejected << " of " << trials << " draws rejected (> 1%)";
    throw NumericalFailure(msg.str());
  }
  BoundResult out;
  out.matrix = mean;
  out.per_param_variance = mean.diagonal();
  out.conditioning = worst_condition;
  out.trials = accepted;
  out.rejected_draws = rejected;
  if (accepted > 1)
    out.standard_error =
        (m2 / (static_cast<double>(accepted) * (accepted - 1))).cwiseSqrt();
  else
    out.standard_error = Eigen::MatrixXd::Zero(pq, pq);
  return out;
}

}  // namespace radarest
