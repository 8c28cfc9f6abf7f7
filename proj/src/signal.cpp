#include "radarest/signal.hpp"

#include <cmath>
#include <numbers>

#include "radarest/errors.hpp"
#include "radarest/numkit.hpp"
#include "radarest/rng.hpp"

namespace radarest {

namespace {
constexpr std::complex<double> kJ{0.0, 1.0};

Eigen::VectorXcd ula_response(int count, double spacing, double bearing) {
  Eigen::VectorXcd a(count);
  const double phase_step = 2.0 * std::numbers::pi * spacing * std::sin(bearing);
  const double mid = 0.5 * (count - 1);
  for (int m = 0; m < count; ++m) a(m) = std::exp(kJ * (phase_step * (m - mid)));
  return a;
}
}  // namespace

Eigen::VectorXcd rx_steering(const ArraySpec& array, double bearing) {
  return ula_response(array.element_count, array.element_spacing, bearing);
}

Eigen::VectorXcd tx_steering(const ArraySpec& array, double bearing) {
  return ula_response(array.element_count, array.element_spacing, bearing);
}

Eigen::VectorXcd ula_steering_dbearing(const ArraySpec& array, double bearing) {
  Eigen::VectorXcd a = ula_response(array.element_count, array.element_spacing, bearing);
  const double rate = 2.0 * std::numbers::pi * array.element_spacing * std::cos(bearing);
  const double mid = 0.5 * (array.element_count - 1);
  for (int m = 0; m < array.element_count; ++m) a(m) *= kJ * (rate * (m - mid));
  return a;
}

std::complex<double> tx_beam_gain(const ArraySpec& array, double bearing) {
  if (array.element_count == 1) return 1.0;
  const Eigen::VectorXcd w =
      tx_steering(array, array.steer_bearing) / std::sqrt(double(array.element_count));
  return w.dot(tx_steering(array, bearing));
}

std::complex<double> tx_beam_gain_dbearing(const ArraySpec& array, double bearing) {
  if (array.element_count == 1) return 0.0;
  const Eigen::VectorXcd w =
      tx_steering(array, array.steer_bearing) / std::sqrt(double(array.element_count));
  return w.dot(ula_steering_dbearing(array, bearing));
}

Eigen::VectorXcd spatio_temporal_steering(const Scenario& scenario, const LfmWaveformSet& set,
                                          int k, int q, int l) {
  const PathGeometry g = path_geometry(scenario, k, q, l);
  const Eigen::VectorXcd a_r = rx_steering(scenario.rx_arrays[l], g.rx_bearing);
  const std::complex<double> gain = tx_beam_gain(scenario.tx_arrays[k], g.tx_bearing);
  const Eigen::VectorXcd b = temporal_steering(set, scenario, k, g).values;
  const int n = scenario.samples;
  Eigen::VectorXcd h(a_r.size() * n);
  for (Eigen::Index m = 0; m < a_r.size(); ++m)
    h.segment(m * n, n) = (g.path_loss * gain * a_r(m)) * b;
  return h;
}

SteeringMatrix build_H(const Scenario& scenario, const LfmWaveformSet& set, int k, int l) {
  SteeringMatrix out;
  out.k = k;
  out.l = l;
  const int q_count = scenario.num_targets();
  out.columns.resize(scenario.snapshot_dim(l), q_count);
  for (int q = 0; q < q_count; ++q)
    out.columns.col(q) = spatio_temporal_steering(scenario, set, k, q, l);
  return out;
}

ReflectivityModel ReflectivityModel::diagonal(ReflectivityMode mode, int q,
                                              double sigma_alpha_sq) {
  ReflectivityModel model;
  model.mode = mode;
  model.covariance = sigma_alpha_sq * Eigen::MatrixXcd::Identity(q, q);
  return model;
}

SnapshotSet synthesize(const Scenario& scenario, const LfmWaveformSet& set,
                       const ReflectivityModel& model, std::uint64_t seed) {
  const int q_count = scenario.num_targets();
  if (model.mode == ReflectivityMode::stochastic) {
    if (model.covariance.rows() != q_count || model.covariance.cols() != q_count)
      throw std::invalid_argument("synthesize: covariance size does not match target count");
  } else if (model.fixed_values.size() != static_cast<std::size_t>(scenario.path_count())) {
    throw std::invalid_argument("synthesize: deterministic mode needs fixed_values per path");
  }

  SnapshotSet out;
  out.m_t = scenario.num_tx();
  out.m_r = scenario.num_rx();
  out.noise_power = scenario.noise_power;
  out.paths.resize(scenario.path_count());
  out.alphas.resize(scenario.path_count());

  Eigen::MatrixXcd sqrt_cov;
  if (model.mode == ReflectivityMode::stochastic) sqrt_cov = psd_sqrt(model.covariance);
  const double noise_std = std::sqrt(scenario.noise_power);

  for (int k = 0; k < scenario.num_tx(); ++k) {
    for (int l = 0; l < scenario.num_rx(); ++l) {
      const int p = scenario.path_index(k, l);
      Eigen::VectorXcd alpha;
      if (model.mode == ReflectivityMode::stochastic) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(p), 1}));
        alpha = sample_cn(rng, sqrt_cov);
      } else {
        alpha = model.fixed_values[p];
        if (alpha.size() != q_count)
          throw std::invalid_argument("synthesize: fixed alpha size does not match target count");
      }
      const SteeringMatrix h = build_H(scenario, set, k, l);
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(p), 2}));
      Eigen::VectorXcd r = h.columns * alpha;
      for (Eigen::Index i = 0; i < r.size(); ++i) r(i) += noise_std * rng.cnormal();
      out.paths[p] = std::move(r);
      out.alphas[p] = std::move(alpha);
    }
  }
  return out;
}

double calibrate_noise(const Scenario& scenario, const ReflectivityModel& model,
                       double target_snr_linear) {
  if (!(target_snr_linear > 0.0))
    throw std::invalid_argument("calibrate_noise: target SNR must be positive");
  const int q_count = scenario.num_targets();
  Eigen::VectorXd var_q(q_count);
  if (model.mode == ReflectivityMode::stochastic || model.fixed_values.empty()) {
    if (model.covariance.rows() != q_count)
      throw std::invalid_argument("calibrate_noise: covariance size does not match target count");
    var_q = model.covariance.diagonal().real();
  } else {
    var_q.setZero();
    for (const auto& alpha : model.fixed_values) var_q += alpha.cwiseAbs2();
    var_q /= static_cast<double>(model.fixed_values.size());
  }

  double acc = 0.0;
  for (int k = 0; k < scenario.num_tx(); ++k)
    for (int l = 0; l < scenario.num_rx(); ++l)
      for (int q = 0; q < q_count; ++q) {
        const PathGeometry g = path_geometry(scenario, k, q, l);
        acc += scenario.total_energy * var_q(q) * g.path_loss * g.path_loss;
      }
  acc /= static_cast<double>(scenario.path_count() * q_count);
  if (!(acc > 0.0)) throw std::invalid_argument("calibrate_noise: scenario has zero path gain");
  return acc / target_snr_linear;
}

}  // namespace radarest
