#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "radarest/scenario.hpp"
#include "radarest/waveform.hpp"

namespace radarest {

/// ULA response, entry m = exp(j 2 pi d (m - (L-1)/2) sin(bearing)).
Eigen::VectorXcd rx_steering(const ArraySpec& array, double bearing);
Eigen::VectorXcd tx_steering(const ArraySpec& array, double bearing);
/// d/d(bearing) of the ULA response.
Eigen::VectorXcd ula_steering_dbearing(const ArraySpec& array, double bearing);

/// w_k^H a_tk(bearing) with w_k the unit-norm conventional beamformer steered
/// to the array's steer_bearing; scalar 1 for a single-element transmitter.
std::complex<double> tx_beam_gain(const ArraySpec& array, double bearing);
std::complex<double> tx_beam_gain_dbearing(const ArraySpec& array, double bearing);

/// h_kl^q = zeta a_rl kron ((w^H a_tk) b_kl).
Eigen::VectorXcd spatio_temporal_steering(const Scenario& scenario, const LfmWaveformSet& set,
                                          int k, int q, int l);

struct SteeringMatrix {
  Eigen::MatrixXcd columns;  // (L_r N) x Q
  int k = 0;
  int l = 0;
};

SteeringMatrix build_H(const Scenario& scenario, const LfmWaveformSet& set, int k, int l);

enum class ReflectivityMode { stochastic, deterministic };

struct ReflectivityModel {
  ReflectivityMode mode = ReflectivityMode::stochastic;
  Eigen::MatrixXcd covariance;  // A, Q x Q Hermitian PSD
  /// Deterministic mode: alpha_kl per path, indexed by Scenario::path_index.
  std::vector<Eigen::VectorXcd> fixed_values;

  static ReflectivityModel diagonal(ReflectivityMode mode, int q, double sigma_alpha_sq);
};

/// One synthesized look: per-path snapshots r_kl plus the realized alphas.
struct SnapshotSet {
  std::vector<Eigen::VectorXcd> paths;   // r_kl, path_index order
  std::vector<Eigen::VectorXcd> alphas;  // realized alpha_kl
  double noise_power = 0.0;
  int m_t = 0;
  int m_r = 0;

  const Eigen::VectorXcd& at(int k, int l) const { return paths[k * m_r + l]; }
};

/// Draws alphas and noise from per-path substreams of `seed` and returns
/// r_kl = H_kl alpha_kl + e_kl. Identical seed, identical output.
SnapshotSet synthesize(const Scenario& scenario, const LfmWaveformSet& set,
                       const ReflectivityModel& model, std::uint64_t seed);

/// Noise power giving the requested average SNR over paths and targets:
/// SNR = (1/(M_t M_r Q)) sum E var_q zeta^2 / sigma^2.
double calibrate_noise(const Scenario& scenario, const ReflectivityModel& model,
                       double target_snr_linear);

}  // namespace radarest
