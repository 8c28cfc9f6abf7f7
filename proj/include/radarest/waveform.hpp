#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "radarest/scenario.hpp"

namespace radarest {

/// Pulse train of LFM chirps, one staggered copy per transmitter:
/// s_k(t) = sum_z s_0(t - z T_r - T_k~) with
/// s_0(t) = exp(j pi (f_B/T_0) (t - T_0/2)^2) on [0, T_0).
struct LfmWaveformSet {
  int pulse_count = 3;            // Z
  double pri_s = 60e-6;           // T_r
  double bandwidth_hz = 1e6;      // f_B
  double pulse_duration_s = 20e-6;  // T_0
  std::vector<double> tx_offsets_s;  // T_k~, one per transmitter

  /// Default stagger: fully disjoint trains, offset k (Z T_r + guard).
  static LfmWaveformSet with_default_offsets(int m_t, double guard_s = 60e-6);

  void validate() const;

  /// Span of one offsetless train: (Z-1) T_r + T_0.
  double train_duration_s() const { return (pulse_count - 1) * pri_s + pulse_duration_s; }

  /// s_k(t); unit magnitude inside a pulse, zero outside. Total function.
  std::complex<double> sample(int k, double t) const;
  /// d s_k / dt inside pulses (edge jumps carry no measure).
  std::complex<double> sample_derivative(int k, double t) const;
};

/// b_kl(n, omega): values[i-1] = sqrt(E/(M_t L_t)) s_k((i - n) dt) e^{j omega i}.
struct TemporalSteering {
  Eigen::VectorXcd values;
  double delay_samples = 0.0;
  double doppler_per_sample = 0.0;
  bool empty_support = false;  // the delayed train missed the window entirely
};

TemporalSteering temporal_steering(const LfmWaveformSet& set, const Scenario& scenario, int k,
                                   const PathGeometry& geometry);

/// d b / d n and d b / d omega, needed by the steering derivatives.
Eigen::VectorXcd temporal_steering_ddelay(const LfmWaveformSet& set, const Scenario& scenario,
                                          int k, const PathGeometry& geometry);
Eigen::VectorXcd temporal_steering_ddoppler(const LfmWaveformSet& set, const Scenario& scenario,
                                            int k, const PathGeometry& geometry);

struct OrthogonalityReport {
  double max_cross_correlation = 0.0;
  double threshold = 1e-3;
  bool pass = true;
};

/// Max normalized |b_kl^H b_k'l| over all transmitter pairs k != k' and all
/// delay/Doppler combinations the scenario's targets produce.
OrthogonalityReport orthogonality_report(const LfmWaveformSet& set, const Scenario& scenario,
                                         double threshold = 1e-3);

/// Smallest N that keeps every delayed pulse train inside the observation
/// window, with a two-sample pad.
int required_samples(const LfmWaveformSet& set, const Scenario& scenario);

}  // namespace radarest
