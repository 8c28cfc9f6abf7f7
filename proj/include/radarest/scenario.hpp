#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace radarest {

enum class ArrayKind { transmit, receive };

/// One transmitting or receiving array: phase center, element layout and
/// boresight orientation. Elements form a ULA with spacing in wavelengths.
struct ArraySpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  int element_count = 1;
  double element_spacing = 0.5;  // wavelengths
  double orientation = 0.0;      // boresight direction, radians in (-pi, pi]
  ArrayKind kind = ArrayKind::receive;
  double steer_bearing = 0.0;    // transmit beam steering relative to boresight

  void validate() const;
};

struct TargetState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

/// Ring parameters a scenario was expanded from, kept so sweeps can rebuild
/// the geometry with a different array count or size.
struct RingInfo {
  int m_t = 0;
  int m_r = 0;
  double radius = 0.0;
  int l_t = 1;
  int l_r = 1;
  double element_spacing = 0.5;
};

/// The single source of truth for an experiment: geometry, sampling, energy
/// and noise. All quantities are SI.
struct Scenario {
  std::vector<ArraySpec> tx_arrays;
  std::vector<ArraySpec> rx_arrays;
  std::vector<TargetState> targets;
  double carrier_freq_hz = 1e9;
  double sample_interval_s = 1e-6;
  int samples = 0;
  double total_energy = 1.0;
  double noise_power = 1.0;
  double wave_speed = 2.9979e8;
  std::optional<RingInfo> ring;

  int num_tx() const { return static_cast<int>(tx_arrays.size()); }
  int num_rx() const { return static_cast<int>(rx_arrays.size()); }
  int num_targets() const { return static_cast<int>(targets.size()); }
  int path_count() const { return num_tx() * num_rx(); }
  int path_index(int k, int l) const { return k * num_rx() + l; }
  /// Snapshot dimension L_r N of the (k, l) path.
  int snapshot_dim(int l) const { return rx_arrays[l].element_count * samples; }
  double carrier_rad() const;  // Omega = 2 pi f_c

  void validate() const;
};

/// All per-(k, q, l) derived quantities of the signal model.
struct PathGeometry {
  double delay_samples = 0.0;       // n = tau / dt
  double doppler_per_sample = 0.0;  // omega = Omega_kl dt
  double tx_bearing = 0.0;          // relative to tx boresight
  double rx_bearing = 0.0;          // relative to rx boresight
  double path_loss = 0.0;           // zeta = 1/(R_t + R_r)^2
  double tx_range = 0.0;
  double rx_range = 0.0;
};

/// Wraps into (-pi, pi].
double wrap_angle(double a);

/// Places M_t transmit and M_r receive arrays equidistantly on a ring:
/// tx k at angle (2k-1)pi/M_t, rx l at angle 2(l-1)pi/M_r, every boresight
/// pointing at the origin.
std::pair<std::vector<ArraySpec>, std::vector<ArraySpec>> place_ring(int m_t, int m_r,
                                                                     double radius, int l_t = 1,
                                                                     int l_r = 1,
                                                                     double spacing = 0.5);

PathGeometry path_geometry(const Scenario& scenario, int k, int q, int l);

}  // namespace radarest
