#include "radarest/scenario.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "radarest/errors.hpp"

namespace radarest {

namespace {
constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}
}  // namespace

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

void ArraySpec::validate() const {
  require(element_count >= 1, "array element_count must be >= 1");
  require(element_spacing > 0.0, "array element_spacing must be positive");
  require(orientation > -kPi - 1e-12 && orientation <= kPi + 1e-12,
          "array orientation must lie in (-pi, pi]");
  require(center.allFinite(), "array center must be finite");
}

double Scenario::carrier_rad() const { return 2.0 * kPi * carrier_freq_hz; }

void Scenario::validate() const {
  require(!tx_arrays.empty(), "scenario needs at least one transmitting array");
  require(!rx_arrays.empty(), "scenario needs at least one receiving array");
  require(!targets.empty(), "scenario needs at least one target");
  for (const auto& a : tx_arrays) {
    a.validate();
    require(a.kind == ArrayKind::transmit, "tx_arrays entry tagged as receive");
  }
  for (const auto& a : rx_arrays) {
    a.validate();
    require(a.kind == ArrayKind::receive, "rx_arrays entry tagged as transmit");
  }
  require(carrier_freq_hz > 0.0, "carrier_freq_hz must be positive");
  require(sample_interval_s > 0.0, "sample_interval_s must be positive");
  require(samples >= 1, "samples must be >= 1");
  require(total_energy > 0.0, "total_energy must be positive");
  require(noise_power > 0.0, "noise_power must be positive");
  require(wave_speed > 0.0, "wave_speed must be positive");
  for (const auto& t : targets) {
    require(t.position.allFinite(), "target position must be finite");
    require(t.velocity.norm() < 1e-3 * wave_speed, "target speed must stay below 1e-3 c");
    for (const auto& a : tx_arrays)
      require((t.position - a.center).norm() > 1e-9,
              "target coincides with a transmitting array center");
    for (const auto& a : rx_arrays)
      require((t.position - a.center).norm() > 1e-9,
              "target coincides with a receiving array center");
  }
}

std::pair<std::vector<ArraySpec>, std::vector<ArraySpec>> place_ring(int m_t, int m_r,
                                                                     double radius, int l_t,
                                                                     int l_r, double spacing) {
  if (m_t < 1 || m_r < 1) throw std::invalid_argument("place_ring: array counts must be >= 1");
  if (radius <= 0.0) throw std::invalid_argument("place_ring: radius must be positive");
  if (l_t < 1 || l_r < 1) throw std::invalid_argument("place_ring: element counts must be >= 1");

  std::vector<ArraySpec> tx(m_t), rx(m_r);
  for (int k = 0; k < m_t; ++k) {
    const double ang = (2.0 * (k + 1) - 1.0) * kPi / m_t;
    tx[k].center = radius * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    tx[k].element_count = l_t;
    tx[k].element_spacing = spacing;
    tx[k].orientation = wrap_angle(ang + kPi);  // boresight at the origin
    tx[k].kind = ArrayKind::transmit;
  }
  for (int l = 0; l < m_r; ++l) {
    const double ang = 2.0 * l * kPi / m_r;
    rx[l].center = radius * Eigen::Vector2d(std::cos(ang), std::sin(ang));
    rx[l].element_count = l_r;
    rx[l].element_spacing = spacing;
    rx[l].orientation = wrap_angle(ang + kPi);
    rx[l].kind = ArrayKind::receive;
  }
  return {tx, rx};
}

PathGeometry path_geometry(const Scenario& scenario, int k, int q, int l) {
  if (k < 0 || k >= scenario.num_tx() || l < 0 || l >= scenario.num_rx() || q < 0 ||
      q >= scenario.num_targets())
    throw std::invalid_argument("path_geometry: index out of range");

  const ArraySpec& tx = scenario.tx_arrays[k];
  const ArraySpec& rx = scenario.rx_arrays[l];
  const TargetState& tgt = scenario.targets[q];

  const Eigen::Vector2d to_tx = tx.center - tgt.position;
  const Eigen::Vector2d to_rx = rx.center - tgt.position;
  PathGeometry g;
  g.tx_range = to_tx.norm();
  g.rx_range = to_rx.norm();
  if (g.tx_range < 1e-9 || g.rx_range < 1e-9)
    throw DegenerateGeometry("path_geometry: target coincides with an array center");

  const double sum_range = g.tx_range + g.rx_range;
  g.path_loss = 1.0 / (sum_range * sum_range);
  const double tau = sum_range / scenario.wave_speed;
  g.delay_samples = tau / scenario.sample_interval_s;

  // Angles of the target-to-array directions drive the Doppler shift.
  const double phi_t = std::atan2(to_tx.y(), to_tx.x());
  const double phi_r = std::atan2(to_rx.y(), to_rx.x());
  const double omega_hz = scenario.carrier_rad() / scenario.wave_speed *
                          (tgt.velocity.x() * (std::cos(phi_t) + std::cos(phi_r)) +
                           tgt.velocity.y() * (std::sin(phi_t) + std::sin(phi_r)));
  g.doppler_per_sample = omega_hz * scenario.sample_interval_s;

  g.tx_bearing = wrap_angle(std::atan2(-to_tx.y(), -to_tx.x()) - tx.orientation);
  g.rx_bearing = wrap_angle(std::atan2(-to_rx.y(), -to_rx.x()) - rx.orientation);
  return g;
}

}  // namespace radarest
