#include "radarest/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "radarest/errors.hpp"

namespace radarest {

namespace {
constexpr std::complex<double> kJ{0.0, 1.0};
}

LfmWaveformSet LfmWaveformSet::with_default_offsets(int m_t, double guard_s) {
  LfmWaveformSet set;
  set.tx_offsets_s.resize(m_t);
  const double stride = set.pulse_count * set.pri_s + guard_s;
  for (int k = 0; k < m_t; ++k) set.tx_offsets_s[k] = k * stride;
  return set;
}

void LfmWaveformSet::validate() const {
  if (pulse_count < 1) throw ConfigError("waveform pulse_count must be >= 1");
  if (pri_s <= 0.0 || pulse_duration_s <= 0.0 || bandwidth_hz <= 0.0)
    throw ConfigError("waveform durations and bandwidth must be positive");
  if (pulse_duration_s > pri_s) throw ConfigError("waveform pulse_duration exceeds the PRI");
  if (tx_offsets_s.empty()) throw ConfigError("waveform needs one tx offset per transmitter");
}

std::complex<double> LfmWaveformSet::sample(int k, double t) const {
  const double base = t - tx_offsets_s.at(k);
  std::complex<double> acc = 0.0;
  for (int z = 0; z < pulse_count; ++z) {
    const double u = base - z * pri_s;
    if (u >= 0.0 && u < pulse_duration_s) {
      const double x = u - 0.5 * pulse_duration_s;
      acc += std::exp(kJ * (std::numbers::pi * bandwidth_hz / pulse_duration_s * x * x));
    }
  }
  return acc;
}

std::complex<double> LfmWaveformSet::sample_derivative(int k, double t) const {
  const double base = t - tx_offsets_s.at(k);
  std::complex<double> acc = 0.0;
  for (int z = 0; z < pulse_count; ++z) {
    const double u = base - z * pri_s;
    if (u >= 0.0 && u < pulse_duration_s) {
      const double rate = std::numbers::pi * bandwidth_hz / pulse_duration_s;
      const double x = u - 0.5 * pulse_duration_s;
      acc += kJ * (2.0 * rate * x) * std::exp(kJ * (rate * x * x));
    }
  }
  return acc;
}

namespace {

// The sampled train is normalized to unit energy so that b^H b = E/(M_t L_t)
// at full support: sum_n |s_k[n]|^2 = Z T_0 / dt, exact for any fractional
// delay when T_0 is an integer number of samples.
double steering_amplitude(const LfmWaveformSet& set, const Scenario& scenario, int k) {
  const double train_energy =
      set.pulse_count * set.pulse_duration_s / scenario.sample_interval_s;
  return std::sqrt(scenario.total_energy /
                   (scenario.num_tx() * scenario.tx_arrays[k].element_count * train_energy));
}

}  // namespace

TemporalSteering temporal_steering(const LfmWaveformSet& set, const Scenario& scenario, int k,
                                   const PathGeometry& geometry) {
  const int n = scenario.samples;
  const double dt = scenario.sample_interval_s;
  const double amp = steering_amplitude(set, scenario, k);
  TemporalSteering out;
  out.delay_samples = geometry.delay_samples;
  out.doppler_per_sample = geometry.doppler_per_sample;
  out.values.resize(n);
  for (int i = 1; i <= n; ++i) {
    const std::complex<double> s = set.sample(k, (i - geometry.delay_samples) * dt);
    out.values(i - 1) = amp * s * std::exp(kJ * (geometry.doppler_per_sample * i));
  }
  out.empty_support = out.values.squaredNorm() == 0.0;
  return out;
}

Eigen::VectorXcd temporal_steering_ddelay(const LfmWaveformSet& set, const Scenario& scenario,
                                          int k, const PathGeometry& geometry) {
  const int n = scenario.samples;
  const double dt = scenario.sample_interval_s;
  const double amp = steering_amplitude(set, scenario, k);
  Eigen::VectorXcd out(n);
  for (int i = 1; i <= n; ++i) {
    const std::complex<double> ds = set.sample_derivative(k, (i - geometry.delay_samples) * dt);
    out(i - 1) = amp * (-dt) * ds * std::exp(kJ * (geometry.doppler_per_sample * i));
  }
  return out;
}

Eigen::VectorXcd temporal_steering_ddoppler(const LfmWaveformSet& set, const Scenario& scenario,
                                            int k, const PathGeometry& geometry) {
  const int n = scenario.samples;
  Eigen::VectorXcd out = temporal_steering(set, scenario, k, geometry).values;
  for (int i = 1; i <= n; ++i) out(i - 1) *= kJ * static_cast<double>(i);
  return out;
}

OrthogonalityReport orthogonality_report(const LfmWaveformSet& set, const Scenario& scenario,
                                         double threshold) {
  OrthogonalityReport report;
  report.threshold = threshold;
  const int m_t = scenario.num_tx();
  const int q_count = scenario.num_targets();
  if (m_t < 2) return report;

  for (int l = 0; l < scenario.num_rx(); ++l) {
    std::vector<std::vector<Eigen::VectorXcd>> b(m_t);
    for (int k = 0; k < m_t; ++k) {
      b[k].reserve(q_count);
      for (int q = 0; q < q_count; ++q)
        b[k].push_back(temporal_steering(set, scenario, k, path_geometry(scenario, k, q, l)).values);
    }
    for (int k = 0; k < m_t; ++k) {
      for (int kp = k + 1; kp < m_t; ++kp) {
        for (int q = 0; q < q_count; ++q) {
          for (int qp = 0; qp < q_count; ++qp) {
            const double na = b[k][q].norm();
            const double nb = b[kp][qp].norm();
            if (na == 0.0 || nb == 0.0) continue;
            const double c = std::abs(b[k][q].dot(b[kp][qp])) / (na * nb);
            report.max_cross_correlation = std::max(report.max_cross_correlation, c);
          }
        }
      }
    }
  }
  report.pass = report.max_cross_correlation < threshold;
  return report;
}

int required_samples(const LfmWaveformSet& set, const Scenario& scenario) {
  double horizon = 0.0;
  for (int k = 0; k < scenario.num_tx(); ++k) {
    for (int l = 0; l < scenario.num_rx(); ++l) {
      for (int q = 0; q < scenario.num_targets(); ++q) {
        const PathGeometry g = path_geometry(scenario, k, q, l);
        horizon = std::max(horizon, set.tx_offsets_s.at(k) +
                                        g.delay_samples * scenario.sample_interval_s +
                                        set.train_duration_s());
      }
    }
  }
  return static_cast<int>(std::ceil(horizon / scenario.sample_interval_s)) + 2;
}

}  // namespace radarest
