#pragma once

#include <iosfwd>
#include <string>

#include "radarest/bounds.hpp"
#include "radarest/estimator.hpp"
#include "radarest/scenario.hpp"
#include "radarest/signal.hpp"
#include "radarest/waveform.hpp"

namespace radarest {

/// Everything a run needs, loaded from one JSON document.
struct RunConfig {
  Scenario scenario;
  LfmWaveformSet waveform;
  ReflectivityModel reflectivity;
  SearchConfig search;
  std::string label;
};

/// Parses a scenario document. Top-level keys: tx_arrays / rx_arrays or the
/// `ring` shorthand, targets, carrier_freq_hz, sample_interval_s, samples
/// (0 = size to cover all delayed pulse trains), total_energy, noise_power,
/// wave_speed, waveform, reflectivity, search. Throws ConfigError.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& label);

std::string bound_result_json(const BoundResult& result);
std::string estimate_result_json(const EstimateResult& result);
std::string snapshot_debug_json(const SnapshotSet& snapshots);
std::string orthogonality_json(const OrthogonalityReport& report);

}  // namespace radarest
