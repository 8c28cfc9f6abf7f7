#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "radarest/estimator.hpp"
#include "radarest/scenario.hpp"
#include "radarest/signal.hpp"
#include "radarest/waveform.hpp"

namespace radarest {

/// One (configuration, SNR, trial-count) row of a sweep.
struct SweepRecord {
  std::string config_label;
  double snr_db = 0.0;
  int trials = 0;
  Eigen::VectorXd mse;         // per scalar parameter, m^2
  Eigen::VectorXd bound_diag;  // matching bound diagonal
  double sigma2_hat_mean = 0.0;
  double converged_fraction = 0.0;
};

struct SweepOptions {
  std::vector<double> snr_db_grid = {-20, -15, -10, -5, 0, 5, 10, 15, 20, 25, 30};
  int trials = 200;
  std::uint64_t seed = 0;
  int emcb_draws = 300;  // deterministic-model bound averaging
  int threads = 0;       // 0 = all cores
  std::string label;
};

/// Per SNR point: recalibrates the noise power, synthesizes `trials`
/// snapshot sets, runs the matching ML estimator, and attaches the matching
/// bound diagonal (stochastic CRLB or EMCB). Per-trial seeds derive from
/// (seed, snr index, trial index), so parallel and serial runs agree.
std::vector<SweepRecord> run_mse_sweep(const Scenario& scenario, const LfmWaveformSet& set,
                                       const ReflectivityModel& model, const SearchConfig& search,
                                       const SweepOptions& options);

enum class AsymptoticAxis { paths, array_size };

/// Grows M_r (paths axis) or L_r (array_size axis) over `sizes`, holding the
/// rest of the ring template fixed; reports the MSE trend and the mean noise
/// power estimate per size. Requires ring metadata on the scenario. The
/// operating SNR is the first entry of options.snr_db_grid; each record's
/// label carries the axis and size.
std::vector<SweepRecord> run_asymptotic_sweep(AsymptoticAxis axis, const std::vector<int>& sizes,
                                              const Scenario& scenario, const LfmWaveformSet& set,
                                              const ReflectivityModel& model,
                                              const SearchConfig& search,
                                              const SweepOptions& options);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void write_sweep_json(std::ostream& os, const std::vector<SweepRecord>& records);

}  // namespace radarest
