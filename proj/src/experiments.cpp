#include "radarest/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "radarest/bounds.hpp"
#include "radarest/errors.hpp"
#include "radarest/numkit.hpp"
#include "radarest/rng.hpp"
#include "radarest/threading.hpp"

#include <json.hpp>

namespace radarest {

namespace {

Eigen::VectorXd true_positions(const Scenario& sc) {
  Eigen::VectorXd psi(2 * sc.num_targets());
  for (int q = 0; q < sc.num_targets(); ++q) psi.segment<2>(2 * q) = sc.targets[q].position;
  return psi;
}

struct TrialOutcome {
  Eigen::VectorXd sq_error;
  double sigma2_hat = 0.0;
  bool converged = false;
};

TrialOutcome run_trial(const Scenario& sc, const LfmWaveformSet& set,
                       const ReflectivityModel& model, const SearchConfig& search,
                       std::uint64_t trial_seed) {
  ReflectivityModel trial_model = model;
  if (model.mode == ReflectivityMode::deterministic) {
    // Deterministic-model trials draw a fresh "unknown constant" per path,
    // matching how the bound is averaged.
    const Eigen::MatrixXcd sqrt_cov = psd_sqrt(model.covariance);
    trial_model.fixed_values.clear();
    for (int p = 0; p < sc.path_count(); ++p) {
      Rng rng(derive_seed(trial_seed, {3001, static_cast<std::uint64_t>(p)}));
      trial_model.fixed_values.push_back(sample_cn(rng, sqrt_cov));
    }
  }
  const SnapshotSet snaps = synthesize(sc, set, trial_model, trial_seed);
  const EstimateResult est = estimate(model.mode, sc, set, snaps, search);
  const Eigen::VectorXd truth = true_positions(sc);
  const Eigen::VectorXd matched = match_targets(est.psi_hat, truth);

  TrialOutcome out;
  out.sq_error = (matched - truth).cwiseAbs2();
  out.sigma2_hat = est.sigma2_hat;
  out.converged = est.converged;
  return out;
}

SweepRecord reduce_trials(const std::vector<TrialOutcome>& outcomes, const std::string& label,
                          double snr_db, const Eigen::VectorXd& bound_diag) {
  SweepRecord rec;
  rec.config_label = label;
  rec.snr_db = snr_db;
  rec.trials = static_cast<int>(outcomes.size());
  rec.bound_diag = bound_diag;
  rec.mse = Eigen::VectorXd::Zero(bound_diag.size());
  int converged = 0;
  double sigma_acc = 0.0;
  for (const auto& t : outcomes) {
    rec.mse += t.sq_error;
    sigma_acc += t.sigma2_hat;
    converged += t.converged ? 1 : 0;
  }
  if (!outcomes.empty()) {
    rec.mse /= static_cast<double>(outcomes.size());
    rec.sigma2_hat_mean = sigma_acc / static_cast<double>(outcomes.size());
    rec.converged_fraction = static_cast<double>(converged) / outcomes.size();
  }
  return rec;
}

Eigen::VectorXd bound_diag_for(const Scenario& sc, const LfmWaveformSet& set,
                               const ReflectivityModel& model, const SweepOptions& options,
                               std::uint64_t snr_index) {
  if (model.mode == ReflectivityMode::stochastic)
    return stochastic_crlb(sc, set, model.covariance, sc.noise_power).per_param_variance;
  return emcb(sc, set, model.covariance, sc.noise_power, options.emcb_draws,
              derive_seed(options.seed, {4001, snr_index}))
      .per_param_variance;
}

}  // namespace

std::vector<SweepRecord> run_mse_sweep(const Scenario& scenario, const LfmWaveformSet& set,
                                       const ReflectivityModel& model, const SearchConfig& search,
                                       const SweepOptions& options) {
  if (options.trials < 10) throw ConfigError("run_mse_sweep: trials must be >= 10");
  std::vector<SweepRecord> records;
  for (std::size_t si = 0; si < options.snr_db_grid.size(); ++si) {
    const double snr_db = options.snr_db_grid[si];
    Scenario sc = scenario;
    sc.noise_power = calibrate_noise(scenario, model, std::pow(10.0, snr_db / 10.0));

    std::vector<TrialOutcome> outcomes(options.trials);
    parallel_for(options.trials, options.threads, [&](std::size_t ti) {
      outcomes[ti] = run_trial(sc, set, model, search,
                               derive_seed(options.seed, {si, static_cast<std::uint64_t>(ti)}));
    });

    records.push_back(reduce_trials(outcomes, options.label, snr_db,
                                    bound_diag_for(sc, set, model, options, si)));
  }
  return records;
}

std::vector<SweepRecord> run_asymptotic_sweep(AsymptoticAxis axis, const std::vector<int>& sizes,
                                              const Scenario& scenario, const LfmWaveformSet& set,
                                              const ReflectivityModel& model,
                                              const SearchConfig& search,
                                              const SweepOptions& options) {
  if (!scenario.ring)
    throw ConfigError("run_asymptotic_sweep: scenario needs ring metadata to rebuild geometry");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw ConfigError("run_asymptotic_sweep: sizes must increase");
  const double snr_db = options.snr_db_grid.empty() ? 20.0 : options.snr_db_grid.front();

  std::vector<SweepRecord> records;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int size = sizes[si];
    RingInfo ring = *scenario.ring;
    if (axis == AsymptoticAxis::paths)
      ring.m_r = size;
    else
      ring.l_r = size;

    Scenario sc = scenario;
    auto [tx, rx] = place_ring(ring.m_t, ring.m_r, ring.radius, ring.l_t, ring.l_r,
                               ring.element_spacing);
    sc.tx_arrays = tx;
    sc.rx_arrays = rx;
    sc.ring = ring;
    LfmWaveformSet wf = set;
    if (static_cast<int>(wf.tx_offsets_s.size()) != ring.m_t)
      wf = LfmWaveformSet::with_default_offsets(ring.m_t);
    sc.samples = required_samples(wf, sc);
    sc.noise_power = calibrate_noise(sc, model, std::pow(10.0, snr_db / 10.0));
    sc.validate();

    std::vector<TrialOutcome> outcomes(options.trials);
    parallel_for(options.trials, options.threads, [&](std::size_t ti) {
      outcomes[ti] = run_trial(sc, wf, model, search,
                               derive_seed(options.seed, {si, static_cast<std::uint64_t>(ti)}));
    });

    std::ostringstream label;
    label << options.label << (axis == AsymptoticAxis::paths ? "/m_r=" : "/l_r=") << size;
    records.push_back(reduce_trials(outcomes, label.str(), snr_db,
                                    bound_diag_for(sc, wf, model, options, 9000 + si)));
  }
  return records;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "config,snr_db,trials,param,mse,bound,sigma2_hat_mean,converged_fraction\n";
  for (const auto& rec : records) {
    for (Eigen::Index p = 0; p < rec.mse.size(); ++p) {
      os << rec.config_label << ',' << format_double(rec.snr_db) << ',' << rec.trials << ','
         << p << ',' << format_double(rec.mse(p)) << ',' << format_double(rec.bound_diag(p))
         << ',' << format_double(rec.sigma2_hat_mean) << ','
         << format_double(rec.converged_fraction) << '\n';
    }
  }
}

void write_sweep_json(std::ostream& os, const std::vector<SweepRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json j;
    j["config"] = rec.config_label;
    j["snr_db"] = rec.snr_db;
    j["trials"] = rec.trials;
    j["mse"] = std::vector<double>(rec.mse.data(), rec.mse.data() + rec.mse.size());
    j["bound"] =
        std::vector<double>(rec.bound_diag.data(), rec.bound_diag.data() + rec.bound_diag.size());
    j["sigma2_hat_mean"] = rec.sigma2_hat_mean;
    j["converged_fraction"] = rec.converged_fraction;
    arr.push_back(std::move(j));
  }
  os << arr.dump(2) << '\n';
}

}  // namespace radarest
