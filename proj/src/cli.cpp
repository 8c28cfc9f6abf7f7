#include "radarest/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "radarest/bounds.hpp"
#include "radarest/errors.hpp"
#include "radarest/experiments.hpp"
#include "radarest/json_io.hpp"
#include "radarest/numkit.hpp"
#include "radarest/rng.hpp"

namespace radarest {

namespace {

int log_level() {
  const char* env = std::getenv("RADAR_EST_LOG");
  if (env == nullptr) return 0;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(std::ostream& err, const std::string& msg) {
  if (log_level() >= 1) err << "radar_est: " << msg << "\n";
}

ReflectivityMode parse_mode(const std::string& model) {
  if (model == "stochastic") return ReflectivityMode::stochastic;
  if (model == "deterministic") return ReflectivityMode::deterministic;
  throw CLI::ValidationError("--model must be stochastic or deterministic");
}

struct OutputTarget {
  std::string path;  // empty = stdout
  void write(std::ostream& fallback, const std::string& content) const {
    if (path.empty()) {
      fallback << content;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << content;
  }
};

std::vector<double> parse_snr_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("--snr-db needs at least one value");
  return out;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-array radar bounds and maximum-likelihood estimation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::string model = "stochastic";
  std::string snr_csv;
  std::uint64_t seed = 0;
  int threads = 0;
  int trials = 0;

  app.add_option("--config", config_path, "Scenario JSON document")->required();
  app.add_option("--out", out_path, "Output path (default: stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "Master seed; all randomness derives from it");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  CLI::App* validate = app.add_subcommand("validate", "Check a config and echo its dimensions");
  CLI::App* crlb = app.add_subcommand("crlb", "Cramer-Rao bound on target parameters");
  crlb->add_option("--model", model, "stochastic or deterministic");
  crlb->add_option("--snr-db", snr_csv, "Calibrate noise to this SNR first");
  CLI::App* emcb_cmd = app.add_subcommand("emcb", "Averaged deterministic bound");
  emcb_cmd->add_option("--trials", trials, "Monte Carlo draws (default 300)");
  emcb_cmd->add_option("--snr-db", snr_csv, "Calibrate noise to this SNR first");
  CLI::App* estimate_cmd = app.add_subcommand("estimate", "ML estimation on synthesized data");
  estimate_cmd->add_option("--model", model, "stochastic or deterministic");
  estimate_cmd->add_option("--snr-db", snr_csv, "Calibrate noise to this SNR first");
  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo MSE vs SNR against the bound");
  sweep->add_option("--model", model, "stochastic or deterministic");
  sweep->add_option("--snr-db", snr_csv, "Comma list of SNR points in dB");
  sweep->add_option("--trials", trials, "Trials per SNR point (default 200)");
  CLI::App* asym = app.add_subcommand("asymptote", "MSE and noise-power bias vs array growth");
  std::string axis = "array_size";
  std::string sizes_csv;
  asym->add_option("--model", model, "stochastic or deterministic");
  asym->add_option("--axis", axis, "paths (grow M_r) or array_size (grow L_r)")
      ->check(CLI::IsMember({"paths", "array_size"}));
  asym->add_option("--sizes", sizes_csv, "Comma list of increasing sizes")->required();
  asym->add_option("--snr-db", snr_csv, "Operating SNR in dB (default 20)");
  asym->add_option("--trials", trials, "Trials per size (default 50)");
  CLI::App* ortho = app.add_subcommand("ortho-check", "Waveform cross-correlation report");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends.
      out << app.help();
      return 0;
    }
    err << "error: kind=usage message=" << e.what() << "\n";
    return 1;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    OutputTarget target{out_path};

    if (validate->parsed()) {
      std::ostringstream msg;
      msg << "{\"m_t\": " << cfg.scenario.num_tx() << ", \"m_r\": " << cfg.scenario.num_rx()
          << ", \"l_t\": " << cfg.scenario.tx_arrays.front().element_count
          << ", \"l_r\": " << cfg.scenario.rx_arrays.front().element_count
          << ", \"targets\": " << cfg.scenario.num_targets()
          << ", \"samples\": " << cfg.scenario.samples << "}\n";
      target.write(out, msg.str());
      return 0;
    }

    if (!snr_csv.empty() && !sweep->parsed()) {
      const double snr_db = parse_snr_list(snr_csv).front();
      cfg.scenario.noise_power =
          calibrate_noise(cfg.scenario, cfg.reflectivity, std::pow(10.0, snr_db / 10.0));
      log_info(err, "calibrated noise power to " + std::to_string(cfg.scenario.noise_power));
    }

    if (crlb->parsed()) {
      const ReflectivityMode mode = parse_mode(model);
      BoundResult result;
      if (mode == ReflectivityMode::stochastic) {
        result = stochastic_crlb(cfg.scenario, cfg.waveform, cfg.reflectivity.covariance,
                                 cfg.scenario.noise_power);
      } else {
        // Deterministic bound at fixed reflectivities; fall back to unit
        // alphas when the config does not pin them.
        std::vector<Eigen::VectorXcd> alphas = cfg.reflectivity.fixed_values;
        if (alphas.empty())
          alphas.assign(cfg.scenario.path_count(),
                        Eigen::VectorXcd::Ones(cfg.scenario.num_targets()));
        result = deterministic_crlb(cfg.scenario, cfg.waveform, alphas,
                                    cfg.scenario.noise_power);
      }
      target.write(out, bound_result_json(result));
      return 0;
    }

    if (emcb_cmd->parsed()) {
      const int draws = trials > 0 ? trials : 300;
      const BoundResult result = emcb(cfg.scenario, cfg.waveform, cfg.reflectivity.covariance,
                                      cfg.scenario.noise_power, draws, seed);
      target.write(out, bound_result_json(result));
      return 0;
    }

    if (estimate_cmd->parsed()) {
      const ReflectivityMode mode = parse_mode(model);
      ReflectivityModel m = cfg.reflectivity;
      m.mode = mode;
      if (mode == ReflectivityMode::deterministic && m.fixed_values.empty()) {
        const Eigen::MatrixXcd sqrt_cov = psd_sqrt(m.covariance);
        for (int p = 0; p < cfg.scenario.path_count(); ++p) {
          Rng rng(derive_seed(seed, {3001, static_cast<std::uint64_t>(p)}));
          m.fixed_values.push_back(sample_cn(rng, sqrt_cov));
        }
      }
      const SnapshotSet snaps = synthesize(cfg.scenario, cfg.waveform, m, seed);
      const EstimateResult result =
          estimate(mode, cfg.scenario, cfg.waveform, snaps, cfg.search);
      target.write(out, estimate_result_json(result));
      return 0;
    }

    if (sweep->parsed()) {
      SweepOptions opts;
      if (!snr_csv.empty()) opts.snr_db_grid = parse_snr_list(snr_csv);
      if (trials > 0) opts.trials = trials;
      opts.seed = seed;
      opts.threads = threads;
      ReflectivityModel m = cfg.reflectivity;
      m.mode = parse_mode(model);
      opts.label = cfg.label + "/" + model;
      const std::vector<SweepRecord> records =
          run_mse_sweep(cfg.scenario, cfg.waveform, m, cfg.search, opts);
      std::ostringstream buf;
      if (format == "csv")
        write_sweep_csv(buf, records);
      else
        write_sweep_json(buf, records);
      target.write(out, buf.str());
      return 0;
    }

    if (asym->parsed()) {
      SweepOptions opts;
      opts.snr_db_grid = snr_csv.empty() ? std::vector<double>{20.0} : parse_snr_list(snr_csv);
      opts.trials = trials > 0 ? trials : 50;
      opts.seed = seed;
      opts.threads = threads;
      ReflectivityModel m = cfg.reflectivity;
      m.mode = parse_mode(model);
      opts.label = cfg.label + "/" + model;
      std::vector<int> sizes;
      std::stringstream ss(sizes_csv);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) sizes.push_back(std::stoi(item));
      const AsymptoticAxis ax =
          axis == "paths" ? AsymptoticAxis::paths : AsymptoticAxis::array_size;
      const std::vector<SweepRecord> records =
          run_asymptotic_sweep(ax, sizes, cfg.scenario, cfg.waveform, m, cfg.search, opts);
      std::ostringstream buf;
      if (format == "csv")
        write_sweep_csv(buf, records);
      else
        write_sweep_json(buf, records);
      target.write(out, buf.str());
      return 0;
    }

    if (ortho->parsed()) {
      const OrthogonalityReport report = orthogonality_report(cfg.waveform, cfg.scenario);
      target.write(out, orthogonality_json(report));
      return 0;
    }

    err << "error: kind=usage message=no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "error: kind=config message=" << e.what() << "\n";
    return 3;
  } catch (const NumericalFailure& e) {
    err << "error: kind=numerical message=" << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: kind=config message=" << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: kind=internal message=" << e.what() << "\n";
    return 2;
  }
}

}  // namespace radarest
