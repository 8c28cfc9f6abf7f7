#include "radarest/json_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "radarest/errors.hpp"

namespace radarest {

using nlohmann::json;

namespace {

Eigen::Vector2d parse_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(std::string(what) + " must be a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

ArraySpec parse_array(const json& j, ArrayKind kind) {
  ArraySpec a;
  a.kind = kind;
  a.center = parse_vec2(j.at("center"), "array center");
  a.element_count = j.value("element_count", 1);
  a.element_spacing = j.value("element_spacing", 0.5);
  a.orientation = j.value("orientation", 0.0);
  a.steer_bearing = j.value("steer_bearing", 0.0);
  return a;
}

TargetState parse_target(const json& j) {
  TargetState t;
  t.position = parse_vec2(j.at("position"), "target position");
  if (j.contains("velocity")) t.velocity = parse_vec2(j.at("velocity"), "target velocity");
  return t;
}

Eigen::MatrixXcd parse_covariance(const json& j, int q) {
  // Either a scalar shorthand sigma_alpha_sq or a dense matrix given as
  // [[re, im], ...] rows.
  Eigen::MatrixXcd cov(q, q);
  if (!j.is_array() || static_cast<int>(j.size()) != q)
    throw ConfigError("reflectivity covariance must be a QxQ matrix");
  for (int i = 0; i < q; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != q)
      throw ConfigError("reflectivity covariance must be a QxQ matrix");
    for (int c = 0; c < q; ++c) {
      const json& cell = row[c];
      if (cell.is_number())
        cov(i, c) = cell.get<double>();
      else if (cell.is_array() && cell.size() == 2)
        cov(i, c) = std::complex<double>(cell[0].get<double>(), cell[1].get<double>());
      else
        throw ConfigError("covariance entries must be numbers or [re, im] pairs");
    }
  }
  return cov;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& label) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  cfg.label = label;
  Scenario& sc = cfg.scenario;
  try {
    if (doc.contains("ring")) {
      const json& r = doc.at("ring");
      RingInfo info;
      info.m_t = r.at("m_t").get<int>();
      info.m_r = r.at("m_r").get<int>();
      info.radius = r.at("radius").get<double>();
      info.l_t = r.value("l_t", 1);
      info.l_r = r.value("l_r", 1);
      info.element_spacing = r.value("element_spacing", 0.5);
      auto [tx, rx] =
          place_ring(info.m_t, info.m_r, info.radius, info.l_t, info.l_r, info.element_spacing);
      sc.tx_arrays = std::move(tx);
      sc.rx_arrays = std::move(rx);
      sc.ring = info;
    } else {
      for (const json& a : doc.at("tx_arrays")) sc.tx_arrays.push_back(parse_array(a, ArrayKind::transmit));
      for (const json& a : doc.at("rx_arrays")) sc.rx_arrays.push_back(parse_array(a, ArrayKind::receive));
    }
    for (const json& t : doc.at("targets")) sc.targets.push_back(parse_target(t));
    sc.carrier_freq_hz = doc.value("carrier_freq_hz", 1e9);
    sc.sample_interval_s = doc.value("sample_interval_s", 1e-6);
    sc.samples = doc.value("samples", 0);
    sc.total_energy = doc.value("total_energy", 1.0);
    sc.noise_power = doc.value("noise_power", 1.0);
    sc.wave_speed = doc.value("wave_speed", 2.9979e8);

    LfmWaveformSet& wf = cfg.waveform;
    if (doc.contains("waveform")) {
      const json& w = doc.at("waveform");
      wf.pulse_count = w.value("pulse_count", 3);
      wf.pri_s = w.value("pri_s", 60e-6);
      wf.bandwidth_hz = w.value("bandwidth_hz", 1e6);
      wf.pulse_duration_s = w.value("pulse_duration_s", 20e-6);
      if (w.contains("tx_offsets_s"))
        wf.tx_offsets_s = w.at("tx_offsets_s").get<std::vector<double>>();
    }
    if (wf.tx_offsets_s.empty()) {
      const double stride = wf.pulse_count * wf.pri_s + 60e-6;
      wf.tx_offsets_s.resize(sc.num_tx());
      for (int k = 0; k < sc.num_tx(); ++k) wf.tx_offsets_s[k] = k * stride;
    }
    if (static_cast<int>(wf.tx_offsets_s.size()) != sc.num_tx())
      throw ConfigError("waveform tx_offsets_s must hold one offset per transmitter");
    wf.validate();

    if (sc.samples <= 0) sc.samples = required_samples(wf, sc);
    sc.validate();

    ReflectivityModel& model = cfg.reflectivity;
    const int q = sc.num_targets();
    model.covariance = Eigen::MatrixXcd::Identity(q, q);
    if (doc.contains("reflectivity")) {
      const json& rj = doc.at("reflectivity");
      const std::string mode = rj.value("mode", "stochastic");
      if (mode == "stochastic")
        model.mode = ReflectivityMode::stochastic;
      else if (mode == "deterministic")
        model.mode = ReflectivityMode::deterministic;
      else
        throw ConfigError("reflectivity mode must be stochastic or deterministic");
      if (rj.contains("covariance"))
        model.covariance = parse_covariance(rj.at("covariance"), q);
      else
        model.covariance =
            rj.value("sigma_alpha_sq", 1.0) * Eigen::MatrixXcd::Identity(q, q);
      if (rj.contains("fixed_values")) {
        for (const json& fv : rj.at("fixed_values")) {
          if (!fv.is_array() || static_cast<int>(fv.size()) != q)
            throw ConfigError("fixed_values entries must hold Q [re, im] pairs");
          Eigen::VectorXcd alpha(q);
          for (int i = 0; i < q; ++i)
            alpha(i) = std::complex<double>(fv[i][0].get<double>(), fv[i][1].get<double>());
          model.fixed_values.push_back(std::move(alpha));
        }
      }
    }

    if (doc.contains("search")) {
      const json& s = doc.at("search");
      if (s.contains("grid")) {
        const json& g = s.at("grid");
        if (g.contains("center")) cfg.search.grid.center = parse_vec2(g.at("center"), "grid center");
        cfg.search.grid.half_width = g.value("half_width", 200.0);
        cfg.search.grid.step = g.value("step", 10.0);
      }
      cfg.search.starts = s.value("starts", 6);
      cfg.search.refine_tol = s.value("refine_tol", 1e-3);
      cfg.search.max_iters = s.value("max_iters", 400);
    }
    cfg.search.validate();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string label = path;
  const auto slash = label.find_last_of('/');
  if (slash != std::string::npos) label = label.substr(slash + 1);
  const auto dot = label.rfind(".json");
  if (dot != std::string::npos) label = label.substr(0, dot);
  return parse_run_config(buf.str(), label);
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string bound_result_json(const BoundResult& result) {
  json j;
  j["matrix"] = matrix_to_json(result.matrix);
  j["diagonal"] = std::vector<double>(result.per_param_variance.data(),
                                      result.per_param_variance.data() +
                                          result.per_param_variance.size());
  j["conditioning"] = result.conditioning;
  if (result.trials > 0) {
    j["trials"] = result.trials;
    j["rejected_draws"] = result.rejected_draws;
    j["standard_error"] = matrix_to_json(result.standard_error);
  }
  return j.dump(2) + "\n";
}

std::string estimate_result_json(const EstimateResult& result) {
  json j;
  j["psi_hat"] =
      std::vector<double>(result.psi_hat.data(), result.psi_hat.data() + result.psi_hat.size());
  j["objective"] = result.objective;
  j["sigma2_hat"] = result.sigma2_hat;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  if (result.a_hat.size() > 0) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < result.a_hat.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < result.a_hat.cols(); ++c)
        row.push_back({result.a_hat(i, c).real(), result.a_hat(i, c).imag()});
      rows.push_back(std::move(row));
    }
    j["a_hat"] = rows;
  }
  if (!result.alpha_hat.empty()) {
    json paths = json::array();
    for (const auto& alpha : result.alpha_hat) {
      json vec = json::array();
      for (Eigen::Index i = 0; i < alpha.size(); ++i)
        vec.push_back({alpha(i).real(), alpha(i).imag()});
      paths.push_back(std::move(vec));
    }
    j["alpha_hat"] = paths;
  }
  return j.dump(2) + "\n";
}

std::string snapshot_debug_json(const SnapshotSet& snapshots) {
  json j;
  j["m_t"] = snapshots.m_t;
  j["m_r"] = snapshots.m_r;
  j["noise_power"] = snapshots.noise_power;
  json paths = json::array();
  for (const auto& r : snapshots.paths) {
    json entry;
    std::vector<double> re(r.size()), im(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      re[i] = r(i).real();
      im[i] = r(i).imag();
    }
    entry["re"] = re;
    entry["im"] = im;
    paths.push_back(std::move(entry));
  }
  j["paths"] = paths;
  json alphas = json::array();
  for (const auto& a : snapshots.alphas) {
    json vec = json::array();
    for (Eigen::Index i = 0; i < a.size(); ++i) vec.push_back({a(i).real(), a(i).imag()});
    alphas.push_back(std::move(vec));
  }
  j["alphas"] = alphas;
  return j.dump(2) + "\n";
}

std::string orthogonality_json(const OrthogonalityReport& report) {
  json j;
  j["max_cross_correlation"] = report.max_cross_correlation;
  j["threshold"] = report.threshold;
  j["pass"] = report.pass;
  return j.dump(2) + "\n";
}

}  // namespace radarest
