#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "radarest/scenario.hpp"
#include "radarest/signal.hpp"
#include "radarest/waveform.hpp"

namespace radarest {

/// Flat indexing of the parameter vector psi: component p of target q sits at
/// q * P + p, components ordered (x, y, v_x, v_y). P is 2 (position only, the
/// reference experiments) or 4 (position and velocity).
struct ParamIndex {
  int target = 0;
  int component = 0;
  int flat = 0;
  static ParamIndex from_flat(int flat, int params_per_target) {
    return {flat / params_per_target, flat % params_per_target, flat};
  }
};

struct BoundResult {
  Eigen::MatrixXd matrix;               // CRLB or EMCB, PQ x PQ
  Eigen::VectorXd per_param_variance;   // diagonal
  double conditioning = 0.0;            // of the inverted information
  int trials = 0;                       // EMCB only: accepted draws
  Eigen::MatrixXd standard_error;       // EMCB only: per-entry Monte Carlo SE
  int rejected_draws = 0;               // EMCB only
};

/// Analytic d h_kl^q / d(psi^q)_p via the chain rule over delay, bearings,
/// Doppler and propagation loss.
Eigen::VectorXcd steering_derivative(const Scenario& scenario, const LfmWaveformSet& set, int k,
                                     int q, int l, int component, int params_per_target = 2);

/// D_kl: all PQ derivative columns for one path, column order q * P + p.
Eigen::MatrixXcd steering_derivatives_all(const Scenario& scenario, const LfmWaveformSet& set,
                                          int k, int l, int params_per_target = 2);

/// CRLB on psi under the stochastic reflectivity model with the covariance A
/// and the noise power treated as nuisance. Inner products run through
/// Q-sized kernels; no (L_r N)^2 object is ever formed.
BoundResult stochastic_crlb(const Scenario& scenario, const LfmWaveformSet& set,
                            const Eigen::MatrixXcd& a_cov, double sigma2,
                            int params_per_target = 2);

/// Dense FIM over [psi, rho, sigma^2] (rho parameterizes A entry-wise); test
/// oracle, guarded to L_r N <= 64. An alternative rho basis exercises the
/// parameterization-invariance property.
Eigen::MatrixXd stochastic_fim_full(
    const Scenario& scenario, const LfmWaveformSet& set, const Eigen::MatrixXcd& a_cov,
    double sigma2, int params_per_target = 2,
    const std::optional<std::vector<Eigen::MatrixXcd>>& rho_basis = std::nullopt);

/// Canonical Hermitian basis used by stochastic_fim_full for rho.
std::vector<Eigen::MatrixXcd> hermitian_basis(int q);

/// CRLB on psi under the deterministic model at fixed per-path reflectivities.
BoundResult deterministic_crlb(const Scenario& scenario, const LfmWaveformSet& set,
                               const std::vector<Eigen::VectorXcd>& alphas, double sigma2,
                               int params_per_target = 2);

/// Dense FIM over [psi, alpha (re/im per path), sigma^2]; test oracle.
Eigen::MatrixXd deterministic_fim_full(const Scenario& scenario, const LfmWaveformSet& set,
                                       const std::vector<Eigen::VectorXcd>& alphas, double sigma2,
                                       int params_per_target = 2);

/// Extended Miller-Chang bound: Monte Carlo mean of the deterministic CRLB
/// over alpha_kl ~ CN(0, A). Draw t, path p uses substream (2001, t, p) of
/// `seed`. Draws whose information cannot be inverted are rejected and
/// counted; more than 1% rejections is an error.
BoundResult emcb(const Scenario& scenario, const LfmWaveformSet& set,
                 const Eigen::MatrixXcd& a_cov, double sigma2, int trials, std::uint64_t seed,
                 int params_per_target = 2);

}  // namespace radarest
