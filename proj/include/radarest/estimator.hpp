#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "radarest/scenario.hpp"
#include "radarest/signal.hpp"
#include "radarest/waveform.hpp"

namespace radarest {

struct GridSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double half_width = 200.0;  // meters
  double step = 10.0;         // meters
};

struct SearchConfig {
  GridSpec grid;
  int starts = 6;
  double refine_tol = 1e-3;  // simplex size in meters at which refinement stops
  int max_iters = 400;       // per refinement run

  void validate() const;
};

struct EstimateResult {
  Eigen::VectorXd psi_hat;               // positions, 2Q
  double objective = 0.0;                // model objective at psi_hat
  Eigen::MatrixXcd a_hat;                // stochastic mode
  double sigma2_hat = 0.0;
  std::vector<Eigen::VectorXcd> alpha_hat;  // deterministic mode, per path
  int iterations = 0;
  bool converged = false;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimizer; deterministic for a given start.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                             double x_tol, int max_iters);

/// Copy of `scenario` with target positions replaced by psi (2Q, x-y pairs).
Scenario with_positions(const Scenario& scenario, const Eigen::VectorXd& psi);

/// Stochastic negative log-likelihood
/// (1/(M_r M_t L_r)) sum_kl [log|R_kl| + r^H R_kl^-1 r] at candidate
/// (psi, A, sigma^2), evaluated through the low-rank covariance form.
double stochastic_nll(const Scenario& scenario, const LfmWaveformSet& set,
                      const SnapshotSet& snapshots, const Eigen::VectorXd& psi,
                      const Eigen::MatrixXcd& a_cov, double sigma2);

/// (H^H H)^{-1} H^H r.
Eigen::VectorXcd det_alpha_hat(const SteeringMatrix& h, const Eigen::VectorXcd& r);

/// Mean squared projection residual (1/(L_r N M_t M_r)) sum Tr{Pi_perp r r^H}.
double det_sigma2_hat(const Scenario& scenario, const LfmWaveformSet& set,
                      const SnapshotSet& snapshots, const Eigen::VectorXd& psi);

/// The concentrated deterministic likelihood: identical to det_sigma2_hat.
double det_concentrated_objective(const Scenario& scenario, const LfmWaveformSet& set,
                                  const SnapshotSet& snapshots, const Eigen::VectorXd& psi);

/// Coarse grid scan plus multistart simplex refinement over target positions.
/// Stochastic mode nests an alternating nuisance fit of (A, sigma^2) at every
/// candidate psi. Deterministic given (snapshots, search config).
EstimateResult estimate(ReflectivityMode mode, const Scenario& scenario,
                        const LfmWaveformSet& set, const SnapshotSet& snapshots,
                        const SearchConfig& search);

/// Reorders estimated targets to the minimum-total-squared-distance matching
/// against the truth; the likelihood is invariant to target relabeling.
Eigen::VectorXd match_targets(const Eigen::VectorXd& psi_hat, const Eigen::VectorXd& psi_true);

}  // namespace radarest
