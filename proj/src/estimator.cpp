#include "radarest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "radarest/errors.hpp"
#include "radarest/numkit.hpp"

namespace radarest {

namespace {
constexpr double kHuge = 1e300;
}

void SearchConfig::validate() const {
  if (grid.step <= 0.0 || grid.half_width <= 0.0 || grid.half_width < grid.step)
    throw ConfigError("search grid must have positive step <= half_width");
  if (starts < 1) throw ConfigError("search starts must be >= 1");
  if (refine_tol <= 0.0 || max_iters < 1)
    throw ConfigError("search refine_tol and max_iters must be positive");
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                             double x_tol, int max_iters) {
  const int dim = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(dim + 1, x0);
  std::vector<double> fs(dim + 1);
  for (int i = 0; i < dim; ++i) xs[i + 1](i) += steps(i);
  for (int i = 0; i <= dim; ++i) fs[i] = f(xs[i]);

  NelderMeadResult out;
  int iters = 0;
  std::vector<int> order(dim + 1);
  for (; iters < max_iters; ++iters) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order[0], worst = order[dim], second = order[dim - 1];

    double spread = 0.0;
    for (int i = 0; i <= dim; ++i)
      spread = std::max(spread, (xs[i] - xs[best]).cwiseAbs().maxCoeff());
    if (spread < x_tol) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i <= dim; ++i)
      if (i != worst) centroid += xs[i];
    centroid /= dim;

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = f(xr);
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const Eigen::VectorXd xc =
          centroid + 0.5 * ((fr < fs[worst] ? xr : xs[worst]) - centroid);
      const double fc = f(xc);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 0; i <= dim; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= dim; ++i)
    if (fs[i] < fs[best]) best = i;
  out.x = xs[best];
  out.value = fs[best];
  out.iterations = iters;
  return out;
}

Scenario with_positions(const Scenario& scenario, const Eigen::VectorXd& psi) {
  if (psi.size() != 2 * scenario.num_targets())
    throw std::invalid_argument("with_positions: psi must hold 2Q coordinates");
  Scenario out = scenario;
  for (int q = 0; q < scenario.num_targets(); ++q)
    out.targets[q].position = Eigen::Vector2d(psi(2 * q), psi(2 * q + 1));
  return out;
}

double stochastic_nll(const Scenario& scenario, const LfmWaveformSet& set,
                      const SnapshotSet& snapshots, const Eigen::VectorXd& psi,
                      const Eigen::MatrixXcd& a_cov, double sigma2) {
  if (sigma2 <= 0.0) throw NumericalFailure("stochastic_nll: sigma2 must be positive");
  const Scenario sc = with_positions(scenario, psi);
  double acc = 0.0;
  for (int k = 0; k < sc.num_tx(); ++k)
    for (int l = 0; l < sc.num_rx(); ++l) {
      const Eigen::MatrixXcd h = build_H(sc, set, k, l).columns;
      const LowRankCovariance cov(h, a_cov, sigma2);
      const Eigen::VectorXcd& r = snapshots.at(k, l);
      acc += cov.logdet() + std::real(r.dot(cov.solve(r)));
    }
  const double norm = static_cast<double>(sc.num_tx()) * sc.num_rx() *
                      sc.rx_arrays.front().element_count;
  return acc / norm;
}

Eigen::VectorXcd det_alpha_hat(const SteeringMatrix& h, const Eigen::VectorXcd& r) {
  const Eigen::MatrixXcd gram = h.columns.adjoint() * h.columns;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw NumericalFailure("det_alpha_hat: rank-deficient steering matrix");
  const Eigen::VectorXd d = ldlt.vectorD().real().cwiseAbs();
  if (d.minCoeff() < 1e-13 * d.maxCoeff())
    throw NumericalFailure("det_alpha_hat: rank-deficient steering matrix");
  return ldlt.solve(h.columns.adjoint() * r);
}

double det_sigma2_hat(const Scenario& scenario, const LfmWaveformSet& set,
                      const SnapshotSet& snapshots, const Eigen::VectorXd& psi) {
  const Scenario sc = with_positions(scenario, psi);
  double residual = 0.0;
  double dims = 0.0;
  for (int k = 0; k < sc.num_tx(); ++k)
    for (int l = 0; l < sc.num_rx(); ++l) {
      const Eigen::MatrixXcd h = build_H(sc, set, k, l).columns;
      const OrthProjector proj(h);
      residual += proj.apply(snapshots.at(k, l)).squaredNorm();
      dims += static_cast<double>(h.rows());
    }
  return residual / dims;
}

double det_concentrated_objective(const Scenario& scenario, const LfmWaveformSet& set,
                                  const SnapshotSet& snapshots, const Eigen::VectorXd& psi) {
  return det_sigma2_hat(scenario, set, snapshots, psi);
}

namespace {

// ---------------------------------------------------------------------------
// Nuisance fit for the stochastic model. At fixed psi the likelihood depends
// on the data only through H^H H, H^H r and ||r||^2 per path, so the inner
// iteration never touches L_r N sized vectors.
// ---------------------------------------------------------------------------

struct PathStats {
  Eigen::MatrixXcd gram;  // H^H H
  Eigen::VectorXcd hr;    // H^H r
  double r2 = 0.0;        // ||r||^2
  int n = 0;
};

std::vector<PathStats> collect_path_stats(const Scenario& sc, const LfmWaveformSet& set,
                                          const SnapshotSet& snapshots) {
  std::vector<PathStats> stats;
  stats.reserve(sc.path_count());
  for (int k = 0; k < sc.num_tx(); ++k)
    for (int l = 0; l < sc.num_rx(); ++l) {
      const Eigen::MatrixXcd h = build_H(sc, set, k, l).columns;
      const Eigen::VectorXcd& r = snapshots.at(k, l);
      PathStats s;
      s.gram = h.adjoint() * h;
      s.hr = h.adjoint() * r;
      s.r2 = r.squaredNorm();
      s.n = static_cast<int>(h.rows());
      stats.push_back(std::move(s));
    }
  return stats;
}

Eigen::MatrixXcd chol_from_params(const Eigen::VectorXd& x, int q) {
  Eigen::MatrixXcd lmat = Eigen::MatrixXcd::Zero(q, q);
  for (int i = 0; i < q; ++i) lmat(i, i) = std::exp(std::min(x(i), 200.0));
  int idx = q;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < i; ++j) {
      lmat(i, j) = std::complex<double>(x(idx), x(idx + 1));
      idx += 2;
    }
  return lmat;
}

double nll_from_stats(const std::vector<PathStats>& stats, const Eigen::MatrixXcd& lmat,
                      double sigma2, double norm) {
  const int q = static_cast<int>(lmat.rows());
  double acc = 0.0;
  for (const auto& s : stats) {
    Eigen::MatrixXcd cap = lmat.adjoint() * s.gram * lmat;  // U^H U
    cap.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXcd> llt(cap);
    if (llt.info() != Eigen::Success) return kHuge;
    double logdet = static_cast<double>(s.n - q) * std::log(sigma2);
    for (int i = 0; i < q; ++i) logdet += 2.0 * std::log(std::real(llt.matrixLLT()(i, i)));
    const Eigen::VectorXcd w = lmat.adjoint() * s.hr;
    const double quad = (s.r2 - std::real(w.dot(llt.solve(w)))) / sigma2;
    acc += logdet + quad;
  }
  return acc / norm;
}

struct NuisanceFit {
  Eigen::MatrixXcd a_cov;
  double sigma2 = 0.0;
  double nll = 0.0;
  Eigen::VectorXd x;
};

NuisanceFit fit_nuisance(const std::vector<PathStats>& stats, int q, double norm,
                         const std::optional<Eigen::VectorXd>& warm, int budget) {
  const int dim = q * q + 1;
  Eigen::VectorXd x0(dim);
  Eigen::VectorXd steps = Eigen::VectorXd::Constant(dim, 0.35);

  if (warm) {
    x0 = *warm;
    steps.setConstant(0.08);
  } else {
    // Moment start: projected per-path reflectivities and the projection
    // residual give usable scales for A and sigma^2.
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(q);
    double resid = 0.0;
    double dims = 0.0;
    for (const auto& s : stats) {
      Eigen::LDLT<Eigen::MatrixXcd> ldlt(s.gram);
      if (ldlt.info() != Eigen::Success) continue;
      const Eigen::VectorXcd ah = ldlt.solve(s.hr);
      m2 += ah.cwiseAbs2();
      resid += std::max(s.r2 - std::real(s.hr.dot(ah)), 0.0);
      dims += s.n;
    }
    m2 /= static_cast<double>(stats.size());
    const double floor = std::max(1e-12 * m2.maxCoeff(), 1e-300);
    double sigma0 = resid / std::max(dims, 1.0);
    if (!(sigma0 > 0.0)) sigma0 = floor;
    x0.setZero();
    for (int i = 0; i < q; ++i) x0(i) = 0.5 * std::log(std::max(m2(i), floor));
    x0(dim - 1) = std::log(sigma0);
  }

  const auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::MatrixXcd lmat = chol_from_params(x, q);
    const double sigma2 = std::exp(std::min(x(dim - 1), 200.0));
    if (!(sigma2 > 0.0) || !lmat.allFinite()) return kHuge;
    return nll_from_stats(stats, lmat, sigma2, norm);
  };

  const NelderMeadResult r = nelder_mead(objective, x0, steps, 1e-5, budget);
  NuisanceFit fit;
  fit.x = r.x;
  const Eigen::MatrixXcd lmat = chol_from_params(r.x, q);
  fit.a_cov = lmat * lmat.adjoint();
  fit.sigma2 = std::exp(std::min(r.x(dim - 1), 200.0));
  fit.nll = r.value;
  return fit;
}

// ---------------------------------------------------------------------------
// Coarse stage: a single-target matched-projection surface over the grid.
// ---------------------------------------------------------------------------

struct CoarseCell {
  Eigen::Vector2d pos;
  double score = 0.0;  // larger is better
  int index = 0;
};

std::vector<CoarseCell> coarse_scan(const Scenario& scenario, const LfmWaveformSet& set,
                                    const SnapshotSet& snapshots, const GridSpec& grid) {
  std::vector<double> axis;
  for (double v = -grid.half_width; v <= grid.half_width + 1e-9; v += grid.step)
    axis.push_back(v);

  Scenario probe = scenario;
  probe.targets.resize(1);
  probe.targets[0].velocity.setZero();

  std::vector<CoarseCell> cells;
  cells.reserve(axis.size() * axis.size());
  int index = 0;
  for (double dy : axis) {
    for (double dx : axis) {
      CoarseCell cell;
      cell.pos = grid.center + Eigen::Vector2d(dx, dy);
      cell.index = index++;
      probe.targets[0].position = cell.pos;
      double score = 0.0;
      try {
        for (int k = 0; k < scenario.num_tx(); ++k)
          for (int l = 0; l < scenario.num_rx(); ++l) {
            const Eigen::VectorXcd h = spatio_temporal_steering(probe, set, k, 0, l);
            const double h2 = h.squaredNorm();
            if (h2 <= 0.0) continue;
            score += std::norm(h.dot(snapshots.at(k, l))) / h2;
          }
      } catch (const DegenerateGeometry&) {
        score = 0.0;  // cell sits on an array center
      }
      cell.score = score;
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<CoarseCell> select_peaks(std::vector<CoarseCell> cells, double min_separation,
                                     int count) {
  std::stable_sort(cells.begin(), cells.end(), [](const CoarseCell& a, const CoarseCell& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  std::vector<CoarseCell> peaks;
  for (const auto& c : cells) {
    bool keep = true;
    for (const auto& p : peaks)
      if ((c.pos - p.pos).norm() < min_separation) {
        keep = false;
        break;
      }
    if (keep) peaks.push_back(c);
    if (static_cast<int>(peaks.size()) >= count) break;
  }
  return peaks;
}

void combinations(int n, int q, std::vector<std::vector<int>>& out) {
  std::vector<int> idx(q);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == q) {
      out.push_back(idx);
      return;
    }
    for (int i = start; i < n; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

}  // namespace

EstimateResult estimate(ReflectivityMode mode, const Scenario& scenario,
                        const LfmWaveformSet& set, const SnapshotSet& snapshots,
                        const SearchConfig& search) {
  search.validate();
  const int q_count = scenario.num_targets();
  const double norm = static_cast<double>(scenario.num_tx()) * scenario.num_rx() *
                      scenario.rx_arrays.front().element_count;

  // Shared state for the stochastic inner fit, warm-started across candidates.
  std::optional<Eigen::VectorXd> warm;
  const auto objective = [&](const Eigen::VectorXd& psi) -> double {
    try {
      if (mode == ReflectivityMode::deterministic)
        return det_concentrated_objective(scenario, set, snapshots, psi);
      const Scenario sc = with_positions(scenario, psi);
      const std::vector<PathStats> stats = collect_path_stats(sc, set, snapshots);
      const NuisanceFit fit =
          fit_nuisance(stats, q_count, norm, warm, warm ? 120 : 260);
      if (fit.nll < kHuge) warm = fit.x;
      return fit.nll;
    } catch (const NumericalFailure&) {
      return kHuge;
    }
  };

  // Coarse stage: single-target surface, then candidate tuples of peaks.
  const std::vector<CoarseCell> cells = coarse_scan(scenario, set, snapshots, search.grid);
  const int peak_count = std::max({3 * q_count, search.starts + q_count, 8});
  const std::vector<CoarseCell> peaks =
      select_peaks(cells, std::max(search.grid.step, 1e-6), peak_count);

  std::vector<std::vector<int>> combos;
  combinations(static_cast<int>(peaks.size()), std::min<int>(q_count, peaks.size()), combos);

  struct Candidate {
    Eigen::VectorXd psi;
    double value;
    int index;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(combos.size());
  int combo_index = 0;
  for (const auto& combo : combos) {
    Eigen::VectorXd psi(2 * q_count);
    for (int q = 0; q < q_count; ++q) {
      const CoarseCell& cell = peaks[combo[std::min<std::size_t>(q, combo.size() - 1)]];
      psi.segment<2>(2 * q) = cell.pos;
      if (static_cast<int>(combo.size()) <= q) psi.segment<2>(2 * q) += Eigen::Vector2d(
          search.grid.step * (q + 1), 0.0);  // degenerate peak list: spread targets out
    }
    candidates.push_back({psi, objective(psi), combo_index++});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.index < b.index;
  });
  if (candidates.empty()) throw NumericalFailure("estimate: empty coarse stage");

  // Refinement: simplex from the best `starts` candidates, then a polish
  // restart at the winner.
  const int starts = std::min<int>(search.starts, candidates.size());
  Eigen::VectorXd steps = Eigen::VectorXd::Constant(2 * q_count, 0.5 * search.grid.step);
  EstimateResult best;
  best.psi_hat = candidates.front().psi;
  best.objective = candidates.front().value;
  int total_iters = 0;
  bool best_converged = false;
  for (int s = 0; s < starts; ++s) {
    const NelderMeadResult run =
        nelder_mead(objective, candidates[s].psi, steps, search.refine_tol, search.max_iters);
    total_iters += run.iterations;
    if (run.value < best.objective) {
      best.objective = run.value;
      best.psi_hat = run.x;
      best_converged = run.converged;
    }
  }
  const NelderMeadResult polish =
      nelder_mead(objective, best.psi_hat, Eigen::VectorXd::Constant(2 * q_count, 4.0 * search.refine_tol),
                  search.refine_tol, search.max_iters);
  total_iters += polish.iterations;
  if (polish.value < best.objective) {
    best.objective = polish.value;
    best.psi_hat = polish.x;
  }
  best.converged = best_converged || polish.converged;
  best.iterations = total_iters;

  // Nuisance estimates at the winner.
  if (mode == ReflectivityMode::deterministic) {
    const Scenario sc = with_positions(scenario, best.psi_hat);
    best.sigma2_hat = det_sigma2_hat(scenario, set, snapshots, best.psi_hat);
    best.objective = best.sigma2_hat;
    for (int k = 0; k < sc.num_tx(); ++k)
      for (int l = 0; l < sc.num_rx(); ++l)
        best.alpha_hat.push_back(det_alpha_hat(build_H(sc, set, k, l), snapshots.at(k, l)));
  } else {
    const Scenario sc = with_positions(scenario, best.psi_hat);
    const std::vector<PathStats> stats = collect_path_stats(sc, set, snapshots);
    const NuisanceFit fit = fit_nuisance(stats, q_count, norm, warm, 400);
    best.a_hat = fit.a_cov;
    best.sigma2_hat = fit.sigma2;
    best.objective =
        stochastic_nll(scenario, set, snapshots, best.psi_hat, fit.a_cov, fit.sigma2);
  }
  return best;
}

Eigen::VectorXd match_targets(const Eigen::VectorXd& psi_hat, const Eigen::VectorXd& psi_true) {
  if (psi_hat.size() != psi_true.size() || psi_hat.size() % 2 != 0)
    throw std::invalid_argument("match_targets: mismatched psi sizes");
  const int q_count = static_cast<int>(psi_hat.size()) / 2;
  std::vector<int> perm(q_count), best_perm(q_count);
  std::iota(perm.begin(), perm.end(), 0);
  best_perm = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int q = 0; q < q_count; ++q)
      cost += (psi_hat.segment<2>(2 * perm[q]) - psi_true.segment<2>(2 * q)).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Eigen::VectorXd out(psi_hat.size());
  for (int q = 0; q < q_count; ++q) out.segment<2>(2 * q) = psi_hat.segment<2>(2 * best_perm[q]);
  return out;
}

}  // namespace radarest
