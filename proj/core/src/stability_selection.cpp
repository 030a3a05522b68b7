#include "multipde/stability_selection.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "multipde/rng.hpp"

namespace multipde {

namespace {

// floor(n/2) distinct row indices, partial Fisher-Yates
std::vector<Eigen::Index> half_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const Eigen::Index k = n / 2;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.integer(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<size_t>(k));
  return idx;
}

TermLibrary take_rows(const TermLibrary& lib, const std::vector<Eigen::Index>& rows) {
  TermLibrary out;
  out.labels = lib.labels;
  out.experiment_id = lib.experiment_id;
  out.theta.resize(static_cast<Eigen::Index>(rows.size()), lib.theta.cols());
  out.dudt.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    out.theta.row(static_cast<Eigen::Index>(r)) = lib.theta.row(rows[r]);
    out.dudt[static_cast<Eigen::Index>(r)] = lib.dudt[rows[r]];
  }
  return out;
}

// one solve with a warm start; restarted from zero if the sweep cap was hit
Eigen::MatrixXd solve_grouped(const WeightedDesign& d, double lambda, const Eigen::VectorXd& pen,
                              Eigen::MatrixXd warm, const SolverOptions& opts) {
  int sweeps = 0;
  Eigen::MatrixXd b = group_lasso_bcd(d.X, d.y, lambda, pen, std::move(warm), opts, nullptr,
                                      &sweeps);
  if (sweeps >= opts.max_sweeps)
    b = group_lasso_bcd(d.X, d.y, lambda, pen,
                        Eigen::MatrixXd::Zero(b.rows(), b.cols()), opts);
  return b;
}

Eigen::VectorXd solve_single(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                             const Eigen::VectorXd& pen, Eigen::VectorXd warm,
                             const SolverOptions& opts) {
  int sweeps = 0;
  Eigen::VectorXd b = lasso_cd(X, y, lambda, pen, std::move(warm), opts, nullptr, &sweeps);
  if (sweeps >= opts.max_sweeps)
    b = lasso_cd(X, y, lambda, pen, Eigen::VectorXd::Zero(b.size()), opts);
  return b;
}

}  // namespace

StabilityReport selection_probabilities(const StackedLibrary& stacked,
                                        const StabilityConfig& cfg) {
  const int q = stacked.q();
  const int p = stacked.p();
  if (q < 1) throw std::invalid_argument("stability selection: no experiments");
  if (cfg.n_subsamples < 1 || cfg.n_lambda < 2)
    throw std::invalid_argument("stability selection: bad subsample or grid size");

  // grid anchor: full-data pilot weights, unit randomisation
  const SolverOptions& solver = cfg.solver;
  AdaptiveWeights full_w = compute_adaptive_weights(stacked, solver);
  const double lmax = lambda_max(stacked, full_w, solver);
  if (!(lmax > 0.0))
    throw std::runtime_error("stability selection: degenerate response, lambda_max is zero");

  StabilityReport rep;
  rep.p = p;
  rep.lambda = lambda_path(lmax, cfg.epsilon, cfg.n_lambda);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(cfg.n_lambda, p);

  for (int bsub = 0; bsub < cfg.n_subsamples; ++bsub) {
    const std::uint64_t sub_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(bsub));
    Rng idx_rng(mix_seed(sub_seed, 0));

    StackedLibrary sub;
    sub.labels = stacked.labels;
    for (int i = 0; i < q; ++i)
      sub.experiments.push_back(
          take_rows(stacked.experiments[i], half_indices(stacked.experiments[i].n(), idx_rng)));

    AdaptiveWeights w =
        cfg.weights_per_subsample ? compute_adaptive_weights(sub, solver) : full_w;
    w.w_random = sample_randomisation(
        p, q, cfg.grouped ? RandomisationMode::per_group : RandomisationMode::per_column,
        mix_seed(sub_seed, 1));

    WeightedDesign d = build_weighted_design(sub, w);

    if (cfg.grouped) {
      Eigen::VectorXd pen(p);
      for (int j = 0; j < p; ++j) pen[j] = 1.0 / w.w_random(0, j);
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(q, p);
      for (int k = 0; k < cfg.n_lambda; ++k) {
        b = solve_grouped(d, rep.lambda[k], pen, std::move(b), solver);
        for (int j = 0; j < p; ++j)
          if (b.col(j).cwiseAbs().maxCoeff() > 0.0) counts(k, j) += 1.0;
      }
    } else {
      Eigen::MatrixXi selected = Eigen::MatrixXi::Zero(cfg.n_lambda, p);
      for (int i = 0; i < q; ++i) {
        Eigen::VectorXd pen(p);
        for (int j = 0; j < p; ++j) pen[j] = 1.0 / w.w_random(i, j);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
        for (int k = 0; k < cfg.n_lambda; ++k) {
          b = solve_single(d.X[i], d.y[i], rep.lambda[k], pen, std::move(b), solver);
          for (int j = 0; j < p; ++j)
            if (b[j] != 0.0) selected(k, j) = 1;
        }
      }
      counts += selected.cast<double>();
    }
  }

  rep.pi_hat = counts / static_cast<double>(cfg.n_subsamples);
  rep.q_hat = rep.pi_hat.rowwise().sum();
  return rep;
}

std::vector<int> lambda_star_region(const Eigen::VectorXd& q_hat, int p, double pi_threshold,
                                    double ev_max) {
  if (!(pi_threshold > 0.5) || pi_threshold > 1.0)
    throw std::invalid_argument("lambda_star_region: threshold must be in (0.5, 1]");
  std::vector<int> region;
  const double denom = (2.0 * pi_threshold - 1.0) * static_cast<double>(p);
  for (int k = 0; k < q_hat.size(); ++k)
    if (q_hat[k] * q_hat[k] / denom <= ev_max) region.push_back(k);
  return region;
}

StabilityReport stable_set(const StackedLibrary& stacked, const StabilityConfig& cfg) {
  StabilityReport rep = selection_probabilities(stacked, cfg);
  rep.region = lambda_star_region(rep.q_hat, rep.p, cfg.pi_threshold, cfg.ev_max);
  if (rep.region.empty()) {
    rep.region_empty_fallback = true;
    int argmin = 0;
    rep.q_hat.minCoeff(&argmin);
    rep.region = {argmin};
  }
  for (int j = 0; j < rep.p; ++j) {
    double best = 0.0;
    for (int k : rep.region) best = std::max(best, rep.pi_hat(k, j));
    if (best >= cfg.pi_threshold) {
      rep.stable.push_back(j);
      rep.stable_labels.push_back(stacked.labels[j]);
    }
  }
  return rep;
}

std::string stability_report_json(const StabilityReport& rep) {
  nlohmann::json j;
  j["p"] = rep.p;
  j["lambda"] = std::vector<double>(rep.lambda.data(), rep.lambda.data() + rep.lambda.size());
  j["q_hat"] = std::vector<double>(rep.q_hat.data(), rep.q_hat.data() + rep.q_hat.size());
  j["pi_hat"] = nlohmann::json::array();
  for (int k = 0; k < rep.pi_hat.rows(); ++k) {
    std::vector<double> row(static_cast<size_t>(rep.p));
    for (int c = 0; c < rep.p; ++c) row[static_cast<size_t>(c)] = rep.pi_hat(k, c);
    j["pi_hat"].push_back(row);
  }
  j["region"] = rep.region;
  j["region_empty_fallback"] = rep.region_empty_fallback;
  j["stable"] = rep.stable;
  j["stable_labels"] = rep.stable_labels;
  return j.dump(2);
}

}  // namespace multipde
