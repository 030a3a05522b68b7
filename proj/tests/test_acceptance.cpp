// End-to-end acceptance suite. Each case prints one PASS/FAIL line; the
// full-pipeline cases share one set of trained runs and dominate the runtime.
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "multipde/discovery_engine.hpp"
#include "multipde/feature_library.hpp"
#include "multipde/rng.hpp"
#include "multipde/sparse_solvers.hpp"
#include "multipde/stability_selection.hpp"
#include "multipde/synthetic_data.hpp"

using namespace multipde;

namespace {

// Training budget for the full-pipeline criteria, sized for a single CPU
// core. The optimizer defaults (lr 5e-5, plateau delta 1e-6) converge too
// slowly to trigger selection inside the per-seed runtime budget, so the
// pipeline runs use a faster schedule with a looser plateau test.
constexpr double kPipelineLr = 2e-4;
constexpr double kPipelineMinDelta = 1e-3;
constexpr int kPipelineMaxEpochs = 8000;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void verdict(int index, const std::string& what, bool ok) {
  std::printf("AC%d %s: %s\n", index, what.c_str(), ok ? "PASS" : "FAIL");
  std::fflush(stdout);
}

std::vector<Experiment> case1_experiments(double noise, int n_samples) {
  std::vector<Experiment> exps;
  int k = 0;
  for (double nu : {0.1, 0.2, 0.4}) {
    Experiment e = burgers_delta(nu, linspace(-3.0, 4.0, 256), linspace(0.2, 2.0, 64));
    if (noise > 0.0) e = add_noise(e, noise, 42 + 2 * k);
    if (n_samples > 0) {
      SubsampleSpec s;
      s.strategy = SampleStrategy::random;
      s.n = n_samples;
      s.seed = 7;
      e = subsample(e, s);
    }
    exps.push_back(std::move(e));
    ++k;
  }
  return exps;
}

std::set<std::string> active_labels(const StabilityReport& rep) {
  return {rep.stable_labels.begin(), rep.stable_labels.end()};
}

// stability selection + masked ridge refit on finite-difference libraries
struct OracleFit {
  std::vector<std::string> labels;
  StabilityReport report;
  Eigen::MatrixXd xi;
};

OracleFit oracle_fit(const std::vector<Experiment>& exps, std::uint64_t seed,
                     double ridge_alpha = 1e-5, bool analytic = false, double epsilon = 1e-3,
                     bool pooled = false, int n_lambda = 50) {
  std::vector<TermLibrary> libs;
  for (const auto& e : exps)
    libs.push_back(analytic ? build_library_analytic(e) : build_library_fd(e));
  StackedLibrary stack = StackedLibrary::from(libs);
  StabilityConfig cfg;
  cfg.seed = seed;
  cfg.solver.pilot_ridge_alpha = ridge_alpha;
  cfg.solver.pooled_pilot = pooled;
  cfg.epsilon = epsilon;
  cfg.n_lambda = n_lambda;
  OracleFit fit;
  fit.labels = stack.labels;
  fit.report = stable_set(stack, cfg);
  SparsityMask mask = update_mask({fit.report}, DiscoveryMode::grouped, stack.q(), stack.p(), 0);
  fit.xi.resize(stack.q(), stack.p());
  for (int i = 0; i < stack.q(); ++i)
    fit.xi.row(i) =
        refit_coefficients(stack.experiments[i], mask.active[i], ridge_alpha).transpose();
  return fit;
}

// the ten trained runs behind AC3, AC4 and AC5, computed once
struct PipelineRuns {
  std::vector<DiscoveryResult> grouped, individual;
  GroundTruth truth;
  std::vector<Experiment> exps;
};

const PipelineRuns& case1_runs() {
  static const PipelineRuns runs = [] {
    PipelineRuns r;
    r.exps = case1_experiments(0.10, 2000);
    r.truth = ground_truth(r.exps);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (DiscoveryMode mode : {DiscoveryMode::grouped, DiscoveryMode::individual}) {
        DiscoveryConfig cfg;
        cfg.mode = mode;
        cfg.seed = seed;
        cfg.lr = kPipelineLr;
        cfg.trigger.min_delta = kPipelineMinDelta;
        cfg.max_epochs = kPipelineMaxEpochs;
        Timer t;
        DiscoveryResult res = run_discovery(r.exps, cfg);
        std::printf("  [pipeline] %s seed %llu: epochs=%d fixpoint=%d test_mse=%.4e (%.0f s)\n",
                    mode == DiscoveryMode::grouped ? "grouped" : "individual",
                    static_cast<unsigned long long>(seed), res.epochs,
                    static_cast<int>(res.mask_fixpoint), res.test_mse_total, t.seconds());
        std::fflush(stdout);
        (mode == DiscoveryMode::grouped ? r.grouped : r.individual).push_back(std::move(res));
      }
    }
    return r;
  }();
  return runs;
}

std::set<std::string> support_of(const DiscoveryResult& res, int experiment) {
  std::set<std::string> s;
  for (int j = 0; j < static_cast<int>(res.labels.size()); ++j)
    if (res.final_mask.active[experiment][j] && res.xi(experiment, j) != 0.0)
      s.insert(res.labels[j]);
  return s;
}

}  // namespace

TEST_CASE("AC1 noiseless Burgers libraries, grouped selection and refit") {
  Timer t;
  const std::vector<Experiment> exps = case1_experiments(0.0, 1000);
  // a 25-point path still reaches the 1e-3 floor and keeps the run in budget
  const OracleFit fit = oracle_fit(exps, 11, 1e-5, false, 1e-3, false, 25);

  const bool support_ok = active_labels(fit.report) == std::set<std::string>{"u_xx", "u·u_x"};
  bool coeff_ok = support_ok;
  if (support_ok) {
    const int j_diff = label_index(fit.labels, "u_xx");
    const int j_adv = label_index(fit.labels, "u·u_x");
    const double nus[] = {0.1, 0.2, 0.4};
    for (int i = 0; i < 3; ++i) {
      coeff_ok = coeff_ok && std::abs(fit.xi(i, j_diff) - nus[i]) <= 0.05 * nus[i];
      coeff_ok = coeff_ok && std::abs(fit.xi(i, j_adv) + 1.0) <= 0.05;
    }
  }
  const bool time_ok = t.seconds() < 30.0;
  verdict(1, "noiseless Burgers support and coefficients", support_ok && coeff_ok && time_ok);
  CHECK(support_ok);
  CHECK(coeff_ok);
  CHECK(time_ok);
}

TEST_CASE("AC2 noiseless KdV libraries, single plus double soliton") {
  Timer t;
  std::vector<Experiment> exps = {
      kdv_solitons(SolitonKind::single, {1.5}, linspace(-10.0, 10.0, 512), linspace(0.0, 2.0, 64)),
      kdv_solitons(SolitonKind::two, {1.5, 0.5}, linspace(-15.0, 15.0, 512),
                   linspace(0.0, 8.0, 128))};
  for (auto& e : exps) {
    SubsampleSpec s;
    s.strategy = SampleStrategy::random;
    s.n = 1000;
    s.seed = 7;
    e = subsample(e, s);
  }
  // exact derivative jets; the soliton pair shares one coefficient vector, so a
  // pooled near-unregularised pilot plus a long path separates the dispersive
  // term from the advection family on this collinear problem
  const OracleFit fit = oracle_fit(exps, 12, 1e-10, true, 1e-5, true);
  const bool support_ok = active_labels(fit.report) == std::set<std::string>{"u·u_x", "u_xxx"};
  const bool time_ok = t.seconds() < 30.0;
  verdict(2, "noiseless KdV support", support_ok && time_ok);
  CHECK(support_ok);
  CHECK(time_ok);
}

TEST_CASE("AC3 full pipeline, grouped support recovery across seeds") {
  const PipelineRuns& runs = case1_runs();
  int hits = 0;
  for (const auto& res : runs.grouped)
    if (metrics(res, runs.truth).success) ++hits;
  const bool ok = hits >= 4;
  verdict(3, "grouped recovery in " + std::to_string(hits) + "/5 seeds", ok);
  CHECK(ok);
}

TEST_CASE("AC4 full pipeline, grouped vs individual held-out MSE") {
  const PipelineRuns& runs = case1_runs();
  int wins = 0;
  for (size_t s = 0; s < runs.grouped.size(); ++s)
    if (runs.grouped[s].test_mse_total <= runs.individual[s].test_mse_total) ++wins;
  const bool ok = wins >= 4;
  verdict(4, "grouped MSE <= individual in " + std::to_string(wins) + "/5 seeds", ok);
  CHECK(ok);
}

TEST_CASE("AC5 individual mode drops the advection term at high viscosity") {
  const PipelineRuns& runs = case1_runs();
  int misses = 0;
  for (const auto& res : runs.individual)
    if (!support_of(res, 2).count("u·u_x")) ++misses;  // experiment 2 is nu = 0.4
  const bool ok = misses >= 2;
  verdict(5, "individual omits u·u_x in " + std::to_string(misses) + "/5 seeds", ok);
  CHECK(ok);
}

TEST_CASE("AC6 stability selection false positive control") {
  Timer t;
  Rng rng(606);
  const int n = 200, p = 20, k_true = 3, n_problems = 200;
  double fp_total = 0.0;
  for (int prob = 0; prob < n_problems; ++prob) {
    TermLibrary lib;
    lib.theta.resize(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) lib.theta(i, j) = rng.normal();
    std::vector<int> order(p);
    for (int j = 0; j < p; ++j) order[j] = j;
    for (int j = p - 1; j > 0; --j)
      std::swap(order[j], order[static_cast<int>(rng.integer(static_cast<std::uint64_t>(j + 1)))]);
    std::set<int> truth(order.begin(), order.begin() + k_true);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int j : truth) beta[j] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
    lib.dudt = lib.theta * beta;
    for (int i = 0; i < n; ++i) lib.dudt[i] += 0.5 * rng.normal();
    for (int j = 0; j < p; ++j) lib.labels.push_back("v" + std::to_string(j));

    StabilityConfig cfg;
    cfg.seed = 7000 + static_cast<std::uint64_t>(prob);
    StabilityReport rep = stable_set(StackedLibrary::from({lib}), cfg);
    for (const std::string& lab : rep.stable_labels)
      if (!truth.count(std::stoi(lab.substr(1)))) fp_total += 1.0;
  }
  const double mean_fp = fp_total / n_problems;
  const bool fp_ok = mean_fp <= 3.0;
  const bool time_ok = t.seconds() < 300.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "mean false positives %.3f", mean_fp);
  verdict(6, buf, fp_ok && time_ok);
  CHECK(fp_ok);
  CHECK(time_ok);
}

TEST_CASE("AC7 singleton groups reduce to the plain fit, KKT certified") {
  Rng rng(707);
  bool all_ok = true;
  for (int prob = 0; prob < 100; ++prob) {
    const int n = 60, p = 12;
    TermLibrary lib;
    lib.theta.resize(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) lib.theta(i, j) = rng.normal();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < 3; ++j) beta[static_cast<int>(rng.integer(p))] = rng.uniform(-2.0, 2.0);
    lib.dudt = lib.theta * beta;
    for (int i = 0; i < n; ++i) lib.dudt[i] += 0.1 * rng.normal();
    for (int j = 0; j < p; ++j) lib.labels.push_back("v" + std::to_string(j));

    StackedLibrary stack = StackedLibrary::from({lib});
    SolverOptions opts;
    AdaptiveWeights w = compute_adaptive_weights(stack, opts);
    w.w_random = sample_randomisation(p, 1, RandomisationMode::per_column,
                                      900 + static_cast<std::uint64_t>(prob));
    const double lam = 0.2 * lambda_max(stack, w);
    FitResult single = adaptive_lasso_fit(lib, lam, w, opts);
    FitResult group = group_lasso_fit(stack, lam, w, opts);

    all_ok = all_ok && single.support == group.support;
    all_ok = all_ok && (single.xi - group.xi).cwiseAbs().maxCoeff() < 1e-6;
    all_ok = all_ok && single.kkt_residual <= opts.kkt_tol && group.kkt_residual <= opts.kkt_tol;
    CHECK(single.support == group.support);
    CHECK((single.xi - group.xi).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(single.kkt_residual <= opts.kkt_tol);
    CHECK(group.kkt_residual <= opts.kkt_tol);
  }
  verdict(7, "singleton-group equivalence and KKT on 100 problems", all_ok);
}

TEST_CASE("AC8 network input derivatives match finite differences") {
  Rng rng(808);
  bool all_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    NetworkConfig c;
    c.depth = 2 + static_cast<int>(rng.integer(2));
    c.width = 2 + static_cast<int>(rng.integer(7));
    c.omega0 = 1.0 + 4.0 * rng.uniform();
    c.seed = rng.integer(1u << 30);
    const NetworkParams params = init_network(c);
    Eigen::MatrixXd pts(3, 2);
    for (int i = 0; i < 3; ++i) {
      pts(i, 0) = rng.uniform(-1.0, 1.0);
      pts(i, 1) = rng.uniform(-1.0, 1.0);
    }
    const DerivativeBundle d = input_derivatives(params, pts, 5);
    for (int i = 0; i < 3; ++i) {
      for (int k = 1; k <= 5; ++k) {
        const double h = (k <= 2) ? 1e-4 : (k == 3 ? 1e-3 : 2e-2);
        auto f = [&](double xx) {
          Eigen::MatrixXd pt(1, 2);
          pt << xx, pts(i, 1);
          return forward(params, pt)(0);
        };
        const double x = pts(i, 0);
        double fd = 0.0;
        switch (k) {
          case 1: fd = (f(x + h) - f(x - h)) / (2 * h); break;
          case 2: fd = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h); break;
          case 3:
            fd = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
            break;
          case 4:
            fd = (f(x + 2 * h) - 4 * f(x + h) + 6 * f(x) - 4 * f(x - h) + f(x - 2 * h)) /
                 (h * h * h * h);
            break;
          case 5:
            fd = (f(x + 3 * h) - 4 * f(x + 2 * h) + 5 * f(x + h) - 5 * f(x - h) +
                  4 * f(x - 2 * h) - f(x - 3 * h)) /
                 (2 * h * h * h * h * h);
            break;
        }
        const double tol = (k <= 3) ? 1e-5 : 1e-2;
        const double scale = std::max(d.dx[k - 1].cwiseAbs().maxCoeff(), 1e-8);
        const bool ok = std::abs(d.dx[k - 1](i) - fd) / scale < tol;
        all_ok = all_ok && ok;
        CHECK(ok);
      }
    }
  }
  verdict(8, "derivative orders 1-5 on 50 random networks", all_ok);
}

TEST_CASE("AC9 ridge sensitivity and grouped penalty on the noisy KdV case") {
  // library-level half: the selected support moves with the pilot ridge alpha
  std::vector<Experiment> exps;
  {
    Experiment a = kdv_solitons(SolitonKind::single, {1.5}, linspace(-10.0, 10.0, 512),
                                linspace(0.0, 2.0, 64));
    Experiment b = kdv_solitons(SolitonKind::two, {1.5, 0.5}, linspace(-15.0, 15.0, 512),
                                linspace(0.0, 8.0, 128));
    a = add_noise(a, 0.02, 91);
    b = add_noise(b, 0.02, 92);
    exps = {a, b};
  }
  std::vector<Experiment> thin = exps;
  for (auto& e : thin) {
    SubsampleSpec s;
    s.strategy = SampleStrategy::random;
    s.n = 2000;
    s.seed = 7;
    e = subsample(e, s);
  }
  std::set<std::set<std::string>> supports;
  for (double alpha : {1e-7, 1e-5, 1e-3, 1e-2}) {
    const OracleFit fit = oracle_fit(thin, 13, alpha);
    supports.insert(active_labels(fit.report));
  }
  const bool sensitive = supports.size() >= 2;

  // training half: forcing one shared support across the two datasets hurts
  // the held-out fit relative to fitting them independently
  SubsampleSpec s;
  s.strategy = SampleStrategy::random;
  s.n = 1500;
  s.seed = 7;
  std::vector<Experiment> sampled = {subsample(exps[0], s), subsample(exps[1], s)};
  double mse[2] = {0.0, 0.0};
  int idx = 0;
  for (DiscoveryMode mode : {DiscoveryMode::grouped, DiscoveryMode::individual}) {
    DiscoveryConfig cfg;
    cfg.mode = mode;
    cfg.seed = 3;
    cfg.lr = kPipelineLr;
    cfg.trigger.min_delta = kPipelineMinDelta;
    cfg.max_epochs = kPipelineMaxEpochs;
    DiscoveryResult res = run_discovery(sampled, cfg);
    mse[idx++] = res.test_mse_total;
    std::printf("  [kdv] %s: epochs=%d test_mse=%.4e\n",
                mode == DiscoveryMode::grouped ? "grouped" : "individual", res.epochs,
                res.test_mse_total);
    std::fflush(stdout);
  }
  const bool direction = mse[0] > mse[1];
  verdict(9, "support moves with ridge alpha, grouped MSE exceeds individual",
          sensitive && direction);
  CHECK(sensitive);
  CHECK(direction);
}
