#include "multipde/discovery_engine.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "multipde/feature_library.hpp"
#include "multipde/rng.hpp"
#include "multipde/sparse_solvers.hpp"

using namespace multipde;

namespace {

Experiment sampled_burgers(double nu, int nx, int nt, int n_samples, std::uint64_t seed) {
  Experiment exp = burgers_delta(nu, linspace(-3.0, 4.0, nx), linspace(0.2, 2.0, nt));
  SubsampleSpec spec;
  spec.strategy = SampleStrategy::random;
  spec.n = n_samples;
  spec.seed = seed;
  return subsample(exp, spec);
}

DiscoveryConfig small_config(std::uint64_t seed) {
  DiscoveryConfig cfg;
  cfg.network.width = 24;
  cfg.network.depth = 4;
  cfg.lr = 2e-4;  // faster than the production default, small net tolerates it
  cfg.max_epochs = 600;
  cfg.trigger.patience = 80;
  cfg.trigger.period = 120;
  cfg.trigger.min_delta = 1e-3;  // coarse plateau detection keeps the runs short
  cfg.stability.n_subsamples = 10;
  cfg.stability.n_lambda = 15;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("loss vanishes when the network reproduces the data and the mask is empty") {
  NetworkConfig nc;
  nc.width = 12;
  nc.seed = 3;
  NetworkParams net = init_network(nc);
  net.layers[0].weight.col(1).setZero();  // no t dependence, so du/dt == 0

  Rng rng(5);
  Experiment exp;
  exp.samples_xt.resize(40, 2);
  for (int r = 0; r < 40; ++r) {
    exp.samples_xt(r, 0) = rng.uniform(-1.0, 1.0);
    exp.samples_xt(r, 1) = rng.uniform(0.0, 1.0);
  }
  exp.samples_u = forward(net, exp.samples_xt);

  SparsityMask zero_mask = all_ones_mask(1, 36);
  for (auto& row : zero_mask.active) std::fill(row.begin(), row.end(), char{0});
  LossBreakdown lb = compute_loss({net}, {InputScaling{}}, {exp}, zero_mask,
                                  Eigen::MatrixXd::Zero(1, 36));
  CHECK(lb.total == doctest::Approx(0.0).epsilon(1e-24));
  CHECK(lb.data_term[0] == 0.0);
  CHECK(lb.reg_term[0] < 1e-24);
}

TEST_CASE("all-zero mask leaves exactly the time-derivative energy") {
  NetworkConfig nc;
  nc.width = 10;
  nc.seed = 7;
  NetworkParams net = init_network(nc);
  Rng rng(9);
  Experiment exp;
  exp.samples_xt.resize(30, 2);
  for (int r = 0; r < 30; ++r) {
    exp.samples_xt(r, 0) = rng.uniform(-1.0, 1.0);
    exp.samples_xt(r, 1) = rng.uniform(-1.0, 1.0);
  }
  exp.samples_u = Eigen::VectorXd::Zero(30);

  SparsityMask zero_mask = all_ones_mask(1, 36);
  for (auto& row : zero_mask.active) std::fill(row.begin(), row.end(), char{0});
  LossBreakdown lb = compute_loss({net}, {InputScaling{}}, {exp}, zero_mask,
                                  Eigen::MatrixXd::Zero(1, 36));
  DerivativeBundle b = input_derivatives(net, exp.samples_xt, 1);
  CHECK(lb.reg_term[0] == doctest::Approx(b.dt.squaredNorm() / 30.0).epsilon(1e-14));
  CHECK(lb.data_term[0] == doctest::Approx(b.value.squaredNorm() / 30.0).epsilon(1e-14));
}

TEST_CASE("refit on the true support recovers the generating coefficients") {
  const double nu = 0.1;
  Experiment exp = burgers_delta(nu, linspace(-3.0, 4.0, 256), linspace(0.2, 2.0, 64));
  TermLibrary lib = build_library_fd(exp, 5, 5);
  std::vector<char> mask(36, 0);
  const int j_uxx = label_index(lib.labels, "u_xx");
  const int j_uux = label_index(lib.labels, "u·u_x");
  mask[static_cast<size_t>(j_uxx)] = 1;
  mask[static_cast<size_t>(j_uux)] = 1;

  Eigen::VectorXd xi = refit_coefficients(lib, mask, 1e-5);
  CHECK(std::abs(xi[j_uxx] - nu) < 0.02 * nu);
  CHECK(std::abs(xi[j_uux] + 1.0) < 0.02);
  for (int j = 0; j < 36; ++j)
    if (j != j_uxx && j != j_uux) CHECK(xi[j] == 0.0);

  Eigen::VectorXd empty = refit_coefficients(lib, std::vector<char>(36, 0), 1e-5);
  CHECK(empty.norm() == 0.0);
}

TEST_CASE("refit with zero penalty and a full-rank dictionary is plain least squares") {
  Rng rng(13);
  TermLibrary lib;
  lib.labels = {"a", "b", "c"};
  lib.theta.resize(50, 3);
  lib.dudt.resize(50);
  for (int r = 0; r < 50; ++r) {
    for (int c = 0; c < 3; ++c) lib.theta(r, c) = rng.normal();
    lib.dudt[r] = rng.normal();
  }
  Eigen::VectorXd xi = refit_coefficients(lib, std::vector<char>(3, 1), 0.0);
  Eigen::VectorXd ols = lib.theta.colPivHouseholderQr().solve(lib.dudt);
  CHECK((xi - ols).norm() < 1e-8 * std::max(1.0, ols.norm()));
}

TEST_CASE("trigger logic follows the plateau rule") {
  TriggerConfig trig;
  trig.patience = 5;
  trig.period = 3;
  trig.min_delta = 1e-6;

  std::vector<double> decreasing;
  for (int e = 0; e < 50; ++e) decreasing.push_back(1.0 / (1.0 + e));
  CHECK(!trigger_check(decreasing, trig, -1));

  std::vector<double> flat(6, 1.0);
  CHECK(trigger_check(flat, trig, -1));
  CHECK(!trigger_check(std::vector<double>(5, 1.0), trig, -1));

  // minimum at epoch 3, then increasing: fires exactly patience epochs later
  std::vector<double> vee = {1.0, 0.8, 0.6, 0.5};
  for (int e = 0; e < 12; ++e) {
    vee.push_back(0.5 + 0.01 * (e + 1));
    const bool fired = trigger_check(vee, trig, -1);
    const int epochs_since_min = static_cast<int>(vee.size()) - 1 - 3;
    CHECK(fired == (epochs_since_min >= trig.patience));
  }

  // period gate counts from the last trigger
  std::vector<double> long_flat(30, 1.0);
  CHECK(!trigger_check(long_flat, trig, 28));
  CHECK(trigger_check(long_flat, trig, 26));
  CHECK_THROWS_AS(trigger_check({}, trig, -1), std::invalid_argument);
}

TEST_CASE("mask update replicates the grouped stable set and keeps provenance") {
  StabilityReport rep;
  rep.p = 6;
  rep.stable = {1, 4};
  SparsityMask m = update_mask({rep}, DiscoveryMode::grouped, 3, 6, 1234);
  REQUIRE(m.q() == 3);
  CHECK(m.trigger_epoch == 1234);
  for (int i = 0; i < 3; ++i) {
    CHECK(m.active[static_cast<size_t>(i)] ==
          std::vector<char>({0, 1, 0, 0, 1, 0}));
    CHECK(m.stable[static_cast<size_t>(i)] == std::vector<int>({1, 4}));
  }

  StabilityReport all;
  all.p = 4;
  all.stable = {0, 1, 2, 3};
  SparsityMask ones = update_mask({all}, DiscoveryMode::grouped, 2, 4, 0);
  for (const auto& row : ones.active)
    CHECK(row == std::vector<char>(4, 1));

  CHECK_THROWS_AS(update_mask({rep, rep}, DiscoveryMode::grouped, 3, 6, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(update_mask({rep}, DiscoveryMode::individual, 3, 6, 0), std::invalid_argument);

  StabilityReport other;
  other.p = 6;
  other.stable = {2};
  SparsityMask indiv = update_mask({rep, other}, DiscoveryMode::individual, 2, 6, 10);
  CHECK(indiv.active[0] == std::vector<char>({0, 1, 0, 0, 1, 0}));
  CHECK(indiv.active[1] == std::vector<char>({0, 0, 1, 0, 0, 0}));
}

TEST_CASE("metric arithmetic") {
  DiscoveryResult res;
  res.labels = term_labels(5, 5);
  res.xi = Eigen::MatrixXd::Zero(2, 36);
  GroundTruth truth;
  truth.active_terms = {"u_xx", "u·u_x"};
  const int j_uxx = label_index(res.labels, "u_xx");
  const int j_uux = label_index(res.labels, "u·u_x");
  for (int i = 0; i < 2; ++i) {
    const double nu = 0.1 * (i + 1);
    truth.coefficients.push_back({{"u_xx", nu}, {"u·u_x", -1.0}});
    res.xi(i, j_uxx) = nu;
    res.xi(i, j_uux) = -1.0;
  }

  Metrics exact = metrics(res, truth);
  CHECK(exact.success);
  CHECK(exact.coeff_error == 0.0);

  DiscoveryResult scaled = res;
  scaled.xi *= 0.9;
  Metrics off = metrics(scaled, truth);
  CHECK(off.success);  // support unchanged
  CHECK(off.coeff_error == doctest::Approx(0.1).epsilon(1e-12));

  DiscoveryResult extra = res;
  extra.xi(0, label_index(res.labels, "u_x")) = 1e-9;
  CHECK(!metrics(extra, truth).success);

  DiscoveryResult missing = res;
  missing.xi(1, j_uux) = 0.0;
  CHECK(!metrics(missing, truth).success);
}

TEST_CASE("shared trunk stays within the parameter budget") {
  NetworkConfig nc;  // depth 4, width 65
  for (int q : {1, 2, 3, 5}) {
    const int w = shared_trunk_width(nc, q);
    long trunk = 2L * w + w + (static_cast<long>(w) * w + w);
    long head = static_cast<long>(w) * w + w + w + 1;
    const double total = static_cast<double>(trunk + q * head);
    const double target = static_cast<double>(parameter_count(nc)) * q;
    CHECK(std::abs(total - target) / target < 0.05);
  }
}

TEST_CASE("config validation rejects bad values") {
  DiscoveryConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.train_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DiscoveryConfig{};
  cfg.trigger.patience = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DiscoveryConfig{};
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DiscoveryConfig{};
  cfg.max_order = 6;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("training loss decreases on noiseless data") {
  Experiment exp = sampled_burgers(0.1, 128, 32, 400, 77);
  DiscoveryConfig cfg = small_config(2);
  cfg.max_epochs = 200;
  cfg.trigger.patience = 1000;  // no trigger in this window
  DiscoveryResult res = run_discovery({exp}, cfg);
  REQUIRE(res.trace.size() == 200);
  CHECK(res.trace.back().total < res.trace.front().total);
  CHECK(res.trace.back().data < res.trace.front().data);
}

TEST_CASE("grouped and individual modes coincide for a single experiment") {
  Experiment exp = sampled_burgers(0.2, 128, 32, 300, 78);
  DiscoveryConfig cfg = small_config(4);
  cfg.max_epochs = 400;

  DiscoveryConfig gi = cfg;
  gi.mode = DiscoveryMode::grouped;
  DiscoveryResult g = run_discovery({exp}, gi);
  gi.mode = DiscoveryMode::individual;
  DiscoveryResult s = run_discovery({exp}, gi);

  CHECK(g.xi == s.xi);
  CHECK(g.epochs == s.epochs);
  CHECK(g.final_mask.active == s.final_mask.active);
  CHECK(g.mask_history.size() == s.mask_history.size());
  CHECK(g.test_mse_total == s.test_mse_total);
}

TEST_CASE("mask updates come from the logged stability reports") {
  Experiment exp = sampled_burgers(0.1, 128, 32, 300, 79);
  DiscoveryConfig cfg = small_config(6);
  cfg.max_epochs = 1500;
  DiscoveryResult res = run_discovery({exp}, cfg);

  REQUIRE(res.mask_history.size() >= 2);  // initial all-ones + at least one trigger
  CHECK(res.mask_history[0].trigger_epoch == -1);
  for (const auto& row : res.mask_history[0].active)
    CHECK(row == std::vector<char>(36, 1));
  REQUIRE(res.stability_history.size() == res.mask_history.size() - 1);
  for (size_t k = 1; k < res.mask_history.size(); ++k) {
    SparsityMask rebuilt =
        update_mask({res.stability_history[k - 1]}, DiscoveryMode::grouped, 1, 36,
                    res.mask_history[k].trigger_epoch);
    CHECK(rebuilt.active == res.mask_history[k].active);
  }
  // final coefficients live inside the final mask
  for (int j = 0; j < 36; ++j)
    if (!res.final_mask.active[0][static_cast<size_t>(j)]) CHECK(res.xi(0, j) == 0.0);
}

TEST_CASE("result serializes with config echo and loss trace") {
  Experiment exp = sampled_burgers(0.1, 96, 24, 200, 80);
  DiscoveryConfig cfg = small_config(8);
  cfg.max_epochs = 50;
  cfg.trigger.patience = 1000;
  DiscoveryResult res = run_discovery({exp}, cfg);

  nlohmann::json j = nlohmann::json::parse(discovery_result_json(res, cfg));
  CHECK(j["config"]["mode"] == "grouped");
  CHECK(j["config"]["lr"] == doctest::Approx(cfg.lr));
  CHECK(j["labels"].size() == 36);
  CHECK(j["epochs"] == 50);
  CHECK(j["coefficients"].size() == 1);

  const std::string path = "trace_test.csv";
  export_trace_csv(res, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,total,data,reg,test_mse");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 50);
  std::remove(path.c_str());
}
