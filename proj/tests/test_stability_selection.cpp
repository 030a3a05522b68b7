#include "multipde/stability_selection.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>

#include "multipde/feature_library.hpp"
#include "multipde/rng.hpp"
#include "multipde/synthetic_data.hpp"

using namespace multipde;

namespace {

// small dictionary with two strong columns and a near-flat noise floor
StackedLibrary planted_support(int q, int n, int p, double noise, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> labels;
  for (int j = 0; j < p; ++j) labels.push_back("c" + std::to_string(j));
  std::vector<TermLibrary> libs;
  for (int i = 0; i < q; ++i) {
    TermLibrary lib;
    lib.labels = labels;
    lib.experiment_id = "exp" + std::to_string(i);
    lib.theta.resize(n, p);
    for (int r = 0; r < n; ++r)
      for (int j = 0; j < p; ++j) lib.theta(r, j) = rng.normal();
    lib.dudt = 3.0 * lib.theta.col(1) - 2.0 * lib.theta.col(4);
    for (int r = 0; r < n; ++r) lib.dudt[r] += noise * rng.normal();
    libs.push_back(std::move(lib));
  }
  return StackedLibrary::from(std::move(libs));
}

StabilityConfig fast_config(std::uint64_t seed) {
  StabilityConfig cfg;
  cfg.n_subsamples = 20;
  cfg.n_lambda = 25;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("planted support is recovered with certainty on easy data") {
  StackedLibrary stacked = planted_support(3, 120, 8, 0.01, 17);
  for (bool grouped : {true, false}) {
    StabilityConfig cfg = fast_config(3);
    cfg.grouped = grouped;
    StabilityReport rep = stable_set(stacked, cfg);
    REQUIRE(rep.stable.size() == 2);
    CHECK(rep.stable[0] == 1);
    CHECK(rep.stable[1] == 4);
    CHECK(rep.stable_labels[0] == "c1");
    CHECK(rep.stable_labels[1] == "c4");
    CHECK(!rep.region_empty_fallback);

    // frequencies are exact multiples of 1/B and q_hat sums the rows
    for (int k = 0; k < rep.pi_hat.rows(); ++k) {
      double sum = 0.0;
      for (int j = 0; j < rep.p; ++j) {
        const double scaled = rep.pi_hat(k, j) * cfg.n_subsamples;
        CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
        CHECK(rep.pi_hat(k, j) >= 0.0);
        CHECK(rep.pi_hat(k, j) <= 1.0);
        sum += rep.pi_hat(k, j);
      }
      CHECK(rep.q_hat[k] == doctest::Approx(sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("selection frequencies start empty at lambda_max") {
  StackedLibrary stacked = planted_support(2, 100, 8, 0.05, 29);
  StabilityConfig cfg = fast_config(5);
  StabilityReport rep = selection_probabilities(stacked, cfg);
  REQUIRE(rep.lambda.size() == cfg.n_lambda);
  CHECK(rep.lambda[0] > rep.lambda[cfg.n_lambda - 1]);
  CHECK(rep.lambda[cfg.n_lambda - 1] ==
        doctest::Approx(cfg.epsilon * rep.lambda[0]).epsilon(1e-12));
  // the grid is anchored at the full-data threshold, so the top of the path
  // selects (almost) nothing even on half subsamples
  CHECK(rep.q_hat[0] <= 1.0);
  CHECK(rep.q_hat[cfg.n_lambda - 1] >= 1.5);
}

TEST_CASE("error-control region follows the closed-form bound") {
  // q_hat^2 / ((2*0.9 - 1) * 36) <= 3  <=>  q_hat <= sqrt(86.4)
  const double bound = std::sqrt(3.0 * (2.0 * 0.9 - 1.0) * 36.0);
  Eigen::VectorXd q_hat(5);
  q_hat << bound - 0.1, bound, bound + 0.1, 2.0, 30.0;
  std::vector<int> region = lambda_star_region(q_hat, 36, 0.9, 3.0);
  REQUIRE(region.size() == 3);
  CHECK(region[0] == 0);
  CHECK(region[1] == 1);  // boundary is inclusive
  CHECK(region[2] == 3);
  CHECK_THROWS_AS(lambda_star_region(q_hat, 36, 0.5, 3.0), std::invalid_argument);
}

TEST_CASE("empty region falls back to the sparsest grid point") {
  StackedLibrary stacked = planted_support(2, 100, 8, 0.05, 31);
  StabilityConfig cfg = fast_config(7);
  cfg.ev_max = -1.0;  // unattainable even where nothing is selected
  StabilityReport rep = stable_set(stacked, cfg);
  CHECK(rep.region_empty_fallback);
  REQUIRE(rep.region.size() == 1);
  int argmin = 0;
  rep.q_hat.minCoeff(&argmin);
  CHECK(rep.region[0] == argmin);
}

TEST_CASE("reports are seed-deterministic") {
  StackedLibrary stacked = planted_support(2, 90, 8, 0.2, 37);
  StabilityConfig cfg = fast_config(11);
  StabilityReport a = stable_set(stacked, cfg);
  StabilityReport b = stable_set(stacked, cfg);
  CHECK(a.pi_hat == b.pi_hat);
  CHECK(a.lambda == b.lambda);
  CHECK(a.stable == b.stable);

  cfg.seed = 12;
  StabilityReport c = stable_set(stacked, cfg);
  CHECK(a.pi_hat != c.pi_hat);  // noise is large enough to flip borderline picks
}

TEST_CASE("grouped and per-experiment paths coincide for a single experiment") {
  StackedLibrary stacked = planted_support(1, 120, 8, 0.02, 41);
  StabilityConfig cfg = fast_config(13);
  cfg.grouped = true;
  StabilityReport g = selection_probabilities(stacked, cfg);
  cfg.grouped = false;
  StabilityReport s = selection_probabilities(stacked, cfg);
  CHECK(g.pi_hat == s.pi_hat);
  CHECK(g.lambda == s.lambda);
}

TEST_CASE("report serializes to parseable json") {
  StackedLibrary stacked = planted_support(2, 80, 6, 0.05, 43);
  StabilityConfig cfg = fast_config(17);
  cfg.n_subsamples = 8;
  cfg.n_lambda = 10;
  StabilityReport rep = stable_set(stacked, cfg);
  nlohmann::json j = nlohmann::json::parse(stability_report_json(rep));
  CHECK(j["p"] == 6);
  CHECK(j["lambda"].size() == 10);
  CHECK(j["pi_hat"].size() == 10);
  CHECK(j["pi_hat"][0].size() == 6);
  CHECK(j["q_hat"].size() == 10);
  CHECK(j["stable"].size() == rep.stable.size());
  CHECK(j["region_empty_fallback"] == rep.region_empty_fallback);
  for (size_t k = 0; k < rep.stable.size(); ++k)
    CHECK(j["stable"][k].get<int>() == rep.stable[k]);
}

TEST_CASE("stable set on viscous advection data names the true terms") {
  std::vector<TermLibrary> libs;
  for (double nu : {0.1, 0.3}) {
    Experiment exp = burgers_delta(nu, linspace(-3.0, 4.0, 96), linspace(0.2, 2.0, 24));
    libs.push_back(build_library_fd(exp, 5, 5));
  }
  StackedLibrary stacked = StackedLibrary::from(std::move(libs));
  StabilityConfig cfg;
  cfg.n_lambda = 30;
  cfg.seed = 101;
  StabilityReport rep = stable_set(stacked, cfg);
  REQUIRE(rep.stable_labels.size() == 2);
  CHECK(rep.stable_labels[0] == "u_xx");
  CHECK(rep.stable_labels[1] == "u·u_x");
}
