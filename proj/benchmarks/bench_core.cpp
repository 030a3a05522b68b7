#include <benchmark/benchmark.h>

#include <random>

#include "multipde/approximator.hpp"
#include "multipde/feature_library.hpp"
#include "multipde/sparse_solvers.hpp"
#include "multipde/stability_selection.hpp"
#include "multipde/synthetic_data.hpp"

using namespace multipde;

namespace {

Eigen::MatrixXd random_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-3.0, 4.0), ut(0.2, 2.0);
  Eigen::MatrixXd pts(n, 2);
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = ux(rng);
    pts(i, 1) = ut(rng);
  }
  return pts;
}

StackedLibrary burgers_stack(int q) {
  const Eigen::VectorXd x = linspace(-3.0, 4.0, 128);
  const Eigen::VectorXd t = linspace(0.2, 2.0, 32);
  std::vector<TermLibrary> libs;
  for (int i = 0; i < q; ++i)
    libs.push_back(build_library_fd(burgers_delta(0.1 * (i + 1), x, t), 5, 5, 3));
  return StackedLibrary::from(std::move(libs));
}

}  // namespace

// jet forward pass cost as a function of derivative order
static void BM_forward_jet(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.width = 65;
  NetworkParams params = init_network(cfg);
  const Eigen::MatrixXd pts = random_points(1600, 7);
  const auto scaling = InputScaling::from_ranges(-3.0, 4.0, 0.2, 2.0);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ForwardTape tape;
    DerivativeBundle b = forward_train(params, pts, order, scaling, tape);
    benchmark::DoNotOptimize(b.value.sum());
  }
}
BENCHMARK(BM_forward_jet)->Arg(1)->Arg(2)->Arg(5);

static void BM_backward(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.width = 65;
  NetworkParams params = init_network(cfg);
  const Eigen::MatrixXd pts = random_points(1600, 7);
  const auto scaling = InputScaling::from_ranges(-3.0, 4.0, 0.2, 2.0);
  ForwardTape tape;
  DerivativeBundle b = forward_train(params, pts, 5, scaling, tape);
  DerivativeBundle adj = b;  // same shape, arbitrary values
  for (auto _ : state) {
    ParamGrads g = backward(params, tape, adj);
    benchmark::DoNotOptimize(g.layers[0].weight.sum());
  }
}
BENCHMARK(BM_backward);

static void BM_build_library(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.width = 65;
  NetworkParams params = init_network(cfg);
  const Eigen::MatrixXd pts = random_points(1600, 7);
  const auto scaling = InputScaling::from_ranges(-3.0, 4.0, 0.2, 2.0);
  DerivativeBundle b = input_derivatives(params, pts, 5, scaling);
  for (auto _ : state) {
    TermLibrary lib = build_library(b.value, b, 5, 5);
    benchmark::DoNotOptimize(lib.theta.sum());
  }
}
BENCHMARK(BM_build_library);

static void BM_adaptive_lasso(benchmark::State& state) {
  StackedLibrary stack = burgers_stack(1);
  SolverOptions opts;
  AdaptiveWeights w = compute_adaptive_weights(stack, opts);
  w.w_random = sample_randomisation(stack.p(), 1, RandomisationMode::per_column, 3);
  const double lam = 0.05 * lambda_max(stack.experiments[0], w);
  for (auto _ : state) {
    FitResult fit = adaptive_lasso_fit(stack.experiments[0], lam, w, opts);
    benchmark::DoNotOptimize(fit.xi.sum());
  }
}
BENCHMARK(BM_adaptive_lasso);

static void BM_group_lasso(benchmark::State& state) {
  StackedLibrary stack = burgers_stack(3);
  SolverOptions opts;
  AdaptiveWeights w = compute_adaptive_weights(stack, opts);
  w.w_random = sample_randomisation(stack.p(), 3, RandomisationMode::per_group, 3);
  const double lam = 0.05 * lambda_max(stack, w);
  for (auto _ : state) {
    FitResult fit = group_lasso_fit(stack, lam, w, opts);
    benchmark::DoNotOptimize(fit.xi.sum());
  }
}
BENCHMARK(BM_group_lasso);

static void BM_stability_selection(benchmark::State& state) {
  StackedLibrary stack = burgers_stack(3);
  StabilityConfig cfg;
  cfg.n_subsamples = static_cast<int>(state.range(0));
  cfg.n_lambda = 25;
  cfg.seed = 11;
  for (auto _ : state) {
    StabilityReport rep = selection_probabilities(stack, cfg);
    benchmark::DoNotOptimize(rep.pi_hat.sum());
  }
}
BENCHMARK(BM_stability_selection)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
