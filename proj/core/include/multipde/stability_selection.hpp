#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "multipde/feature_library.hpp"
#include "multipde/sparse_solvers.hpp"

namespace multipde {

struct StabilityConfig {
  int n_subsamples = 40;          // complementary-pairs halves, drawn independently
  double pi_threshold = 0.9;
  double ev_max = 3.0;            // expected false positives tolerated in the stable set
  double epsilon = 1e-3;          // lambda grid floor, as a fraction of lambda_max
  int n_lambda = 50;
  std::uint64_t seed = 0;
  bool grouped = true;            // group solver across experiments vs per-experiment union
  bool weights_per_subsample = true;  // refresh pilot + randomisation on every subsample
  SolverOptions solver;
};

struct StabilityReport {
  Eigen::VectorXd lambda;        // n_lambda, descending
  Eigen::MatrixXd pi_hat;        // n_lambda x p selection frequencies, multiples of 1/B
  Eigen::VectorXd q_hat;         // n_lambda, average selected-set size
  std::vector<int> region;       // lambda indices inside the error-controlled region
  bool region_empty_fallback = false;  // region was empty; used argmin q_hat instead
  std::vector<int> stable;       // column indices with max pi over the region >= threshold
  std::vector<std::string> stable_labels;
  int p = 0;
};

// Selection frequencies over random half subsamples along a lambda path that
// is anchored at the full-data lambda_max (unit randomisation weights).
StabilityReport selection_probabilities(const StackedLibrary& stacked,
                                        const StabilityConfig& cfg);

// Indices of the lambda grid where q_hat^2 / ((2*pi_thr - 1) * p) <= ev_max.
std::vector<int> lambda_star_region(const Eigen::VectorXd& q_hat, int p, double pi_threshold,
                                    double ev_max);

// Full pipeline: probabilities, region, threshold. Falls back to the single
// lambda with the smallest q_hat when the region is empty.
StabilityReport stable_set(const StackedLibrary& stacked, const StabilityConfig& cfg);

std::string stability_report_json(const StabilityReport& report);

}  // namespace multipde
