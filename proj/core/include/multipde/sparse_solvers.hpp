#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "multipde/feature_library.hpp"

namespace multipde {

// Ridge regression: solves (Theta^T Theta + n*alpha*I) xi = Theta^T y.
// Intercept-free; the constant library column handles offsets.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double alpha);

enum class RandomisationMode { per_column, per_group };

// Penalty weights of the randomised adaptive (group) Lasso.
struct AdaptiveWeights {
  Eigen::MatrixXd w_hat;     // q x p pilot weights 1/|xi_pilot|^gamma
  double gamma = 2.0;
  Eigen::MatrixXd w_random;  // q x p Beta(1,2) draws (rows identical in per_group mode)
  std::uint64_t seed = 0;
};

// iid Beta(1,2) draws; per_group shares one draw across a column's q entries.
Eigen::MatrixXd sample_randomisation(int p, int q, RandomisationMode mode, std::uint64_t seed);

struct SolverOptions {
  double gamma = 2.0;
  double pilot_ridge_alpha = 1e-5;
  double pilot_cap = 1e20;     // w_hat cap when the pilot coefficient is ~0
  bool pooled_pilot = false;   // one shared-coefficient pilot across experiments
  double tol = 1e-8;           // duality-gap stop
  int max_sweeps = 100000;
  double kkt_tol = 1e-6;
};

// Pilot ridge estimate on unit-norm columns -> w_hat; no randomization.
AdaptiveWeights compute_adaptive_weights(const StackedLibrary& stacked,
                                         const SolverOptions& opts);

struct FitResult {
  Eigen::MatrixXd xi;                 // q x p coefficients, physical units
  double lambda = 0.0;
  std::vector<std::string> support;   // labels with nonzero (group) coefficient
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  int sweeps = 0;
};

// Randomised adaptive Lasso (single experiment):
// min (1/2n)||dudt - TildeTheta b||^2 + lambda sum_j |b_j| / W_j,
// TildeTheta_j = Theta_j / w_hat_j. Coefficients are returned in the
// original unweighted, unnormalized parameterization.
FitResult adaptive_lasso_fit(const TermLibrary& lib, double lambda, const AdaptiveWeights& weights,
                             const SolverOptions& opts = {});

// Randomised adaptive group Lasso across q experiments; group g = one label
// across experiments. Each experiment's residual is weighted 1/n_i.
FitResult group_lasso_fit(const StackedLibrary& stacked, double lambda,
                          const AdaptiveWeights& weights, const SolverOptions& opts = {});

// Smallest lambda with an all-zero solution.
double lambda_max(const TermLibrary& lib, const AdaptiveWeights& weights,
                  const SolverOptions& opts = {});
double lambda_max(const StackedLibrary& stacked, const AdaptiveWeights& weights,
                  const SolverOptions& opts = {});

// m log-spaced values from lambda_max down to epsilon*lambda_max.
Eigen::VectorXd lambda_path(double lambda_max, double epsilon, int m);

// ---- low-level solvers (unit tested; also used by stability selection) ----

// Per-experiment design with unit-norm columns divided by the pilot weights.
// xi = b .* unscale maps solver coefficients back to physical units
// (unscale is 0 for dead columns).
struct WeightedDesign {
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::VectorXd> unscale;
};

WeightedDesign build_weighted_design(const StackedLibrary& stacked,
                                     const AdaptiveWeights& weights);

// min (1/2n)||y - X b||^2 + lambda * sum_j pen_j |b_j|; returns b.
// pen_j <= 0 is invalid; warm start via b.
Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         const Eigen::VectorXd& pen, Eigen::VectorXd b, const SolverOptions& opts,
                         double* gap_out = nullptr, int* sweeps_out = nullptr);

// min sum_i (1/2 n_i)||y_i - X_i b_i||^2 + lambda sum_g pen_g ||b_{.,g}||_2.
// b is q x p (row i = experiment i); returns the updated matrix.
Eigen::MatrixXd group_lasso_bcd(const std::vector<Eigen::MatrixXd>& X,
                                const std::vector<Eigen::VectorXd>& y, double lambda,
                                const Eigen::VectorXd& pen, Eigen::MatrixXd b,
                                const SolverOptions& opts, double* gap_out = nullptr,
                                int* sweeps_out = nullptr);

// max KKT violation of a weighted lasso solution (0 at the optimum).
double lasso_kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                          const Eigen::VectorXd& pen, const Eigen::VectorXd& b);
double group_kkt_residual(const std::vector<Eigen::MatrixXd>& X,
                          const std::vector<Eigen::VectorXd>& y, double lambda,
                          const Eigen::VectorXd& pen, const Eigen::MatrixXd& b);

}  // namespace multipde
