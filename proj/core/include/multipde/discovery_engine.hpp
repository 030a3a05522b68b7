#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "multipde/approximator.hpp"
#include "multipde/feature_library.hpp"
#include "multipde/stability_selection.hpp"
#include "multipde/synthetic_data.hpp"

namespace multipde {

enum class DiscoveryMode { individual, grouped };
enum class Architecture { separate, shared_trunk };

struct TriggerConfig {
  int patience = 500;      // epochs without relative test-MSE improvement
  int period = 1000;       // minimum epochs between consecutive triggers
  double min_delta = 1e-6; // relative improvement that resets the patience clock
};

struct DiscoveryConfig {
  DiscoveryMode mode = DiscoveryMode::grouped;
  Architecture architecture = Architecture::separate;
  NetworkConfig network;
  double lr = 5e-5;
  std::pair<double, double> betas = {0.99, 0.99};
  double ridge_alpha = 1e-5;
  TriggerConfig trigger;
  int max_epochs = 30000;
  double train_fraction = 0.8;
  int max_poly = 5;
  int max_order = 5;
  StabilityConfig stability;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

struct SparsityMask {
  std::vector<std::vector<char>> active;  // q rows over the label set
  int trigger_epoch = -1;                 // -1 for the initial all-ones mask
  std::vector<std::vector<int>> stable;   // stable sets the rows derive from

  int q() const { return static_cast<int>(active.size()); }
};

SparsityMask all_ones_mask(int q, int p);

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> data_term;  // (1/n)||u - u_hat||^2 per experiment
  std::vector<double> reg_term;   // (1/n)||u_hat_t - Theta (xi .* M)||^2 per experiment
};

struct EpochTrace {
  int epoch = 0;
  double total = 0.0, data = 0.0, reg = 0.0, test_mse = 0.0;
};

struct DiscoveryResult {
  std::vector<std::string> labels;
  Eigen::MatrixXd xi;  // q x p, physical units, zero outside the final mask
  SparsityMask final_mask;
  std::vector<SparsityMask> mask_history;
  std::vector<StabilityReport> stability_history;  // one per trigger (x q if individual)
  Eigen::VectorXd train_mse, test_mse;             // data term per experiment
  double test_mse_total = 0.0;
  int epochs = 0;
  bool mask_fixpoint = false;
  std::vector<EpochTrace> trace;
};

struct Metrics {
  bool success = false;
  double coeff_error = 0.0;
  double mse_test = 0.0;
};

// Eq.-style training loss evaluated from scratch on the stored samples.
LossBreakdown compute_loss(const std::vector<NetworkParams>& nets,
                           const std::vector<InputScaling>& scalings,
                           const std::vector<Experiment>& experiments, const SparsityMask& mask,
                           const Eigen::MatrixXd& xi, int max_poly = 5, int max_order = 5);

// Ridge on the masked (unit-norm) columns; inactive coefficients are exactly 0.
Eigen::VectorXd refit_coefficients(const TermLibrary& lib, const std::vector<char>& mask,
                                   double ridge_alpha);

// history holds one test-MSE value per epoch; last_trigger_epoch = -1 before
// any trigger. True once the running best has not improved relatively by
// min_delta for patience epochs and at least period epochs passed since the
// last trigger.
bool trigger_check(const std::vector<double>& test_mse_history, const TriggerConfig& trigger,
                   int last_trigger_epoch);

// grouped: one report, replicated across experiments; individual: one per
// experiment, in experiment order.
SparsityMask update_mask(const std::vector<StabilityReport>& reports, DiscoveryMode mode, int q,
                         int p, int epoch);

DiscoveryResult run_discovery(const std::vector<Experiment>& experiments,
                              const DiscoveryConfig& config);

Metrics metrics(const DiscoveryResult& result, const GroundTruth& truth);

// Width of the shared-trunk variant chosen so the total parameter count over
// q experiments stays within 5% of q separate networks.
int shared_trunk_width(const NetworkConfig& network, int q);

std::string discovery_result_json(const DiscoveryResult& result, const DiscoveryConfig& config);
void export_trace_csv(const DiscoveryResult& result, const std::string& path);

}  // namespace multipde
