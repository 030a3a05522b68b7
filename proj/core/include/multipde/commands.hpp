#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multipde/discovery_engine.hpp"
#include "multipde/synthetic_data.hpp"

namespace multipde {

// Declarative description of a study: datasets + discovery settings + seeds.
// Parsed from versioned JSON; unknown keys are rejected so typos fail loudly.
struct RunSpec {
  int schema_version = 1;
  std::string output_dir;
  std::vector<Experiment> experiments;  // materialized: generated, noised, sampled
  DiscoveryConfig discovery;
  std::vector<std::uint64_t> seeds;
};

RunSpec load_run_spec(const std::string& path);  // throws std::invalid_argument

// process exit codes shared by all commands
inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numeric = 3;
inline constexpr int exit_partial = 4;

int cmd_generate(const std::string& spec_path, const std::string& output_dir_override);

struct DiscoverOptions {
  std::vector<std::string> modes;       // empty: use the spec's mode
  std::string architecture;             // empty: use the spec's architecture
  std::vector<std::uint64_t> seeds;     // empty: use the spec's seed list
  std::string output_dir;               // empty: use the spec's output_dir
  bool oracle_library = false;          // finite-difference libraries, no training
};

int cmd_discover(const std::string& spec_path, const DiscoverOptions& options);

int cmd_report(const std::string& results_dir);

int cmd_sweep_ridge(const std::string& spec_path, const std::vector<double>& alphas,
                    const std::string& output_dir_override);

}  // namespace multipde
