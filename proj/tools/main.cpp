#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <string>
#include <vector>

#include "multipde/commands.hpp"

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("MULTIPDE_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  CLI::App app{"PDE discovery from multiple noisy experiments"};
  app.require_subcommand(1);

  std::string spec_path, output_dir, results_dir, architecture;
  std::vector<std::string> modes;
  std::vector<std::uint64_t> seeds;
  std::vector<double> alphas;
  bool oracle_library = false;

  CLI::App* generate = app.add_subcommand("generate", "Write dataset files from a run spec");
  generate->add_option("spec", spec_path, "Run spec JSON file")->required();
  generate->add_option("--output-dir", output_dir, "Override the spec's output directory");

  CLI::App* discover = app.add_subcommand("discover", "Run PDE discovery for each seed");
  discover->add_option("spec", spec_path, "Run spec JSON file")->required();
  discover->add_option("--mode", modes, "grouped or individual (repeatable)");
  discover->add_option("--architecture", architecture, "separate or shared_trunk");
  discover->add_option("--seeds", seeds, "Seed list override");
  discover->add_option("--output-dir", output_dir, "Override the spec's output directory");
  discover->add_flag("--oracle-library", oracle_library,
                     "Finite-difference libraries, skip network training");

  CLI::App* report = app.add_subcommand("report", "Summarize a results directory into CSV tables");
  report->add_option("results_dir", results_dir, "Directory with result_*.json files")->required();

  CLI::App* sweep = app.add_subcommand("sweep-ridge", "Support sensitivity to the ridge penalty");
  sweep->add_option("spec", spec_path, "Run spec JSON file")->required();
  sweep->add_option("--alphas", alphas, "Ridge alphas to sweep")->required();
  sweep->add_option("--output-dir", output_dir, "Override the spec's output directory");

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) return multipde::cmd_generate(spec_path, output_dir);
  if (discover->parsed()) {
    multipde::DiscoverOptions opts;
    opts.modes = modes;
    opts.architecture = architecture;
    opts.seeds = seeds;
    opts.output_dir = output_dir;
    opts.oracle_library = oracle_library;
    return multipde::cmd_discover(spec_path, opts);
  }
  if (report->parsed()) return multipde::cmd_report(results_dir);
  if (sweep->parsed()) return multipde::cmd_sweep_ridge(spec_path, alphas, output_dir);
  return multipde::exit_validation;
}
