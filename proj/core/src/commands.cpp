#include "multipde/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include "multipde/dataset_io.hpp"
#include "multipde/rng.hpp"
#include "multipde/feature_library.hpp"
#include "multipde/sparse_solvers.hpp"
#include "multipde/stability_selection.hpp"

namespace multipde {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void spec_error(const std::string& context, const std::string& what) {
  throw std::invalid_argument("run spec: " + context + ": " + what);
}

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& context) {
  if (!j.is_object()) spec_error(context, "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) spec_error(context, "unknown key \"" + key + "\"");
  }
}

double get_num(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key)) spec_error(context, "missing key \"" + key + "\"");
  if (!j[key].is_number()) spec_error(context, "\"" + key + "\" must be a number");
  return j[key].get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j[key].get<double>() : fallback;
}

Eigen::VectorXd parse_axis(const json& j, const std::string& context) {
  require_keys(j, {"min", "max", "n"}, context);
  const double lo = get_num(j, "min", context);
  const double hi = get_num(j, "max", context);
  const int n = static_cast<int>(get_num(j, "n", context));
  if (!(hi > lo) || n < 2) spec_error(context, "need max > min and n >= 2");
  return linspace(lo, hi, n);
}

Experiment parse_experiment(const json& j, int index) {
  const std::string context = "experiments[" + std::to_string(index) + "]";
  if (!j.is_object()) spec_error(context, "expected an object");
  if (!j.contains("pde")) spec_error(context, "missing key \"pde\"");
  const std::string pde = j["pde"].get<std::string>();

  Experiment exp;
  if (pde == "burgers") {
    require_keys(j, {"pde", "id", "ic", "nu", "amplitude", "x", "t", "noise", "noise_seed",
                     "samples"},
                 context);
    const double nu = get_num(j, "nu", context);
    const Eigen::VectorXd x = parse_axis(j.value("x", json::object()), context + ".x");
    const Eigen::VectorXd t = parse_axis(j.value("t", json::object()), context + ".t");
    const std::string ic = j.value("ic", std::string("delta"));
    if (ic == "delta") {
      exp = burgers_delta(nu, x, t, get_num_or(j, "amplitude", 1.0));
    } else if (ic == "periodic") {
      exp = burgers_ic_variant(nu, IcKind::periodic, x, t);
    } else if (ic == "step") {
      exp = burgers_ic_variant(nu, IcKind::step, x, t);
    } else {
      spec_error(context, "unknown ic \"" + ic + "\"");
    }
  } else if (pde == "kdv") {
    require_keys(j, {"pde", "id", "solitons", "speeds", "x", "t", "noise", "noise_seed",
                     "samples"},
                 context);
    const std::string kind = j.value("solitons", std::string("single"));
    if (!j.contains("speeds") || !j["speeds"].is_array())
      spec_error(context, "missing \"speeds\" array");
    std::vector<double> speeds = j["speeds"].get<std::vector<double>>();
    const Eigen::VectorXd x = parse_axis(j.value("x", json::object()), context + ".x");
    const Eigen::VectorXd t = parse_axis(j.value("t", json::object()), context + ".t");
    if (kind == "single") {
      exp = kdv_solitons(SolitonKind::single, speeds, x, t);
    } else if (kind == "two") {
      exp = kdv_solitons(SolitonKind::two, speeds, x, t);
    } else {
      spec_error(context, "unknown solitons \"" + kind + "\"");
    }
  } else if (pde == "ks") {
    require_keys(j, {"pde", "id", "domain_length", "nx", "dt", "n_steps", "dt_substep", "t0",
                     "ic", "noise", "noise_seed", "samples"},
                 context);
    KsOptions opts;
    opts.domain_length = get_num_or(j, "domain_length", opts.domain_length);
    opts.nx = static_cast<int>(get_num_or(j, "nx", opts.nx));
    opts.dt = get_num_or(j, "dt", opts.dt);
    opts.n_steps = static_cast<int>(get_num_or(j, "n_steps", opts.n_steps));
    opts.dt_substep = get_num_or(j, "dt_substep", opts.dt_substep);
    opts.t0 = get_num_or(j, "t0", opts.t0);
    const std::string ic = j.value("ic", std::string("cosine"));
    if (ic == "cosine") {
      opts.ic = KsIc::cosine;
    } else if (ic == "zero") {
      opts.ic = KsIc::zero;
    } else {
      spec_error(context, "unknown ic \"" + ic + "\"");
    }
    exp = ks_numerical(opts);
  } else {
    spec_error(context, "unknown pde \"" + pde + "\"");
  }

  const double noise = get_num_or(j, "noise", 0.0);
  if (noise < 0.0) spec_error(context, "noise must be >= 0");
  if (noise > 0.0)
    exp = add_noise(exp, noise,
                    static_cast<std::uint64_t>(get_num_or(j, "noise_seed", 0.0)));

  if (j.contains("samples")) {
    const json& js = j["samples"];
    require_keys(js, {"strategy", "n", "nt", "nx", "seed"}, context + ".samples");
    SubsampleSpec spec;
    const std::string strategy = js.value("strategy", std::string("random"));
    if (strategy == "random") {
      spec.strategy = SampleStrategy::random;
    } else if (strategy == "grid") {
      spec.strategy = SampleStrategy::grid;
    } else {
      spec_error(context + ".samples", "unknown strategy \"" + strategy + "\"");
    }
    spec.n = static_cast<int>(get_num_or(js, "n", 0.0));
    spec.nt = static_cast<int>(get_num_or(js, "nt", 0.0));
    spec.nx = static_cast<int>(get_num_or(js, "nx", 0.0));
    spec.seed = static_cast<std::uint64_t>(get_num_or(js, "seed", 0.0));
    exp = subsample(exp, spec);
  }

  exp.id = j.value("id", pde + std::to_string(index));
  return exp;
}

DiscoveryConfig parse_discovery(const json& j) {
  DiscoveryConfig cfg;
  if (j.is_null()) return cfg;
  require_keys(j,
               {"mode", "architecture", "lr", "betas", "ridge_alpha", "max_epochs",
                "train_fraction", "max_poly", "max_order", "trigger", "stability", "network"},
               "discovery");
  if (j.contains("mode")) {
    const std::string mode = j["mode"].get<std::string>();
    if (mode == "grouped") {
      cfg.mode = DiscoveryMode::grouped;
    } else if (mode == "individual") {
      cfg.mode = DiscoveryMode::individual;
    } else {
      spec_error("discovery", "unknown mode \"" + mode + "\"");
    }
  }
  if (j.contains("architecture")) {
    const std::string arch = j["architecture"].get<std::string>();
    if (arch == "separate") {
      cfg.architecture = Architecture::separate;
    } else if (arch == "shared_trunk") {
      cfg.architecture = Architecture::shared_trunk;
    } else {
      spec_error("discovery", "unknown architecture \"" + arch + "\"");
    }
  }
  cfg.lr = get_num_or(j, "lr", cfg.lr);
  if (j.contains("betas")) {
    const auto betas = j["betas"].get<std::vector<double>>();
    if (betas.size() != 2) spec_error("discovery", "betas must have two entries");
    cfg.betas = {betas[0], betas[1]};
  }
  cfg.ridge_alpha = get_num_or(j, "ridge_alpha", cfg.ridge_alpha);
  cfg.max_epochs = static_cast<int>(get_num_or(j, "max_epochs", cfg.max_epochs));
  cfg.train_fraction = get_num_or(j, "train_fraction", cfg.train_fraction);
  cfg.max_poly = static_cast<int>(get_num_or(j, "max_poly", cfg.max_poly));
  cfg.max_order = static_cast<int>(get_num_or(j, "max_order", cfg.max_order));
  if (j.contains("trigger")) {
    const json& jt = j["trigger"];
    require_keys(jt, {"patience", "period", "min_delta"}, "discovery.trigger");
    cfg.trigger.patience = static_cast<int>(get_num_or(jt, "patience", cfg.trigger.patience));
    cfg.trigger.period = static_cast<int>(get_num_or(jt, "period", cfg.trigger.period));
    cfg.trigger.min_delta = get_num_or(jt, "min_delta", cfg.trigger.min_delta);
  }
  if (j.contains("stability")) {
    const json& js = j["stability"];
    require_keys(js,
                 {"n_subsamples", "pi_threshold", "ev_max", "epsilon", "n_lambda",
                  "weights_per_subsample", "pooled_pilot"},
                 "discovery.stability");
    cfg.stability.n_subsamples =
        static_cast<int>(get_num_or(js, "n_subsamples", cfg.stability.n_subsamples));
    cfg.stability.pi_threshold = get_num_or(js, "pi_threshold", cfg.stability.pi_threshold);
    cfg.stability.ev_max = get_num_or(js, "ev_max", cfg.stability.ev_max);
    cfg.stability.epsilon = get_num_or(js, "epsilon", cfg.stability.epsilon);
    cfg.stability.n_lambda = static_cast<int>(get_num_or(js, "n_lambda", cfg.stability.n_lambda));
    if (js.contains("weights_per_subsample"))
      cfg.stability.weights_per_subsample = js["weights_per_subsample"].get<bool>();
    if (js.contains("pooled_pilot"))
      cfg.stability.solver.pooled_pilot = js["pooled_pilot"].get<bool>();
  }
  if (j.contains("network")) {
    const json& jn = j["network"];
    require_keys(jn, {"depth", "width", "omega0"}, "discovery.network");
    cfg.network.depth = static_cast<int>(get_num_or(jn, "depth", cfg.network.depth));
    cfg.network.width = static_cast<int>(get_num_or(jn, "width", cfg.network.width));
    cfg.network.omega0 = get_num_or(jn, "omega0", cfg.network.omega0);
  }
  cfg.validate();
  return cfg;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

GroundTruth maybe_truth(const std::vector<Experiment>& experiments) {
  return ground_truth(experiments);  // throws for unknown pde names
}

json oracle_result_json(const std::vector<Experiment>& experiments, const DiscoveryConfig& cfg,
                        std::uint64_t seed) {
  std::vector<TermLibrary> libs;
  for (const auto& e : experiments) {
    TermLibrary lib = build_library_fd(e, cfg.max_poly, cfg.max_order);
    lib.experiment_id = e.id;
    libs.push_back(std::move(lib));
  }
  const int q = static_cast<int>(libs.size());
  const int p = libs[0].p();
  const std::vector<std::string> labels = libs[0].labels;

  StabilityConfig scfg = cfg.stability;
  scfg.solver.pilot_ridge_alpha = cfg.ridge_alpha;
  scfg.seed = seed;
  scfg.grouped = cfg.mode == DiscoveryMode::grouped;

  std::vector<StabilityReport> reports;
  if (scfg.grouped) {
    reports.push_back(stable_set(StackedLibrary::from(libs), scfg));
  } else {
    for (int i = 0; i < q; ++i) {
      StabilityConfig si = scfg;
      si.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
      reports.push_back(stable_set(StackedLibrary::from({libs[static_cast<size_t>(i)]}), si));
    }
  }
  SparsityMask mask = update_mask(reports, cfg.mode, q, p, 0);

  DiscoveryResult res;
  res.labels = labels;
  res.xi.resize(q, p);
  for (int i = 0; i < q; ++i)
    res.xi.row(i) = refit_coefficients(libs[static_cast<size_t>(i)],
                                       mask.active[static_cast<size_t>(i)], cfg.ridge_alpha)
                        .transpose();
  res.final_mask = mask;
  res.mask_history = {mask};
  res.stability_history = reports;
  res.train_mse = Eigen::VectorXd::Zero(q);
  res.test_mse = Eigen::VectorXd::Zero(q);

  json out = json::parse(discovery_result_json(res, cfg));
  out["oracle"] = true;
  Metrics m = metrics(res, maybe_truth(experiments));
  out["metrics"] = {{"success", m.success}, {"coeff_error", m.coeff_error}};
  return out;
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  bool success = false;
  double coeff_error = 0.0;
  double test_mse = 0.0;
  std::string error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

RunSpec load_run_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("run spec: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("run spec: " + std::string(e.what()));
  }
  require_keys(j, {"schema_version", "output_dir", "experiments", "discovery", "seeds"}, "root");
  RunSpec spec;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    spec_error("root", "missing integer \"schema_version\"");
  spec.schema_version = j["schema_version"].get<int>();
  if (spec.schema_version != 1)
    spec_error("root", "unsupported schema_version " + std::to_string(spec.schema_version));
  spec.output_dir = j.value("output_dir", std::string("out"));
  if (!j.contains("experiments") || !j["experiments"].is_array() || j["experiments"].empty())
    spec_error("root", "\"experiments\" must be a non-empty array");
  int index = 0;
  for (const json& je : j["experiments"]) spec.experiments.push_back(parse_experiment(je, index++));
  spec.discovery = parse_discovery(j.value("discovery", json()));
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array() || j["seeds"].empty())
      spec_error("root", "\"seeds\" must be a non-empty array");
    for (const json& js : j["seeds"]) spec.seeds.push_back(js.get<std::uint64_t>());
  } else {
    spec.seeds = {0};
  }
  return spec;
}

int cmd_generate(const std::string& spec_path, const std::string& output_dir_override) {
  RunSpec spec;
  try {
    spec = load_run_spec(spec_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return exit_validation;
  }
  const fs::path dir = output_dir_override.empty() ? spec.output_dir : output_dir_override;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "generate: cannot create " << dir << ": " << ec.message() << "\n";
    return exit_validation;
  }

  json manifest;
  manifest["schema_version"] = spec.schema_version;
  manifest["files"] = json::array();
  for (const auto& exp : spec.experiments) {
    const fs::path file = dir / (exp.id + ".csv");
    save_experiment(exp, file.string());
    manifest["files"].push_back({{"path", file.filename().string()},
                                 {"pde", exp.pde_name},
                                 {"n_samples", exp.n_samples()},
                                 {"fnv1a", hex64(fnv1a_file(file.string()))}});
    std::cout << file.string() << "  samples=" << exp.n_samples() << "\n";
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return exit_ok;
}

int cmd_discover(const std::string& spec_path, const DiscoverOptions& options) {
  RunSpec spec;
  try {
    spec = load_run_spec(spec_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return exit_validation;
  }

  std::vector<std::string> modes = options.modes;
  if (modes.empty())
    modes = {spec.discovery.mode == DiscoveryMode::grouped ? "grouped" : "individual"};
  for (const auto& m : modes)
    if (m != "grouped" && m != "individual") {
      std::cerr << "discover: unknown mode \"" << m << "\"\n";
      return exit_validation;
    }
  if (!options.architecture.empty()) {
    if (options.architecture == "separate") {
      spec.discovery.architecture = Architecture::separate;
    } else if (options.architecture == "shared_trunk") {
      spec.discovery.architecture = Architecture::shared_trunk;
    } else {
      std::cerr << "discover: unknown architecture \"" << options.architecture << "\"\n";
      return exit_validation;
    }
  }
  const std::vector<std::uint64_t> seeds = options.seeds.empty() ? spec.seeds : options.seeds;
  const fs::path dir = options.output_dir.empty() ? spec.output_dir : options.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "discover: cannot create " << dir << ": " << ec.message() << "\n";
    return exit_validation;
  }

  GroundTruth truth;
  bool have_truth = true;
  try {
    truth = maybe_truth(spec.experiments);
  } catch (const std::exception&) {
    have_truth = false;
  }

  json summary;
  summary["modes"] = json::object();
  int n_failed = 0, n_total = 0;
  for (const auto& mode : modes) {
    DiscoveryConfig cfg = spec.discovery;
    cfg.mode = mode == "grouped" ? DiscoveryMode::grouped : DiscoveryMode::individual;
    std::vector<SeedOutcome> outcomes;
    for (std::uint64_t seed : seeds) {
      ++n_total;
      SeedOutcome oc;
      oc.seed = seed;
      const std::string stem =
          "result_" + mode + "_seed" + std::to_string(seed) + (options.oracle_library ? "_oracle" : "");
      try {
        cfg.seed = seed;
        json out;
        if (options.oracle_library) {
          out = oracle_result_json(spec.experiments, cfg, seed);
          oc.test_mse = 0.0;
        } else {
          DiscoveryResult res = run_discovery(spec.experiments, cfg);
          out = json::parse(discovery_result_json(res, cfg));
          out["oracle"] = false;
          if (have_truth) {
            Metrics m = metrics(res, truth);
            out["metrics"] = {{"success", m.success}, {"coeff_error", m.coeff_error}};
          }
          export_trace_csv(res, (dir / ("trace_" + mode + "_seed" + std::to_string(seed) + ".csv"))
                                    .string());
          oc.test_mse = res.test_mse_total;
        }
        out["mode"] = mode;
        out["seed"] = seed;
        write_text(dir / (stem + ".json"), out.dump(2) + "\n");
        oc.ok = true;
        if (out.contains("metrics")) {
          oc.success = out["metrics"]["success"].get<bool>();
          oc.coeff_error = out["metrics"]["coeff_error"].get<double>();
        }
        std::cout << stem << ": " << (oc.success ? "support recovered" : "support differs")
                  << ", coeff_error=" << oc.coeff_error << "\n";
      } catch (const std::exception& e) {
        oc.error = e.what();
        ++n_failed;
        std::cerr << stem << ": " << e.what() << "\n";
      }
      outcomes.push_back(oc);
    }

    int n_ok = 0, n_success = 0;
    double err_sum = 0.0, err_sq = 0.0, mse_sum = 0.0;
    json per_seed = json::array();
    for (const auto& oc : outcomes) {
      if (oc.ok) {
        ++n_ok;
        n_success += oc.success ? 1 : 0;
        err_sum += oc.coeff_error;
        err_sq += oc.coeff_error * oc.coeff_error;
        mse_sum += oc.test_mse;
      }
      per_seed.push_back({{"seed", oc.seed},
                          {"ok", oc.ok},
                          {"success", oc.success},
                          {"coeff_error", oc.coeff_error},
                          {"test_mse_total", oc.test_mse},
                          {"error", oc.error}});
    }
    json agg;
    agg["seeds"] = per_seed;
    agg["n_ok"] = n_ok;
    if (n_ok > 0) {
      const double mean = err_sum / n_ok;
      agg["success_rate"] = static_cast<double>(n_success) / n_ok;
      agg["coeff_error_mean"] = mean;
      agg["coeff_error_std"] = std::sqrt(std::max(0.0, err_sq / n_ok - mean * mean));
      agg["test_mse_mean"] = mse_sum / n_ok;
    }
    summary["modes"][mode] = agg;
  }

  if (summary["modes"].contains("grouped") && summary["modes"].contains("individual") &&
      summary["modes"]["grouped"].contains("test_mse_mean") &&
      summary["modes"]["individual"].contains("test_mse_mean")) {
    summary["paired_mse_comparison"] = {
        {"grouped_mean", summary["modes"]["grouped"]["test_mse_mean"]},
        {"individual_mean", summary["modes"]["individual"]["test_mse_mean"]},
        {"grouped_leq_individual",
         summary["modes"]["grouped"]["test_mse_mean"].get<double>() <=
             summary["modes"]["individual"]["test_mse_mean"].get<double>()}};
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  if (n_failed == n_total) return exit_numeric;
  if (n_failed > 0) return exit_partial;
  return exit_ok;
}

int cmd_report(const std::string& results_dir) {
  const fs::path dir = results_dir;
  std::vector<fs::path> files;
  if (fs::is_directory(dir))
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.rfind("result_", 0) == 0 &&
          entry.path().extension() == ".json")
        files.push_back(entry.path());
    }
  std::sort(files.begin(), files.end());
  if (files.empty()) std::cerr << "report: no result files in " << dir << "\n";

  std::ofstream summary(dir / "report_summary.csv");
  std::ofstream patterns(dir / "report_sparsity_patterns.csv");
  std::ofstream paths(dir / "report_stability_paths.csv");
  summary << "mode,seed,oracle,success,coeff_error,test_mse_total,epochs\n";
  patterns << "mode,seed,experiment,label,active\n";
  paths << "mode,seed,report,lambda,q_hat\n";

  for (const auto& file : files) {
    json j;
    try {
      std::ifstream in(file);
      j = json::parse(in);
    } catch (const std::exception& e) {
      std::cerr << "report: skipping " << file << ": " << e.what() << "\n";
      continue;
    }
    try {
      const std::string mode = j.value("mode", std::string("?"));
      const auto seed = j.value("seed", std::uint64_t{0});
      const bool oracle = j.value("oracle", false);
      const auto& metrics_block = j.contains("metrics") ? j["metrics"] : json::object();
      summary << mode << ',' << seed << ',' << (oracle ? 1 : 0) << ','
              << (metrics_block.value("success", false) ? 1 : 0) << ','
              << metrics_block.value("coeff_error", 0.0) << ',' << j.value("test_mse_total", 0.0)
              << ',' << j.value("epochs", 0) << '\n';

      const auto labels = j["labels"].get<std::vector<std::string>>();
      const json& final_mask = j["masks"].back()["active"];
      for (size_t i = 0; i < final_mask.size(); ++i)
        for (size_t c = 0; c < labels.size(); ++c)
          patterns << mode << ',' << seed << ',' << i << ',' << labels[c] << ','
                   << final_mask[i][c].get<int>() << '\n';

      if (j.contains("stability_reports"))
        for (size_t r = 0; r < j["stability_reports"].size(); ++r) {
          const json& rep = j["stability_reports"][r];
          for (size_t k = 0; k < rep["lambda"].size(); ++k)
            paths << mode << ',' << seed << ',' << r << ',' << rep["lambda"][k].get<double>()
                  << ',' << rep["q_hat"][k].get<double>() << '\n';
        }
    } catch (const std::exception& e) {
      std::cerr << "report: malformed " << file << ": " << e.what() << "\n";
    }
  }
  std::cout << "report: wrote report_summary.csv, report_sparsity_patterns.csv, "
               "report_stability_paths.csv in "
            << dir.string() << "\n";
  return exit_ok;
}

int cmd_sweep_ridge(const std::string& spec_path, const std::vector<double>& alphas,
                    const std::string& output_dir_override) {
  RunSpec spec;
  try {
    spec = load_run_spec(spec_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return exit_validation;
  }
  if (alphas.empty()) {
    std::cerr << "sweep-ridge: need at least one alpha\n";
    return exit_validation;
  }
  const fs::path dir = output_dir_override.empty() ? spec.output_dir : output_dir_override;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "sweep-ridge: cannot create " << dir << ": " << ec.message() << "\n";
    return exit_validation;
  }

  try {
    std::ofstream out(dir / "sweep_ridge.csv");
    out << "alpha,experiment,label,coefficient\n";
    std::set<std::string> distinct_supports;
    for (double alpha : alphas) {
      DiscoveryConfig cfg = spec.discovery;
      cfg.ridge_alpha = alpha;
      json res = oracle_result_json(spec.experiments, cfg, spec.seeds.empty() ? 0 : spec.seeds[0]);
      std::string support;
      for (size_t i = 0; i < res["coefficients"].size(); ++i)
        for (const auto& [label, value] : res["coefficients"][i].items()) {
          out << alpha << ',' << i << ',' << label << ',' << value.get<double>() << '\n';
          if (i == 0) support += label + ";";
        }
      distinct_supports.insert(support);
      std::cout << "alpha=" << alpha << " support: " << (support.empty() ? "(empty)" : support)
                << "\n";
    }
    std::cout << "sweep-ridge: " << distinct_supports.size() << " distinct supports across "
              << alphas.size() << " alphas\n";
  } catch (const std::exception& e) {
    std::cerr << "sweep-ridge: " << e.what() << "\n";
    return exit_numeric;
  }
  return exit_ok;
}

}  // namespace multipde
