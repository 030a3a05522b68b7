#include "multipde/discovery_engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "multipde/rng.hpp"
#include "multipde/sparse_solvers.hpp"

namespace multipde {

namespace {

struct TermIndex {
  int a = 0;  // polynomial power
  int b = 0;  // derivative order
};

TermIndex decode(int col, int max_order) { return {col / (max_order + 1), col % (max_order + 1)}; }

int highest_masked_order(const SparsityMask& mask, int max_order) {
  int k = 0;
  for (const auto& row : mask.active)
    for (size_t j = 0; j < row.size(); ++j)
      if (row[j]) k = std::max(k, decode(static_cast<int>(j), max_order).b);
  return k;
}

// column j' of the order-k library corresponds to column map[j'] of the full one
std::vector<int> reduced_to_full(int max_poly, int max_order, int k) {
  std::vector<int> map;
  for (int a = 0; a <= max_poly; ++a)
    for (int b = 0; b <= k; ++b) map.push_back(a * (max_order + 1) + b);
  return map;
}

struct SplitData {
  Eigen::MatrixXd train_xt, test_xt;
  Eigen::VectorXd train_u, test_u;
};

SplitData split_samples(const Experiment& exp, double train_fraction, std::uint64_t seed) {
  const Eigen::Index n = exp.samples_u.size();
  if (n < 2) throw std::invalid_argument("run_discovery: experiment has fewer than 2 samples");
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.integer(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[i], idx[j]);
  }
  Eigen::Index n_train = static_cast<Eigen::Index>(std::floor(train_fraction * n));
  n_train = std::clamp<Eigen::Index>(n_train, 1, n - 1);
  SplitData s;
  s.train_xt.resize(n_train, 2);
  s.train_u.resize(n_train);
  s.test_xt.resize(n - n_train, 2);
  s.test_u.resize(n - n_train);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (r < n_train) {
      s.train_xt.row(r) = exp.samples_xt.row(idx[r]);
      s.train_u[r] = exp.samples_u[idx[r]];
    } else {
      s.test_xt.row(r - n_train) = exp.samples_xt.row(idx[r]);
      s.test_u[r - n_train] = exp.samples_u[idx[r]];
    }
  }
  return s;
}

InputScaling scaling_for(const Eigen::MatrixXd& xt) {
  return InputScaling::from_ranges(xt.col(0).minCoeff(), xt.col(0).maxCoeff(),
                                   xt.col(1).minCoeff(), xt.col(1).maxCoeff());
}

// data/regression residual pair of one experiment at the current parameters
struct ExperimentLoss {
  double data = 0.0, reg = 0.0;
  Eigen::VectorXd r_data, r_reg;  // value - u, dudt - Theta*(xi.*M)
};

ExperimentLoss masked_losses(const DerivativeBundle& bundle, const TermLibrary& lib,
                             const Eigen::VectorXd& u, const std::vector<char>& mask,
                             const Eigen::VectorXd& xi) {
  const double n = static_cast<double>(u.size());
  ExperimentLoss out;
  out.r_data = bundle.value - u;
  Eigen::VectorXd fit = Eigen::VectorXd::Zero(u.size());
  for (int j = 0; j < lib.p(); ++j)
    if (mask[static_cast<size_t>(j)] && xi[j] != 0.0) fit += lib.theta.col(j) * xi[j];
  out.r_reg = bundle.dt - fit;
  out.data = out.r_data.squaredNorm() / n;
  out.reg = out.r_reg.squaredNorm() / n;
  return out;
}

std::vector<char> reduce_mask(const std::vector<char>& full, const std::vector<int>& map) {
  std::vector<char> out(map.size());
  for (size_t j = 0; j < map.size(); ++j) out[j] = full[static_cast<size_t>(map[j])];
  return out;
}

bool same_active(const SparsityMask& a, const SparsityMask& b) { return a.active == b.active; }

}  // namespace

void DiscoveryConfig::validate() const {
  network.validate();
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw std::invalid_argument("discovery config: train fraction must be in (0, 1)");
  if (trigger.patience < 1) throw std::invalid_argument("discovery config: patience must be >= 1");
  if (trigger.period < 1) throw std::invalid_argument("discovery config: period must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("discovery config: max_epochs must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("discovery config: lr must be positive");
  if (ridge_alpha < 0.0) throw std::invalid_argument("discovery config: ridge_alpha < 0");
  if (max_poly < 1 || max_order < 1 || max_order > 5)
    throw std::invalid_argument("discovery config: bad library size");
}

SparsityMask all_ones_mask(int q, int p) {
  SparsityMask m;
  m.active.assign(static_cast<size_t>(q), std::vector<char>(static_cast<size_t>(p), 1));
  return m;
}

Eigen::VectorXd refit_coefficients(const TermLibrary& lib, const std::vector<char>& mask,
                                   double ridge_alpha) {
  if (mask.size() != static_cast<size_t>(lib.p()))
    throw std::invalid_argument("refit_coefficients: mask length mismatch");
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(lib.p());
  std::vector<int> active;
  for (int j = 0; j < lib.p(); ++j)
    if (mask[static_cast<size_t>(j)]) active.push_back(j);
  if (active.empty()) return xi;

  // unit-RMS columns keep the n*alpha ridge term on the scale of the gram
  // diagonal, so the shrinkage is alpha itself
  NormalizedLibrary norm = normalize_columns(lib);
  const double rms = std::sqrt(static_cast<double>(lib.n()));
  Eigen::MatrixXd sub(lib.n(), static_cast<Eigen::Index>(active.size()));
  for (size_t k = 0; k < active.size(); ++k)
    sub.col(static_cast<Eigen::Index>(k)) = norm.lib.theta.col(active[k]) * rms;
  Eigen::VectorXd beta = ridge_fit(sub, lib.dudt, ridge_alpha);
  for (size_t k = 0; k < active.size(); ++k)
    xi[active[k]] = beta[static_cast<Eigen::Index>(k)] * rms / norm.scales[active[k]];
  return xi;
}

bool trigger_check(const std::vector<double>& history, const TriggerConfig& trigger,
                   int last_trigger_epoch) {
  if (history.empty()) throw std::invalid_argument("trigger_check: empty history");
  double best = history[0];
  int best_epoch = 0;
  for (size_t e = 1; e < history.size(); ++e) {
    if (history[e] < best * (1.0 - trigger.min_delta)) best_epoch = static_cast<int>(e);
    best = std::min(best, history[e]);
  }
  const int now = static_cast<int>(history.size()) - 1;
  if (now - best_epoch < trigger.patience) return false;
  if (last_trigger_epoch >= 0 && now - last_trigger_epoch < trigger.period) return false;
  return true;
}

SparsityMask update_mask(const std::vector<StabilityReport>& reports, DiscoveryMode mode, int q,
                         int p, int epoch) {
  SparsityMask m;
  m.trigger_epoch = epoch;
  if (mode == DiscoveryMode::grouped) {
    if (reports.size() != 1)
      throw std::invalid_argument("update_mask: grouped mode expects one report");
    std::vector<char> row(static_cast<size_t>(p), 0);
    for (int j : reports[0].stable) row[static_cast<size_t>(j)] = 1;
    m.active.assign(static_cast<size_t>(q), row);
    m.stable.assign(static_cast<size_t>(q), reports[0].stable);
  } else {
    if (reports.size() != static_cast<size_t>(q))
      throw std::invalid_argument("update_mask: individual mode expects one report per experiment");
    for (int i = 0; i < q; ++i) {
      std::vector<char> row(static_cast<size_t>(p), 0);
      for (int j : reports[static_cast<size_t>(i)].stable) row[static_cast<size_t>(j)] = 1;
      m.active.push_back(std::move(row));
      m.stable.push_back(reports[static_cast<size_t>(i)].stable);
    }
  }
  return m;
}

LossBreakdown compute_loss(const std::vector<NetworkParams>& nets,
                           const std::vector<InputScaling>& scalings,
                           const std::vector<Experiment>& experiments, const SparsityMask& mask,
                           const Eigen::MatrixXd& xi, int max_poly, int max_order) {
  const int q = static_cast<int>(experiments.size());
  if (static_cast<int>(nets.size()) != q || static_cast<int>(scalings.size()) != q ||
      mask.q() != q || xi.rows() != q)
    throw std::invalid_argument("compute_loss: shape mismatch");
  LossBreakdown out;
  for (int i = 0; i < q; ++i) {
    DerivativeBundle bundle =
        input_derivatives(nets[i], experiments[i].samples_xt, max_order, scalings[i]);
    TermLibrary lib = build_library(bundle.value, bundle, max_poly, max_order);
    ExperimentLoss el = masked_losses(bundle, lib, experiments[i].samples_u,
                                      mask.active[static_cast<size_t>(i)], xi.row(i).transpose());
    out.data_term.push_back(el.data);
    out.reg_term.push_back(el.reg);
    out.total += el.data + el.reg;
  }
  if (!std::isfinite(out.total)) throw std::runtime_error("compute_loss: non-finite loss");
  return out;
}

int shared_trunk_width(const NetworkConfig& network, int q) {
  const auto target = static_cast<long>(parameter_count(network)) * q;
  const int depth = network.depth;
  long best_diff = -1;
  int best_w = network.width;
  for (int w = 1; w <= 8 * network.width; ++w) {
    long trunk = static_cast<long>(network.input_dim) * w + w;  // first layer
    for (int l = 1; l <= depth - 3; ++l) trunk += static_cast<long>(w) * w + w;
    long head = static_cast<long>(w) * w + w +                          // penultimate layer
                static_cast<long>(w) * network.output_dim + network.output_dim;
    const long total = trunk + static_cast<long>(q) * head;
    const long diff = std::abs(total - target);
    if (best_diff < 0 || diff < best_diff) {
      best_diff = diff;
      best_w = w;
    }
  }
  return best_w;
}

DiscoveryResult run_discovery(const std::vector<Experiment>& experiments,
                              const DiscoveryConfig& config) {
  config.validate();
  const int q = static_cast<int>(experiments.size());
  if (q < 1) throw std::invalid_argument("run_discovery: no experiments");
  for (const auto& e : experiments) e.validate();

  const int p = (config.max_poly + 1) * (config.max_order + 1);
  const std::vector<std::string> labels = term_labels(config.max_poly, config.max_order);

  // data split and coordinate normalization
  std::vector<SplitData> data;
  std::vector<InputScaling> scalings;
  for (int i = 0; i < q; ++i) {
    data.push_back(split_samples(experiments[static_cast<size_t>(i)], config.train_fraction,
                                 mix_seed(config.seed, 500 + static_cast<std::uint64_t>(i))));
    scalings.push_back(scaling_for(experiments[static_cast<size_t>(i)].samples_xt));
  }

  // networks; the shared trunk reuses the first depth-2 layers across experiments
  const bool shared = config.architecture == Architecture::shared_trunk;
  NetworkConfig net_cfg = config.network;
  if (shared) net_cfg.width = shared_trunk_width(config.network, q);
  const int trunk_layers = net_cfg.depth - 2;

  std::vector<NetworkParams> nets;
  std::vector<AdamState> adam;
  for (int i = 0; i < q; ++i) {
    NetworkConfig ci = net_cfg;
    ci.seed = mix_seed(config.seed, 100 + static_cast<std::uint64_t>(i));
    nets.push_back(init_network(ci));
    adam.push_back(AdamState::zeros_like(nets.back()));
  }
  NetworkParams trunk;
  AdamState trunk_adam;
  if (shared) {
    trunk.omega0 = nets[0].omega0;
    trunk.layers.assign(nets[0].layers.begin(), nets[0].layers.begin() + trunk_layers);
    for (int i = 1; i < q; ++i)
      std::copy(trunk.layers.begin(), trunk.layers.end(), nets[static_cast<size_t>(i)].layers.begin());
    trunk_adam = AdamState::zeros_like(trunk);
  }

  DiscoveryResult res;
  res.labels = labels;
  res.xi = Eigen::MatrixXd::Zero(q, p);
  SparsityMask mask = all_ones_mask(q, p);
  res.mask_history.push_back(mask);

  int jet_order = config.max_order;
  std::vector<int> col_map = reduced_to_full(config.max_poly, config.max_order, jet_order);

  std::vector<double> test_history;
  int last_trigger = -1;
  int n_triggers = 0;
  const std::uint64_t stab_base = mix_seed(config.seed, 0xABCDull);

  auto full_libraries = [&]() {
    std::vector<TermLibrary> libs;
    for (int i = 0; i < q; ++i) {
      DerivativeBundle bundle = input_derivatives(nets[static_cast<size_t>(i)],
                                                  data[static_cast<size_t>(i)].train_xt,
                                                  config.max_order,
                                                  scalings[static_cast<size_t>(i)]);
      TermLibrary lib = build_library(bundle.value, bundle, config.max_poly, config.max_order);
      lib.experiment_id = experiments[static_cast<size_t>(i)].id;
      libs.push_back(std::move(lib));
    }
    return libs;
  };

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double total = 0.0, data_sum = 0.0, reg_sum = 0.0;
    std::vector<ParamGrads> grads;
    for (int i = 0; i < q; ++i) {
      const auto& d = data[static_cast<size_t>(i)];
      const double n = static_cast<double>(d.train_u.size());

      ForwardTape tape;
      DerivativeBundle bundle =
          forward_train(nets[static_cast<size_t>(i)], d.train_xt, jet_order,
                        scalings[static_cast<size_t>(i)], tape);
      TermLibrary lib = build_library(bundle.value, bundle, config.max_poly, jet_order);
      std::vector<char> rmask = reduce_mask(mask.active[static_cast<size_t>(i)], col_map);
      Eigen::VectorXd xi_r = refit_coefficients(lib, rmask, config.ridge_alpha);
      for (size_t jr = 0; jr < col_map.size(); ++jr)
        res.xi(i, col_map[jr]) = xi_r[static_cast<Eigen::Index>(jr)];

      ExperimentLoss el = masked_losses(bundle, lib, d.train_u, rmask, xi_r);
      total += el.data + el.reg;
      data_sum += el.data;
      reg_sum += el.reg;

      // adjoint of the loss wrt the derivative bundle; xi is held fixed
      DerivativeBundle adj;
      adj.value = (2.0 / n) * el.r_data;
      adj.dt = (2.0 / n) * el.r_reg;
      adj.dx.assign(static_cast<size_t>(jet_order),
                    Eigen::VectorXd::Zero(d.train_u.size()));
      std::vector<Eigen::VectorXd> u_pow(static_cast<size_t>(config.max_poly) + 1);
      u_pow[0] = Eigen::VectorXd::Ones(d.train_u.size());
      for (int a = 1; a <= config.max_poly; ++a)
        u_pow[static_cast<size_t>(a)] =
            u_pow[static_cast<size_t>(a - 1)].cwiseProduct(bundle.value);
      for (size_t jr = 0; jr < col_map.size(); ++jr) {
        const double c = xi_r[static_cast<Eigen::Index>(jr)];
        if (!rmask[jr] || c == 0.0) continue;
        const TermIndex ab = decode(static_cast<int>(jr), jet_order);
        const Eigen::VectorXd deriv_part =
            (ab.b == 0) ? Eigen::VectorXd::Ones(d.train_u.size())
                        : bundle.dx[static_cast<size_t>(ab.b - 1)];
        if (ab.a > 0)
          adj.value -= (2.0 * c * ab.a / n) *
                       el.r_reg.cwiseProduct(u_pow[static_cast<size_t>(ab.a - 1)])
                           .cwiseProduct(deriv_part);
        if (ab.b > 0)
          adj.dx[static_cast<size_t>(ab.b - 1)] -=
              (2.0 * c / n) * el.r_reg.cwiseProduct(u_pow[static_cast<size_t>(ab.a)]);
      }
      grads.push_back(backward(nets[static_cast<size_t>(i)], tape, adj));
    }
    if (!std::isfinite(total))
      throw std::runtime_error("run_discovery: non-finite loss at epoch " +
                               std::to_string(epoch));

    if (shared) {
      ParamGrads trunk_g;
      trunk_g.omega0 = trunk.omega0;
      trunk_g.layers.assign(grads[0].layers.begin(), grads[0].layers.begin() + trunk_layers);
      for (int i = 1; i < q; ++i)
        for (int l = 0; l < trunk_layers; ++l) {
          trunk_g.layers[static_cast<size_t>(l)].weight +=
              grads[static_cast<size_t>(i)].layers[static_cast<size_t>(l)].weight;
          trunk_g.layers[static_cast<size_t>(l)].bias +=
              grads[static_cast<size_t>(i)].layers[static_cast<size_t>(l)].bias;
        }
      adam_step(trunk, trunk_g, trunk_adam, config.lr, config.betas);
      for (int i = 0; i < q; ++i) {
        NetworkParams head;
        head.omega0 = nets[static_cast<size_t>(i)].omega0;
        head.layers.assign(nets[static_cast<size_t>(i)].layers.begin() + trunk_layers,
                           nets[static_cast<size_t>(i)].layers.end());
        ParamGrads head_g;
        head_g.omega0 = head.omega0;
        head_g.layers.assign(grads[static_cast<size_t>(i)].layers.begin() + trunk_layers,
                             grads[static_cast<size_t>(i)].layers.end());
        adam_step(head, head_g, adam[static_cast<size_t>(i)], config.lr, config.betas);
        std::copy(trunk.layers.begin(), trunk.layers.end(),
                  nets[static_cast<size_t>(i)].layers.begin());
        std::copy(head.layers.begin(), head.layers.end(),
                  nets[static_cast<size_t>(i)].layers.begin() + trunk_layers);
      }
    } else {
      for (int i = 0; i < q; ++i)
        adam_step(nets[static_cast<size_t>(i)], grads[static_cast<size_t>(i)],
                  adam[static_cast<size_t>(i)], config.lr, config.betas);
    }

    // held-out data MSE drives the trigger
    double test_total = 0.0;
    for (int i = 0; i < q; ++i) {
      const auto& d = data[static_cast<size_t>(i)];
      const Eigen::VectorXd pred =
          forward(nets[static_cast<size_t>(i)], d.test_xt, scalings[static_cast<size_t>(i)]);
      test_total += (pred - d.test_u).squaredNorm() / static_cast<double>(d.test_u.size());
    }
    test_history.push_back(test_total);
    res.trace.push_back({epoch, total, data_sum, reg_sum, test_total});
    res.epochs = epoch;

    if (!trigger_check(test_history, config.trigger, last_trigger)) continue;

    // sparsity trigger: stability selection on full-order network libraries
    std::vector<TermLibrary> libs = full_libraries();
    std::vector<StabilityReport> reports;
    if (config.mode == DiscoveryMode::grouped) {
      StabilityConfig scfg = config.stability;
      scfg.grouped = true;
      scfg.seed = mix_seed(stab_base, static_cast<std::uint64_t>(n_triggers) *
                                          static_cast<std::uint64_t>(q));
      reports.push_back(stable_set(StackedLibrary::from(libs), scfg));
    } else {
      for (int i = 0; i < q; ++i) {
        StabilityConfig scfg = config.stability;
        scfg.grouped = false;
        scfg.seed = mix_seed(stab_base, static_cast<std::uint64_t>(n_triggers) *
                                                static_cast<std::uint64_t>(q) +
                                            static_cast<std::uint64_t>(i));
        reports.push_back(stable_set(StackedLibrary::from({libs[static_cast<size_t>(i)]}), scfg));
      }
    }
    for (auto& r : reports) res.stability_history.push_back(r);

    SparsityMask next = update_mask(reports, config.mode, q, p, epoch);
    const bool fixpoint = same_active(next, mask) && mask.trigger_epoch >= 0;
    mask = next;
    res.mask_history.push_back(mask);
    last_trigger = epoch;
    ++n_triggers;

    jet_order = std::max(1, highest_masked_order(mask, config.max_order));
    col_map = reduced_to_full(config.max_poly, config.max_order, jet_order);

    if (fixpoint) {
      res.mask_fixpoint = true;
      break;
    }
  }

  // final refit on the full-order library at the trained parameters
  std::vector<TermLibrary> libs = full_libraries();
  res.xi.setZero();
  for (int i = 0; i < q; ++i)
    res.xi.row(i) = refit_coefficients(libs[static_cast<size_t>(i)],
                                       mask.active[static_cast<size_t>(i)], config.ridge_alpha)
                        .transpose();
  res.final_mask = mask;

  res.train_mse.resize(q);
  res.test_mse.resize(q);
  for (int i = 0; i < q; ++i) {
    const auto& d = data[static_cast<size_t>(i)];
    const Eigen::VectorXd pr =
        forward(nets[static_cast<size_t>(i)], d.train_xt, scalings[static_cast<size_t>(i)]);
    const Eigen::VectorXd pt =
        forward(nets[static_cast<size_t>(i)], d.test_xt, scalings[static_cast<size_t>(i)]);
    res.train_mse[i] = (pr - d.train_u).squaredNorm() / static_cast<double>(d.train_u.size());
    res.test_mse[i] = (pt - d.test_u).squaredNorm() / static_cast<double>(d.test_u.size());
  }
  res.test_mse_total = res.test_mse.sum();
  return res;
}

Metrics metrics(const DiscoveryResult& result, const GroundTruth& truth) {
  const int q = static_cast<int>(result.xi.rows());
  const int p = static_cast<int>(result.xi.cols());
  Metrics m;
  m.mse_test = result.test_mse_total;

  Eigen::MatrixXd xi_true = Eigen::MatrixXd::Zero(q, p);
  for (int i = 0; i < q; ++i)
    for (const auto& [label, value] : truth.coefficients[static_cast<size_t>(i)])
      xi_true(i, label_index(result.labels, label)) = value;

  m.success = true;
  for (int i = 0; i < q && m.success; ++i)
    for (int j = 0; j < p; ++j) {
      const bool found = result.xi(i, j) != 0.0;
      const bool expected = xi_true(i, j) != 0.0;
      if (found != expected) {
        m.success = false;
        break;
      }
    }
  m.coeff_error = (xi_true - result.xi).norm() / xi_true.norm();
  return m;
}

std::string discovery_result_json(const DiscoveryResult& res, const DiscoveryConfig& config) {
  nlohmann::json j;
  j["config"] = {
      {"mode", config.mode == DiscoveryMode::grouped ? "grouped" : "individual"},
      {"architecture",
       config.architecture == Architecture::shared_trunk ? "shared_trunk" : "separate"},
      {"lr", config.lr},
      {"betas", {config.betas.first, config.betas.second}},
      {"ridge_alpha", config.ridge_alpha},
      {"max_epochs", config.max_epochs},
      {"train_fraction", config.train_fraction},
      {"max_poly", config.max_poly},
      {"max_order", config.max_order},
      {"seed", config.seed},
      {"trigger",
       {{"patience", config.trigger.patience},
        {"period", config.trigger.period},
        {"min_delta", config.trigger.min_delta}}},
      {"stability",
       {{"n_subsamples", config.stability.n_subsamples},
        {"pi_threshold", config.stability.pi_threshold},
        {"ev_max", config.stability.ev_max},
        {"epsilon", config.stability.epsilon},
        {"n_lambda", config.stability.n_lambda}}},
      {"network",
       {{"depth", config.network.depth},
        {"width", config.network.width},
        {"omega0", config.network.omega0}}},
  };
  j["labels"] = res.labels;
  j["coefficients"] = nlohmann::json::array();
  for (int i = 0; i < res.xi.rows(); ++i) {
    nlohmann::json row = nlohmann::json::object();
    for (int c = 0; c < res.xi.cols(); ++c)
      if (res.xi(i, c) != 0.0) row[res.labels[static_cast<size_t>(c)]] = res.xi(i, c);
    j["coefficients"].push_back(row);
  }
  j["masks"] = nlohmann::json::array();
  for (const auto& m : res.mask_history) {
    nlohmann::json jm;
    jm["trigger_epoch"] = m.trigger_epoch;
    jm["active"] = nlohmann::json::array();
    for (const auto& row : m.active) jm["active"].push_back(std::vector<int>(row.begin(), row.end()));
    j["masks"].push_back(jm);
  }
  j["train_mse"] =
      std::vector<double>(res.train_mse.data(), res.train_mse.data() + res.train_mse.size());
  j["test_mse"] =
      std::vector<double>(res.test_mse.data(), res.test_mse.data() + res.test_mse.size());
  j["test_mse_total"] = res.test_mse_total;
  j["epochs"] = res.epochs;
  j["mask_fixpoint"] = res.mask_fixpoint;
  j["stability_reports"] = nlohmann::json::array();
  for (const auto& r : res.stability_history)
    j["stability_reports"].push_back(nlohmann::json::parse(stability_report_json(r)));
  return j.dump(2);
}

void export_trace_csv(const DiscoveryResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_trace_csv: cannot open " + path);
  out << "epoch,total,data,reg,test_mse\n";
  char buf[160];
  for (const auto& t : res.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", t.epoch, t.total, t.data,
                  t.reg, t.test_mse);
    out << buf;
  }
}

}  // namespace multipde
