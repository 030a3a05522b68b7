#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace multipde {

// One dataset: a spatiotemporal field on a grid plus the flattened sample
// view consumed by training. Generators fill the sample view with the full
// grid; subsample() reduces it.
struct Experiment {
  std::string id;
  std::string pde_name;  // "burgers", "kdv", "ks"
  std::map<std::string, double> params;
  Eigen::VectorXd x;   // nx, strictly increasing
  Eigen::VectorXd t;   // nt, strictly increasing
  Eigen::MatrixXd u;   // nt x nx
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::string noise_convention;

  Eigen::MatrixXd samples_xt;  // n x 2 (x, t)
  Eigen::VectorXd samples_u;   // n

  Eigen::Index n_samples() const { return samples_u.size(); }
  void refresh_samples_from_grid();
  void validate() const;  // throws std::domain_error on inconsistent fields
};

struct GroundTruth {
  std::vector<std::string> active_terms;
  std::vector<std::map<std::string, double>> coefficients;  // one map per experiment
};

// True support and coefficients in the standard term-label convention.
GroundTruth ground_truth(const std::vector<Experiment>& experiments);

Eigen::VectorXd linspace(double a, double b, int n);

// Analytic Cole-Hopf solution of u_t = nu*u_xx - u*u_x with a Dirac-delta
// initial mass of the given amplitude.
Experiment burgers_delta(double nu, const Eigen::VectorXd& x, const Eigen::VectorXd& t,
                         double amplitude = 1.0);

enum class IcKind { delta, periodic, step };

Experiment burgers_ic_variant(double nu, IcKind kind, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& t);

enum class SolitonKind { single, two };

// Analytic solution of u_t = -6*u*u_x - u_xxx. speeds: one entry for single,
// two distinct entries for the two-soliton solution.
Experiment kdv_solitons(SolitonKind kind, const std::vector<double>& speeds,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& t);

// Exact derivatives of an analytic solution at the experiment's sample
// coordinates, noise-free regardless of the stored field.
struct AnalyticJet {
  Eigen::MatrixXd dx;  // n x (max_order + 1); column b holds d^b u / dx^b
  Eigen::VectorXd dt;  // n
};

// Closed-form jet of the KdV soliton solutions. The solitons are
// u = 2 d^2/dx^2 log F with F a sum of exponentials, so every derivative
// follows from the moment-cumulant recursion on F^(n)/F.
AnalyticJet kdv_analytic_jet(const Experiment& exp, int max_order);

enum class KsIc { cosine, zero };

struct KsOptions {
  double domain_length = 32.0 * M_PI;
  int nx = 1024;
  double dt = 0.25;        // output interval
  int n_steps = 400;       // recorded steps (t = 0 .. n_steps*dt)
  double dt_substep = 0.05;
  double t0 = 0.0;         // discard the trajectory before t0 (spin-up)
  KsIc ic = KsIc::cosine;
};

// Spectral ETDRK4 integration of u_t = -u*u_x - u_xx - u_xxxx on a periodic
// domain. The cosine IC is the standard chaotic seed u0 = cos(x/16)(1+sin(x/16)).
Experiment ks_numerical(const KsOptions& opts);

// u <- u + level * std(u) * eps, eps iid standard normal; resets the sample
// view to the full grid.
Experiment add_noise(const Experiment& exp, double level, std::uint64_t seed);

enum class SampleStrategy { grid, random };

struct SubsampleSpec {
  SampleStrategy strategy = SampleStrategy::random;
  int n = 0;        // random: number of samples
  int nt = 0;       // grid: subgrid shape
  int nx = 0;
  std::uint64_t seed = 0;
};

Experiment subsample(const Experiment& exp, const SubsampleSpec& spec);

}  // namespace multipde
