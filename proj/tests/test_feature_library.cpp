#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "multipde/feature_library.hpp"
#include "multipde/rng.hpp"
#include "multipde/synthetic_data.hpp"

using namespace multipde;

TEST_CASE("default library has 36 uniquely labeled columns") {
  const auto labels = term_labels(5, 5);
  CHECK(labels.size() == 36);
  CHECK(labels[0] == "1");
  CHECK(labels[1] == "u_x");
  CHECK(labels[2] == "u_xx");
  CHECK(labels[6] == "u");
  CHECK(labels[7] == "u·u_x");
  CHECK(labels[35] == "u^5·u_xxxxx");
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) CHECK(labels[i] != labels[j]);
  CHECK(label_index(labels, "u_xx") == 2);
  CHECK(label_index(labels, "v") == -1);
}

TEST_CASE("constant field with zero derivatives fills only pure-poly columns") {
  const int n = 7;
  const double c = 1.5;
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, c);
  DerivativeBundle d;
  d.value = u;
  d.dt = Eigen::VectorXd::Zero(n);
  d.dx.assign(5, Eigen::VectorXd::Zero(n));
  const TermLibrary lib = build_library(u, d);
  CHECK(lib.p() == 36);
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b) {
      const int col = a * 6 + b;
      if (b == 0)
        CHECK(lib.theta(0, col) == doctest::Approx(std::pow(c, a)));
      else
        CHECK(lib.theta(0, col) == 0.0);
    }
}

TEST_CASE("length mismatch is an internal error") {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(5);
  DerivativeBundle d;
  d.value = u;
  d.dt = Eigen::VectorXd::Zero(4);
  d.dx.assign(5, Eigen::VectorXd::Zero(5));
  CHECK_THROWS_AS(build_library(u, d), std::logic_error);
}

TEST_CASE("least squares on the analytic burgers library recovers (nu, -1)") {
  const double nu = 0.25;
  const Experiment e = burgers_delta(nu, linspace(-3, 4, 400), linspace(0.2, 2.0, 100));
  const TermLibrary lib = build_library_fd(e);
  const int i_uxx = label_index(lib.labels, "u_xx");
  const int i_uux = label_index(lib.labels, "u·u_x");
  Eigen::MatrixXd sub(lib.n(), 2);
  sub.col(0) = lib.theta.col(i_uxx);
  sub.col(1) = lib.theta.col(i_uux);
  const Eigen::Vector2d coef = sub.colPivHouseholderQr().solve(lib.dudt);
  CHECK(std::abs(coef(0) - nu) / nu < 1e-2);
  CHECK(std::abs(coef(1) + 1.0) < 1e-2);
  // library explains dudt: ||dudt - Theta xi_true|| / ||dudt|| small
  const double rel = (lib.dudt - sub * Eigen::Vector2d(nu, -1.0)).norm() / lib.dudt.norm();
  CHECK(rel < 1e-2);
}

TEST_CASE("rebuilding a library reproduces it exactly") {
  const Experiment e = burgers_delta(0.1, linspace(-3, 4, 60), linspace(0.2, 2.0, 30));
  const TermLibrary a = build_library_fd(e);
  const TermLibrary b = build_library_fd(e);
  CHECK(a.labels == b.labels);
  CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.dudt - b.dudt).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalize_columns: unit norms and exact back-transform") {
  Rng rng(17);
  const int n = 40, p = 6;
  TermLibrary lib;
  lib.theta.resize(n, p);
  lib.dudt.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) lib.theta(i, j) = rng.normal() * (j + 1);
    lib.dudt(i) = rng.normal();
  }
  lib.labels = term_labels(1, 2);
  const NormalizedLibrary nl = normalize_columns(lib);
  for (int j = 0; j < p; ++j) CHECK(nl.lib.theta.col(j).norm() == doctest::Approx(1.0));
  CHECK(nl.zero_columns.empty());

  // OLS on both parameterizations agrees after back-transform
  const Eigen::VectorXd xi_raw = lib.theta.colPivHouseholderQr().solve(lib.dudt);
  const Eigen::VectorXd xi_norm = nl.lib.theta.colPivHouseholderQr().solve(nl.lib.dudt);
  const Eigen::VectorXd xi_back = xi_norm.array() / nl.scales.array();
  CHECK((xi_raw - xi_back).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero column is flagged with unit scale") {
  TermLibrary lib;
  lib.theta = Eigen::MatrixXd::Random(10, 3);
  lib.theta.col(1).setZero();
  lib.dudt = Eigen::VectorXd::Zero(10);
  lib.labels = {"1", "u_x", "u_xx"};
  const NormalizedLibrary nl = normalize_columns(lib);
  REQUIRE(nl.zero_columns.size() == 1);
  CHECK(nl.zero_columns[0] == 1);
  CHECK(nl.scales(1) == 1.0);
  CHECK(nl.lib.theta.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fd weights reproduce exact derivatives of polynomials") {
  const double h = 0.1;
  for (int m = 1; m <= 5; ++m) {
    const Eigen::VectorXd w = fd_central_weights(m, 4, h);
    // d^m/dx^m x^m = m! at 0
    double acc = 0.0;
    double fact = 1.0;
    for (int k = 2; k <= m; ++k) fact *= k;
    for (int s = -4; s <= 4; ++s) acc += w(s + 4) * std::pow(s * h, m);
    CHECK(acc == doctest::Approx(fact).epsilon(1e-8));
    // and annihilates lower powers
    double low = 0.0;
    for (int s = -4; s <= 4; ++s) low += w(s + 4) * std::pow(s * h, m - 1);
    CHECK(std::abs(low) < 1e-6 / std::pow(h, m));
  }
}

TEST_CASE("library exports to labeled csv") {
  namespace fs = std::filesystem;
  const Experiment e = burgers_delta(0.1, linspace(-3, 4, 40), linspace(0.2, 2.0, 20));
  const TermLibrary lib = build_library_fd(e, 2, 2);
  const auto path = (fs::temp_directory_path() / "multipde_lib.csv").string();
  export_library_csv(lib, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "dudt,1,u_x,u_xx,u,u·u_x,u·u_xx,u^2,u^2·u_x,u^2·u_xx");
  fs::remove(path);
}

TEST_CASE("stacked library requires identical label sets") {
  const Experiment e = burgers_delta(0.1, linspace(-3, 4, 40), linspace(0.2, 2.0, 20));
  TermLibrary a = build_library_fd(e, 2, 2);
  TermLibrary b = build_library_fd(e, 2, 2);
  const StackedLibrary s = StackedLibrary::from({a, b});
  CHECK(s.q() == 2);
  CHECK(s.p() == 9);
  TermLibrary c = build_library_fd(e, 1, 2);
  CHECK_THROWS_AS(StackedLibrary::from({a, c}), std::invalid_argument);
}
