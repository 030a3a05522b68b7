#include "multipde/feature_library.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace multipde {

std::vector<std::string> term_labels(int max_poly, int max_order) {
  std::vector<std::string> labels;
  labels.reserve((max_poly + 1) * (max_order + 1));
  for (int a = 0; a <= max_poly; ++a) {
    std::string poly;
    if (a == 1) poly = "u";
    else if (a > 1) poly = "u^" + std::to_string(a);
    for (int b = 0; b <= max_order; ++b) {
      std::string deriv;
      if (b > 0) deriv = "u_" + std::string(b, 'x');
      if (poly.empty() && deriv.empty()) labels.push_back("1");
      else if (poly.empty()) labels.push_back(deriv);
      else if (deriv.empty()) labels.push_back(poly);
      else labels.push_back(poly + "·" + deriv);
    }
  }
  return labels;
}

int label_index(const std::vector<std::string>& labels, const std::string& label) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

StackedLibrary StackedLibrary::from(std::vector<TermLibrary> libs) {
  if (libs.empty()) throw std::invalid_argument("StackedLibrary: no experiments");
  StackedLibrary s;
  s.labels = libs.front().labels;
  for (const auto& l : libs)
    if (l.labels != s.labels)
      throw std::invalid_argument("StackedLibrary: label sets differ across experiments");
  s.experiments = std::move(libs);
  return s;
}

TermLibrary build_library(const Eigen::VectorXd& u, const DerivativeBundle& derivs, int max_poly,
                          int max_order) {
  const Eigen::Index n = u.size();
  if (derivs.value.size() != 0 && derivs.value.size() != n)
    throw std::logic_error("build_library: u/derivative length mismatch");
  if (derivs.dt.size() != n) throw std::logic_error("build_library: dudt length mismatch");
  if (derivs.max_order() < max_order)
    throw std::logic_error("build_library: derivative bundle order too low");
  for (const auto& d : derivs.dx)
    if (d.size() != n) throw std::logic_error("build_library: derivative length mismatch");

  TermLibrary lib;
  lib.labels = term_labels(max_poly, max_order);
  lib.dudt = derivs.dt;
  lib.theta.resize(n, (max_poly + 1) * (max_order + 1));
  Eigen::VectorXd upow = Eigen::VectorXd::Ones(n);
  for (int a = 0; a <= max_poly; ++a) {
    for (int b = 0; b <= max_order; ++b) {
      const int col = a * (max_order + 1) + b;
      if (b == 0)
        lib.theta.col(col) = upow;
      else
        lib.theta.col(col) = upow.array() * derivs.dx[b - 1].array();
    }
    upow.array() *= u.array();
  }
  return lib;
}

NormalizedLibrary normalize_columns(const TermLibrary& lib) {
  NormalizedLibrary out;
  out.lib = lib;
  out.scales.resize(lib.p());
  for (int j = 0; j < lib.p(); ++j) {
    const double norm = lib.theta.col(j).norm();
    if (norm < 1e-200) {
      out.scales(j) = 1.0;
      out.zero_columns.push_back(j);
    } else {
      out.scales(j) = norm;
      out.lib.theta.col(j) /= norm;
    }
  }
  return out;
}

Eigen::VectorXd fd_central_weights(int m, int half, double h) {
  // Fornberg's algorithm on the symmetric stencil {-half..half}*h about 0
  const int n = 2 * half;  // highest node index
  Eigen::VectorXd nodes(n + 1);
  for (int i = 0; i <= n; ++i) nodes(i) = (i - half) * h;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 1, m + 1);
  double c1 = 1.0, c4 = nodes(0);
  c(0, 0) = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes(i);
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes(i) - nodes(j);
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(m);
}

namespace {

void check_uniform(const Eigen::VectorXd& v, const char* name) {
  if (v.size() < 3) return;
  const double h = v(1) - v(0);
  for (Eigen::Index i = 2; i < v.size(); ++i)
    if (std::abs((v(i) - v(i - 1)) - h) > 1e-9 * std::abs(h))
      throw std::domain_error(std::string("grid_fd_derivatives: non-uniform ") + name + " grid");
}

}  // namespace

GridDerivatives grid_fd_derivatives(const Experiment& exp, int max_order, int margin) {
  if (max_order < 1 || max_order > 5)
    throw std::invalid_argument("grid_fd_derivatives: max_order must be in [1, 5]");
  check_uniform(exp.x, "x");
  check_uniform(exp.t, "t");
  const int half_x = 4, half_t = 2;
  const int mx = std::max(half_x, margin), mt = std::max(half_t, margin);
  const Eigen::Index nt = exp.t.size(), nx = exp.x.size();
  if (nx <= 2 * mx || nt <= 2 * mt)
    throw std::domain_error("grid_fd_derivatives: grid too small for the stencil");
  const double hx = exp.x(1) - exp.x(0), ht = exp.t(1) - exp.t(0);

  std::vector<Eigen::VectorXd> wx(max_order);
  for (int m = 1; m <= max_order; ++m) wx[m - 1] = fd_central_weights(m, half_x, hx);
  const Eigen::VectorXd wt = fd_central_weights(1, half_t, ht);

  const Eigen::Index ni = nt - 2 * mt, nj = nx - 2 * mx;
  GridDerivatives out;
  out.u.resize(ni * nj);
  out.xt.resize(ni * nj, 2);
  out.derivs.value.resize(ni * nj);
  out.derivs.dt.resize(ni * nj);
  out.derivs.dx.assign(max_order, Eigen::VectorXd::Zero(ni * nj));

  for (Eigen::Index i = 0; i < ni; ++i) {
    const Eigen::Index gi = i + mt;
    for (Eigen::Index j = 0; j < nj; ++j) {
      const Eigen::Index gj = j + mx;
      const Eigen::Index row = i * nj + j;
      out.u(row) = exp.u(gi, gj);
      out.derivs.value(row) = exp.u(gi, gj);
      out.xt(row, 0) = exp.x(gj);
      out.xt(row, 1) = exp.t(gi);
      double dt = 0.0;
      for (int s = -half_t; s <= half_t; ++s) dt += wt(s + half_t) * exp.u(gi + s, gj);
      out.derivs.dt(row) = dt;
      for (int m = 1; m <= max_order; ++m) {
        double d = 0.0;
        for (int s = -half_x; s <= half_x; ++s) d += wx[m - 1](s + half_x) * exp.u(gi, gj + s);
        out.derivs.dx[m - 1](row) = d;
      }
    }
  }
  return out;
}

TermLibrary build_library_analytic(const Experiment& exp, int max_poly, int max_order) {
  const AnalyticJet jet = kdv_analytic_jet(exp, max_order);
  DerivativeBundle bundle;
  bundle.value = jet.dx.col(0);
  bundle.dt = jet.dt;
  for (int b = 1; b <= max_order; ++b) bundle.dx.push_back(jet.dx.col(b));
  TermLibrary lib = build_library(bundle.value, bundle, max_poly, max_order);
  lib.experiment_id = exp.id;
  return lib;
}

TermLibrary build_library_fd(const Experiment& exp, int max_poly, int max_order, int margin) {
  const GridDerivatives gd = grid_fd_derivatives(exp, max_order, margin);
  TermLibrary lib = build_library(gd.u, gd.derivs, max_poly, max_order);
  lib.experiment_id = exp.id;
  return lib;
}

void export_library_csv(const TermLibrary& lib, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_library_csv: cannot open '" + path + "'");
  os << "dudt";
  for (const auto& l : lib.labels) os << "," << l;
  os << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < lib.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", lib.dudt(i));
    os << buf;
    for (int j = 0; j < lib.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", lib.theta(i, j));
      os << "," << buf;
    }
    os << "\n";
  }
}

}  // namespace multipde
