#include "multipde/synthetic_data.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "multipde/rng.hpp"

namespace multipde {

namespace {

void check_strictly_increasing(const Eigen::VectorXd& v, const char* name) {
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (!(v(i) > v(i - 1))) {
      std::ostringstream oss;
      oss << "Experiment: " << name << " grid must be strictly increasing";
      throw std::domain_error(oss.str());
    }
}

std::string format_param(double v) {
  std::ostringstream oss;
  oss << v;
  return oss.str();
}

double field_std(const Eigen::MatrixXd& u) {
  const double mean = u.mean();
  return std::sqrt((u.array() - mean).square().mean());
}

}  // namespace

void Experiment::refresh_samples_from_grid() {
  const Eigen::Index nt = t.size(), nx = x.size();
  samples_xt.resize(nt * nx, 2);
  samples_u.resize(nt * nx);
  for (Eigen::Index i = 0; i < nt; ++i)
    for (Eigen::Index j = 0; j < nx; ++j) {
      samples_xt(i * nx + j, 0) = x(j);
      samples_xt(i * nx + j, 1) = t(i);
      samples_u(i * nx + j) = u(i, j);
    }
}

void Experiment::validate() const {
  check_strictly_increasing(x, "x");
  check_strictly_increasing(t, "t");
  if (u.rows() != t.size() || u.cols() != x.size())
    throw std::domain_error("Experiment: u must be nt x nx");
  if (!u.allFinite()) throw std::domain_error("Experiment: non-finite field values");
  if (samples_xt.rows() != samples_u.size())
    throw std::domain_error("Experiment: sample view size mismatch");
}

GroundTruth ground_truth(const std::vector<Experiment>& experiments) {
  GroundTruth gt;
  for (const auto& e : experiments) {
    std::map<std::string, double> coeff;
    if (e.pde_name == "burgers") {
      coeff["u_xx"] = e.params.at("nu");
      coeff["u·u_x"] = -1.0;
    } else if (e.pde_name == "kdv") {
      coeff["u·u_x"] = -6.0;
      coeff["u_xxx"] = -1.0;
    } else if (e.pde_name == "ks") {
      coeff["u·u_x"] = -1.0;
      coeff["u_xx"] = -1.0;
      coeff["u_xxxx"] = -1.0;
    } else {
      throw std::domain_error("ground_truth: unknown pde_name '" + e.pde_name + "'");
    }
    for (const auto& [label, value] : coeff) {
      bool known = false;
      for (const auto& l : gt.active_terms) known = known || (l == label);
      if (!known) gt.active_terms.push_back(label);
    }
    gt.coefficients.push_back(std::move(coeff));
  }
  return gt;
}

Eigen::VectorXd linspace(double a, double b, int n) {
  if (n < 2) throw std::domain_error("linspace: n must be >= 2");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = a + (b - a) * i / (n - 1);
  return v;
}

Experiment burgers_delta(double nu, const Eigen::VectorXd& x, const Eigen::VectorXd& t,
                         double amplitude) {
  if (nu <= 0.0) throw std::domain_error("burgers_delta: nu must be positive");
  if (t.size() == 0 || t.minCoeff() <= 0.0)
    throw std::domain_error("burgers_delta: t must be positive (delta at t=0 excluded)");
  Experiment e;
  e.pde_name = "burgers";
  e.params = {{"nu", nu}, {"amplitude", amplitude}};
  e.id = "burgers_delta_nu" + format_param(nu);
  e.x = x;
  e.t = t;
  e.u.resize(t.size(), x.size());
  const double reynolds = amplitude / (2.0 * nu);
  const double expm = std::expm1(reynolds);  // e^R - 1
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double ti = t(i);
    const double pref = std::sqrt(nu / (M_PI * ti));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double z = x(j) / (2.0 * std::sqrt(nu * ti));
      const double num = pref * expm * std::exp(-z * z);
      const double den = 1.0 + 0.5 * expm * std::erfc(z);
      e.u(i, j) = num / den;
    }
  }
  e.refresh_samples_from_grid();
  e.validate();
  return e;
}

Experiment burgers_ic_variant(double nu, IcKind kind, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& t) {
  if (nu <= 0.0) throw std::domain_error("burgers_ic_variant: nu must be positive");
  if (kind == IcKind::delta) {
    Experiment e = burgers_delta(nu, x, t);
    e.id = "burgers_delta_nu" + format_param(nu);
    return e;
  }
  Experiment e;
  e.pde_name = "burgers";
  e.params = {{"nu", nu}};
  e.x = x;
  e.t = t;
  e.u.resize(t.size(), x.size());
  if (kind == IcKind::periodic) {
    // Cole-Hopf with phi = a0 + b1 e^{-nu t} cos(x) + b2 e^{-4 nu t} cos(2x):
    // u = -2 nu phi_x / phi is an exact periodic solution for any phi > 0.
    e.id = "burgers_periodic_nu" + format_param(nu);
    const double a0 = 2.0, b1 = 1.0, b2 = 0.25;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double d1 = std::exp(-nu * t(i)), d2 = std::exp(-4.0 * nu * t(i));
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double phi = a0 + b1 * d1 * std::cos(x(j)) + b2 * d2 * std::cos(2.0 * x(j));
        const double phi_x = -b1 * d1 * std::sin(x(j)) - 2.0 * b2 * d2 * std::sin(2.0 * x(j));
        e.u(i, j) = -2.0 * nu * phi_x / phi;
      }
    }
  } else {  // step
    // traveling-wave (tanh) profile joining u_l = 1 to u_r = 0
    e.id = "burgers_step_nu" + format_param(nu);
    const double ul = 1.0, ur = 0.0, speed = 0.5 * (ul + ur), x0 = -1.0;
    e.params["speed"] = speed;
    for (Eigen::Index i = 0; i < t.size(); ++i)
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double arg = (ul - ur) * (x(j) - speed * t(i) - x0) / (4.0 * nu);
        e.u(i, j) = speed - 0.5 * (ul - ur) * std::tanh(arg);
      }
  }
  e.refresh_samples_from_grid();
  e.validate();
  return e;
}

Experiment kdv_solitons(SolitonKind kind, const std::vector<double>& speeds,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
  const std::size_t need = (kind == SolitonKind::single) ? 1 : 2;
  if (speeds.size() != need)
    throw std::domain_error("kdv_solitons: wrong number of speeds for the requested kind");
  for (double c : speeds)
    if (c <= 0.0) throw std::domain_error("kdv_solitons: speeds must be positive");
  if (need == 2 && speeds[0] == speeds[1])
    throw std::domain_error("kdv_solitons: two-soliton speeds must be distinct");

  Experiment e;
  e.pde_name = "kdv";
  e.x = x;
  e.t = t;
  e.u.resize(t.size(), x.size());
  if (kind == SolitonKind::single) {
    const double c = speeds[0], x0 = -5.0;
    e.id = "kdv_single_c" + format_param(c);
    e.params = {{"c", c}, {"x0", x0}};
    for (Eigen::Index i = 0; i < t.size(); ++i)
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double arg = 0.5 * std::sqrt(c) * (x(j) - c * t(i) - x0);
        const double s = 1.0 / std::cosh(arg);
        e.u(i, j) = 0.5 * c * s * s;
      }
  } else {
    // Hirota two-soliton: u = 2 (F F_xx - F_x^2) / F^2 with
    // F = 1 + e1 + e2 + a12 e1 e2, eta_i = k_i (x - c_i t) + d_i, c_i = k_i^2.
    const double k1 = std::sqrt(speeds[0]), k2 = std::sqrt(speeds[1]);
    const double x1 = -6.0, x2 = -2.0;  // initial soliton centers
    const double a12 = std::pow((k1 - k2) / (k1 + k2), 2);
    e.id = "kdv_double_c" + format_param(speeds[0]) + "_" + format_param(speeds[1]);
    e.params = {{"c1", speeds[0]}, {"c2", speeds[1]}, {"x1", x1}, {"x2", x2}};
    for (Eigen::Index i = 0; i < t.size(); ++i)
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double e1 = std::exp(k1 * (x(j) - speeds[0] * t(i) - x1));
        const double e2 = std::exp(k2 * (x(j) - speeds[1] * t(i) - x2));
        const double f = 1.0 + e1 + e2 + a12 * e1 * e2;
        const double fx = k1 * e1 + k2 * e2 + a12 * (k1 + k2) * e1 * e2;
        const double fxx =
            k1 * k1 * e1 + k2 * k2 * e2 + a12 * (k1 + k2) * (k1 + k2) * e1 * e2;
        e.u(i, j) = 2.0 * (f * fxx - fx * fx) / (f * f);
      }
  }
  e.refresh_samples_from_grid();
  e.validate();
  return e;
}

AnalyticJet kdv_analytic_jet(const Experiment& exp, int max_order) {
  if (exp.pde_name != "kdv")
    throw std::domain_error("kdv_analytic_jet: experiment is not a kdv solution");
  if (max_order < 0 || max_order > 10)
    throw std::domain_error("kdv_analytic_jet: unsupported max_order");

  // u = 2 d^2/dx^2 log F with F = sum of exponentials exp(kx*x + kt*t + c0)
  struct Term {
    double kx, kt, c0;
  };
  std::vector<Term> terms = {{0.0, 0.0, 0.0}};  // the constant 1
  if (exp.params.count("c")) {
    const double c = exp.params.at("c"), x0 = exp.params.at("x0");
    const double k = std::sqrt(c);
    terms.push_back({k, -k * c, -k * x0});
  } else {
    const double c1 = exp.params.at("c1"), c2 = exp.params.at("c2");
    const double x1 = exp.params.at("x1"), x2 = exp.params.at("x2");
    const double k1 = std::sqrt(c1), k2 = std::sqrt(c2);
    const double a12 = std::pow((k1 - k2) / (k1 + k2), 2);
    terms.push_back({k1, -k1 * c1, -k1 * x1});
    terms.push_back({k2, -k2 * c2, -k2 * x2});
    terms.push_back({k1 + k2, -k1 * c1 - k2 * c2, -k1 * x1 - k2 * x2 + std::log(a12)});
  }

  const int K = max_order + 2;  // log-F derivative orders needed
  std::vector<std::vector<double>> binom(K + 1, std::vector<double>(K + 1, 0.0));
  for (int m = 0; m <= K; ++m) {
    binom[m][0] = 1.0;
    for (int j = 1; j <= m; ++j)
      binom[m][j] = binom[m - 1][j - 1] + (j <= m - 1 ? binom[m - 1][j] : 0.0);
  }

  const Eigen::Index n = exp.samples_xt.rows();
  AnalyticJet jet;
  jet.dx.resize(n, max_order + 1);
  jet.dt.resize(n);
  std::vector<double> a(terms.size()), h(K + 1), hdot(K + 1), kap(K + 1), kapdot(K + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = exp.samples_xt(i, 0), t = exp.samples_xt(i, 1);
    // factor out the largest exponent so F stays finite far from the solitons
    double mx = 0.0;
    for (size_t m = 0; m < terms.size(); ++m)
      mx = std::max(mx, terms[m].kx * x + terms[m].kt * t + terms[m].c0);
    double f = 0.0;
    for (size_t m = 0; m < terms.size(); ++m) {
      a[m] = std::exp(terms[m].kx * x + terms[m].kt * t + terms[m].c0 - mx);
      f += a[m];
    }
    // moments h_m = (d^m F/dx^m)/F and their time derivatives
    for (int m = 0; m <= K; ++m) {
      double s = 0.0, sd = 0.0;
      for (size_t g = 0; g < terms.size(); ++g) {
        const double kp = std::pow(terms[g].kx, m) * a[g];
        s += kp;
        sd += kp * terms[g].kt;
      }
      h[m] = s / f;
      hdot[m] = sd / f;
    }
    const double ft = hdot[0];  // F_t/F
    for (int m = 0; m <= K; ++m) hdot[m] -= h[m] * ft;
    // cumulant recursion gives the log-F derivatives
    kap[0] = kapdot[0] = 0.0;
    for (int m = 1; m <= K; ++m) {
      double s = h[m], sd = hdot[m];
      for (int j = 1; j < m; ++j) {
        s -= binom[m - 1][j - 1] * kap[j] * h[m - j];
        sd -= binom[m - 1][j - 1] * (kapdot[j] * h[m - j] + kap[j] * hdot[m - j]);
      }
      kap[m] = s;
      kapdot[m] = sd;
    }
    for (int b = 0; b <= max_order; ++b) jet.dx(i, b) = 2.0 * kap[b + 2];
    jet.dt(i) = 2.0 * kapdot[2];
  }
  return jet;
}

namespace {

std::mutex fftw_mutex;

// in-place complex FFT helpers guarding FFTW's non-thread-safe planner
struct Fft1d {
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<std::complex<double>> buf;
  int n = 0;

  explicit Fft1d(int n_) : buf(n_), n(n_) {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
    fwd = fftw_plan_dft_1d(n, ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(n, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft1d() {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  void forward(std::vector<std::complex<double>>& v) {
    buf = v;
    fftw_execute(fwd);
    v = buf;
  }
  void backward(std::vector<std::complex<double>>& v) {
    buf = v;
    fftw_execute(bwd);
    for (auto& z : v = buf) z /= n;
  }
};

}  // namespace

Experiment ks_numerical(const KsOptions& opts) {
  const int nx = opts.nx;
  if (nx < 8) throw std::domain_error("ks_numerical: nx too small");
  if (opts.dt_substep <= 0 || opts.dt <= 0 || opts.n_steps < 1)
    throw std::domain_error("ks_numerical: invalid time stepping");
  const int sub = std::max(1, static_cast<int>(std::round(opts.dt / opts.dt_substep)));
  const double h = opts.dt / sub;
  const double L = opts.domain_length;

  Fft1d fft(nx);
  using cd = std::complex<double>;
  std::vector<double> k(nx);
  for (int j = 0; j < nx; ++j) {
    const int m = (j <= nx / 2) ? j : j - nx;
    k[j] = 2.0 * M_PI * m / L;
  }

  // linear operator k^2 - k^4 and ETDRK4 phi-coefficients via the standard
  // 32-point contour quadrature
  std::vector<double> lin(nx), E(nx), E2(nx);
  std::vector<cd> Q(nx), f1(nx), f2(nx), f3(nx);
  const int M = 32;
  for (int j = 0; j < nx; ++j) {
    lin[j] = k[j] * k[j] - std::pow(k[j], 4);
    E[j] = std::exp(h * lin[j]);
    E2[j] = std::exp(0.5 * h * lin[j]);
    cd q = 0, a = 0, b = 0, c = 0;
    for (int m = 0; m < M; ++m) {
      const cd r = std::exp(cd(0, M_PI * (m + 0.5) / M));
      const cd z = h * lin[j] + r;
      const cd ez = std::exp(z);
      q += (std::exp(z / 2.0) - 1.0) / z;
      a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / (z * z * z);
      b += (2.0 + z + ez * (-2.0 + z)) / (z * z * z);
      c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / (z * z * z);
    }
    Q[j] = h * q / double(M);
    f1[j] = h * a / double(M);
    f2[j] = h * b / double(M);
    f3[j] = h * c / double(M);
  }

  std::vector<cd> v(nx);
  Eigen::VectorXd xg(nx);
  for (int j = 0; j < nx; ++j) {
    xg(j) = L * j / nx;
    const double s = xg(j) / 16.0;
    v[j] = (opts.ic == KsIc::zero) ? cd(0, 0) : cd(std::cos(s) * (1.0 + std::sin(s)), 0.0);
  }
  const bool zero_ic = (opts.ic == KsIc::zero);
  fft.forward(v);

  // 2/3-rule dealiasing mask
  std::vector<double> mask(nx, 1.0);
  for (int j = 0; j < nx; ++j) {
    const int m = (j <= nx / 2) ? j : nx - j;
    if (m > nx / 3) mask[j] = 0.0;
  }

  auto nonlinear = [&](const std::vector<cd>& vh) {
    std::vector<cd> w = vh;
    fft.backward(w);
    for (auto& z : w) z = cd(z.real() * z.real(), 0.0);
    fft.forward(w);
    for (int j = 0; j < nx; ++j) w[j] *= cd(0, -0.5 * k[j]) * mask[j];
    return w;
  };

  Experiment e;
  e.pde_name = "ks";
  e.id = "ks_L" + format_param(L);
  e.params = {{"domain_length", L}};
  e.x = xg;
  e.t.resize(opts.n_steps + 1);
  e.u.resize(opts.n_steps + 1, nx);

  // spin-up to t0 without recording
  const int spin = (opts.t0 > 0) ? static_cast<int>(std::round(opts.t0 / h)) : 0;

  auto record = [&](int row, double time) {
    std::vector<cd> w = v;
    fft.backward(w);
    e.t(row) = time;
    for (int j = 0; j < nx; ++j) e.u(row, j) = w[j].real();
    if (!e.u.row(row).allFinite())
      throw std::runtime_error("ks_numerical: integration diverged (non-finite field)");
  };

  auto step = [&]() {
    const std::vector<cd> Nv = nonlinear(v);
    std::vector<cd> a(nx), bvec(nx), cvec(nx);
    for (int j = 0; j < nx; ++j) a[j] = E2[j] * v[j] + Q[j] * Nv[j];
    const std::vector<cd> Na = nonlinear(a);
    for (int j = 0; j < nx; ++j) bvec[j] = E2[j] * v[j] + Q[j] * Na[j];
    const std::vector<cd> Nb = nonlinear(bvec);
    for (int j = 0; j < nx; ++j) cvec[j] = E2[j] * a[j] + Q[j] * (2.0 * Nb[j] - Nv[j]);
    const std::vector<cd> Nc = nonlinear(cvec);
    for (int j = 0; j < nx; ++j)
      v[j] = E[j] * v[j] + Nv[j] * f1[j] + 2.0 * (Na[j] + Nb[j]) * f2[j] + Nc[j] * f3[j];
  };

  if (zero_ic) {
    // fixed point: keep the trajectory exactly zero
    for (int r = 0; r <= opts.n_steps; ++r) {
      e.t(r) = opts.t0 + r * opts.dt;
      e.u.row(r).setZero();
    }
  } else {
    for (int s = 0; s < spin; ++s) step();
    record(0, opts.t0);
    for (int r = 1; r <= opts.n_steps; ++r) {
      for (int s = 0; s < sub; ++s) step();
      record(r, opts.t0 + r * opts.dt);
    }
  }
  e.refresh_samples_from_grid();
  e.validate();
  return e;
}

Experiment add_noise(const Experiment& exp, double level, std::uint64_t seed) {
  if (level < 0.0) throw std::domain_error("add_noise: level must be >= 0");
  Experiment out = exp;
  out.noise_level = level;
  out.seed = seed;
  out.noise_convention = "sigma = level * std(clean u) over the full grid";
  if (level > 0.0) {
    Rng rng(seed);
    const double sigma = level * field_std(exp.u);
    for (Eigen::Index i = 0; i < out.u.rows(); ++i)
      for (Eigen::Index j = 0; j < out.u.cols(); ++j) out.u(i, j) += sigma * rng.normal();
  }
  out.refresh_samples_from_grid();
  return out;
}

Experiment subsample(const Experiment& exp, const SubsampleSpec& spec) {
  Experiment out = exp;
  if (spec.strategy == SampleStrategy::grid) {
    const Eigen::Index nt = exp.t.size(), nx = exp.x.size();
    if (spec.nt < 2 || spec.nx < 2 || spec.nt > nt || spec.nx > nx)
      throw std::domain_error("subsample: grid shape out of range");
    Eigen::VectorXd tsub(spec.nt), xsub(spec.nx);
    std::vector<Eigen::Index> ti(spec.nt), xi(spec.nx);
    for (int i = 0; i < spec.nt; ++i)
      ti[i] = static_cast<Eigen::Index>(std::llround(double(i) * (nt - 1) / (spec.nt - 1)));
    for (int j = 0; j < spec.nx; ++j)
      xi[j] = static_cast<Eigen::Index>(std::llround(double(j) * (nx - 1) / (spec.nx - 1)));
    Eigen::MatrixXd usub(spec.nt, spec.nx);
    for (int i = 0; i < spec.nt; ++i) {
      tsub(i) = exp.t(ti[i]);
      for (int j = 0; j < spec.nx; ++j) {
        xsub(j) = exp.x(xi[j]);
        usub(i, j) = exp.u(ti[i], xi[j]);
      }
    }
    out.t = tsub;
    out.x = xsub;
    out.u = usub;
    out.refresh_samples_from_grid();
  } else {
    const Eigen::Index total = exp.t.size() * exp.x.size();
    if (spec.n < 1 || spec.n > total)
      throw std::domain_error("subsample: requested more samples than available");
    // partial Fisher-Yates over flattened grid indices
    Rng rng(spec.seed);
    std::vector<Eigen::Index> idx(total);
    for (Eigen::Index i = 0; i < total; ++i) idx[i] = i;
    for (int i = 0; i < spec.n; ++i) {
      const Eigen::Index j = i + static_cast<Eigen::Index>(rng.integer(total - i));
      std::swap(idx[i], idx[j]);
    }
    const Eigen::Index nx = exp.x.size();
    out.samples_xt.resize(spec.n, 2);
    out.samples_u.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) {
      const Eigen::Index r = idx[i] / nx, c = idx[i] % nx;
      out.samples_xt(i, 0) = exp.x(c);
      out.samples_xt(i, 1) = exp.t(r);
      out.samples_u(i) = exp.u(r, c);
    }
  }
  return out;
}

}  // namespace multipde
