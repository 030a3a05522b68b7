#include "multipde/sparse_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multipde/rng.hpp"

namespace multipde {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void check_penalties(const Eigen::VectorXd& pen, Eigen::Index p) {
  if (pen.size() != p) throw std::invalid_argument("penalty vector length mismatch");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(pen[j] > 0.0)) throw std::invalid_argument("penalties must be positive");
  }
}

// Dual-feasible correlation bound for the weighted lasso.
double lasso_dual_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& r, double lambda, const Eigen::VectorXd& pen) {
  const double n = static_cast<double>(X.rows());
  double ratio = 1.0;
  Eigen::VectorXd corr = X.transpose() * r / n;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double c = std::abs(corr[j]);
    if (c > 0.0) ratio = std::min(ratio, lambda * pen[j] / c);
  }
  const Eigen::VectorXd theta = (ratio / n) * r;
  return y.squaredNorm() / (2.0 * n) - (n / 2.0) * (theta - y / n).squaredNorm();
}

// Smallest positive root of sum_i q_i^2 / (h_i*nu + c)^2 = 1 via Newton.
// Exists iff ||q|| > c; the left side is convex and decreasing in nu.
double block_norm_newton(const Eigen::VectorXd& q, const Eigen::VectorXd& h, double c) {
  const double qn = q.norm();
  const double h_max = h.maxCoeff();
  if (h_max <= 0.0) return 0.0;
  double nu = (qn - c) / h_max;
  for (int it = 0; it < 100; ++it) {
    double f = -1.0, df = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      const double d = h[i] * nu + c;
      const double t = q[i] * q[i] / (d * d);
      f += t;
      df -= 2.0 * t * h[i] / d;
    }
    const double step = f / df;
    nu -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, nu)) break;
  }
  return std::max(nu, 0.0);
}

}  // namespace

WeightedDesign build_weighted_design(const StackedLibrary& stacked,
                                     const AdaptiveWeights& weights) {
  const int q = stacked.q();
  const int p = stacked.p();
  if (weights.w_hat.rows() != q || weights.w_hat.cols() != p)
    throw std::invalid_argument("adaptive weight shape mismatch");
  WeightedDesign d;
  d.X.reserve(q);
  for (int i = 0; i < q; ++i) {
    NormalizedLibrary norm = normalize_columns(stacked.experiments[i]);
    std::vector<char> dead(p, 0);
    for (int j : norm.zero_columns) dead[j] = 1;
    Eigen::MatrixXd X = norm.lib.theta;
    Eigen::VectorXd unscale = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < p; ++j) {
      const double w = weights.w_hat(i, j);
      if (dead[j] || !(w > 0.0) || !std::isfinite(w)) {
        X.col(j).setZero();
      } else {
        X.col(j) /= w;
        unscale[j] = 1.0 / (norm.scales[j] * w);
      }
    }
    d.X.push_back(std::move(X));
    d.y.push_back(stacked.experiments[i].dudt);
    d.unscale.push_back(std::move(unscale));
  }
  return d;
}

namespace {

Eigen::VectorXd group_penalties(const AdaptiveWeights& weights, int p) {
  if (weights.w_random.rows() < 1 || weights.w_random.cols() != p)
    throw std::invalid_argument("randomisation weight shape mismatch");
  Eigen::VectorXd pen(p);
  for (int j = 0; j < p; ++j) pen[j] = 1.0 / weights.w_random(0, j);
  return pen;
}

}  // namespace

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double alpha) {
  if (theta.rows() != y.size()) throw std::invalid_argument("ridge: row count mismatch");
  if (alpha < 0.0) throw std::invalid_argument("ridge: alpha must be nonnegative");
  const double n = static_cast<double>(theta.rows());
  Eigen::MatrixXd gram = theta.transpose() * theta;
  gram.diagonal().array() += n * alpha;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-14 * d.maxCoeff())
    throw std::runtime_error("ridge: singular system; increase alpha or drop collinear columns");
  Eigen::VectorXd xi = ldlt.solve(theta.transpose() * y);
  if (!xi.allFinite())
    throw std::runtime_error("ridge: singular system; increase alpha or drop collinear columns");
  return xi;
}

Eigen::MatrixXd sample_randomisation(int p, int q, RandomisationMode mode, std::uint64_t seed) {
  if (p < 1 || q < 1) throw std::invalid_argument("sample_randomisation: p and q must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd w(q, p);
  if (mode == RandomisationMode::per_group) {
    for (int j = 0; j < p; ++j) w.col(j).setConstant(rng.beta12());
  } else {
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < p; ++j) w(i, j) = rng.beta12();
  }
  return w;
}

AdaptiveWeights compute_adaptive_weights(const StackedLibrary& stacked,
                                         const SolverOptions& opts) {
  const int q = stacked.q();
  const int p = stacked.p();
  AdaptiveWeights out;
  out.gamma = opts.gamma;
  out.w_hat.resize(q, p);
  out.w_random = Eigen::MatrixXd::Ones(q, p);
  if (opts.pooled_pilot && q > 1) {
    // one shared coefficient vector across experiments: the grouped prior.
    // A term that any experiment rules out gets a heavy weight everywhere.
    Eigen::Index rows = 0;
    for (int i = 0; i < q; ++i) rows += stacked.experiments[i].n();
    Eigen::MatrixXd a(rows, p);
    Eigen::VectorXd y(rows);
    Eigen::Index r = 0;
    for (int i = 0; i < q; ++i) {
      const TermLibrary& lib = stacked.experiments[i];
      const double rw = 1.0 / std::sqrt(static_cast<double>(lib.n()));
      a.middleRows(r, lib.n()) = rw * lib.theta;
      y.segment(r, lib.n()) = rw * lib.dudt;
      r += lib.n();
    }
    Eigen::VectorXd scales(p);
    std::vector<char> dead(p, 0);
    for (int j = 0; j < p; ++j) {
      const double s = a.col(j).norm();
      dead[j] = s < 1e-300;
      scales[j] = dead[j] ? 1.0 : s;
      a.col(j) /= scales[j];
    }
    const Eigen::VectorXd pilot = ridge_fit(a, y, opts.pilot_ridge_alpha);
    for (int j = 0; j < p; ++j) {
      const double mag = std::abs(pilot[j]) / scales[j];
      const double w = (mag < 1e-10 || dead[j])
                           ? opts.pilot_cap
                           : std::min(std::pow(mag, -opts.gamma), opts.pilot_cap);
      for (int i = 0; i < q; ++i) out.w_hat(i, j) = w;
    }
    return out;
  }
  for (int i = 0; i < q; ++i) {
    NormalizedLibrary norm = normalize_columns(stacked.experiments[i]);
    std::vector<char> dead(p, 0);
    for (int j : norm.zero_columns) dead[j] = 1;
    Eigen::VectorXd pilot =
        ridge_fit(norm.lib.theta, stacked.experiments[i].dudt, opts.pilot_ridge_alpha);
    for (int j = 0; j < p; ++j) {
      // pilot magnitude on the normalized column scale, matching the solver's design
      const double a = std::abs(pilot[j]);
      out.w_hat(i, j) = (a < 1e-10 || dead[j])
                            ? opts.pilot_cap
                            : std::min(std::pow(a, -opts.gamma), opts.pilot_cap);
    }
  }
  return out;
}

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         const Eigen::VectorXd& pen, Eigen::VectorXd b, const SolverOptions& opts,
                         double* gap_out, int* sweeps_out) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw std::invalid_argument("lasso_cd: row count mismatch");
  if (b.size() != p) throw std::invalid_argument("lasso_cd: warm start length mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("lasso_cd: lambda must be positive");
  check_penalties(pen, p);

  const double nd = static_cast<double>(n);
  Eigen::VectorXd h(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    h[j] = X.col(j).squaredNorm() / nd;
    if (h[j] == 0.0) b[j] = 0.0;
  }
  Eigen::VectorXd r = y - X * b;
  const double gap_scale = std::max(y.squaredNorm() / (2.0 * nd), 1e-300);

  double gap = 0.0;
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (h[j] == 0.0) continue;
      const double old = b[j];
      const double z = X.col(j).dot(r) / nd + h[j] * old;
      const double bj = soft_threshold(z, lambda * pen[j]) / h[j];
      if (bj != old) {
        r += X.col(j) * (old - bj);
        b[j] = bj;
      }
    }
    double primal = r.squaredNorm() / (2.0 * nd);
    for (Eigen::Index j = 0; j < p; ++j) primal += lambda * pen[j] * std::abs(b[j]);
    gap = primal - lasso_dual_value(X, y, r, lambda, pen);
    if (gap <= opts.tol * gap_scale) {
      ++sweep;
      break;
    }
  }
  if (gap_out) *gap_out = gap;
  if (sweeps_out) *sweeps_out = sweep;
  return b;
}

Eigen::MatrixXd group_lasso_bcd(const std::vector<Eigen::MatrixXd>& X,
                                const std::vector<Eigen::VectorXd>& y, double lambda,
                                const Eigen::VectorXd& pen, Eigen::MatrixXd b,
                                const SolverOptions& opts, double* gap_out, int* sweeps_out) {
  const int q = static_cast<int>(X.size());
  if (q < 1 || static_cast<int>(y.size()) != q)
    throw std::invalid_argument("group_lasso_bcd: experiment count mismatch");
  const Eigen::Index p = X[0].cols();
  if (b.rows() != q || b.cols() != p)
    throw std::invalid_argument("group_lasso_bcd: warm start shape mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("group_lasso_bcd: lambda must be positive");
  check_penalties(pen, p);

  std::vector<double> n(q);
  Eigen::MatrixXd h(q, p);
  std::vector<Eigen::VectorXd> r(q);
  double gap_scale = 0.0;
  for (int i = 0; i < q; ++i) {
    if (X[i].cols() != p) throw std::invalid_argument("group_lasso_bcd: column count mismatch");
    if (y[i].size() != X[i].rows())
      throw std::invalid_argument("group_lasso_bcd: row count mismatch");
    n[i] = static_cast<double>(X[i].rows());
    for (Eigen::Index j = 0; j < p; ++j) {
      h(i, j) = X[i].col(j).squaredNorm() / n[i];
      if (h(i, j) == 0.0) b(i, j) = 0.0;
    }
    r[i] = y[i] - X[i] * b.row(i).transpose();
    gap_scale += y[i].squaredNorm() / (2.0 * n[i]);
  }
  gap_scale = std::max(gap_scale, 1e-300);

  Eigen::VectorXd qvec(q), hvec(q);
  double gap = 0.0;
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < p; ++j) {
      for (int i = 0; i < q; ++i) qvec[i] = X[i].col(j).dot(r[i]) / n[i] + h(i, j) * b(i, j);
      const double c = lambda * pen[j];
      if (qvec.norm() <= c || h.col(j).maxCoeff() == 0.0) {
        for (int i = 0; i < q; ++i) {
          if (b(i, j) != 0.0) {
            r[i] += X[i].col(j) * b(i, j);
            b(i, j) = 0.0;
          }
        }
        continue;
      }
      hvec = h.col(j);
      const double nu = block_norm_newton(qvec, hvec, c);
      for (int i = 0; i < q; ++i) {
        const double bij = (h(i, j) > 0.0) ? qvec[i] * nu / (h(i, j) * nu + c) : 0.0;
        if (bij != b(i, j)) {
          r[i] += X[i].col(j) * (b(i, j) - bij);
          b(i, j) = bij;
        }
      }
    }

    // duality gap: scale the correlation block norms into the dual ball
    double primal = 0.0;
    for (int i = 0; i < q; ++i) primal += r[i].squaredNorm() / (2.0 * n[i]);
    for (Eigen::Index j = 0; j < p; ++j) primal += lambda * pen[j] * b.col(j).norm();
    double ratio = 1.0;
    Eigen::MatrixXd corr(q, p);
    for (int i = 0; i < q; ++i) corr.row(i) = (X[i].transpose() * r[i] / n[i]).transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double cn = corr.col(j).norm();
      if (cn > 0.0) ratio = std::min(ratio, lambda * pen[j] / cn);
    }
    double dual = 0.0;
    for (int i = 0; i < q; ++i) {
      const Eigen::VectorXd theta = (ratio / n[i]) * r[i];
      dual += y[i].squaredNorm() / (2.0 * n[i]) - (n[i] / 2.0) * (theta - y[i] / n[i]).squaredNorm();
    }
    gap = primal - dual;
    if (gap <= opts.tol * gap_scale) {
      ++sweep;
      break;
    }
  }
  if (gap_out) *gap_out = gap;
  if (sweeps_out) *sweeps_out = sweep;
  return b;
}

double lasso_kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                          const Eigen::VectorXd& pen, const Eigen::VectorXd& b) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd corr = X.transpose() * (y - X * b) / n;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double t = lambda * pen[j];
    const double v = (b[j] != 0.0) ? std::abs(corr[j] - t * (b[j] > 0 ? 1.0 : -1.0))
                                   : std::max(0.0, std::abs(corr[j]) - t);
    worst = std::max(worst, v);
  }
  return worst;
}

double group_kkt_residual(const std::vector<Eigen::MatrixXd>& X,
                          const std::vector<Eigen::VectorXd>& y, double lambda,
                          const Eigen::VectorXd& pen, const Eigen::MatrixXd& b) {
  const int q = static_cast<int>(X.size());
  const Eigen::Index p = b.cols();
  Eigen::MatrixXd corr(q, p);
  for (int i = 0; i < q; ++i) {
    const Eigen::VectorXd r = y[i] - X[i] * b.row(i).transpose();
    corr.row(i) = (X[i].transpose() * r / static_cast<double>(X[i].rows())).transpose();
  }
  double worst = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double t = lambda * pen[j];
    const double bn = b.col(j).norm();
    const double v = (bn > 0.0) ? (corr.col(j) - t * b.col(j) / bn).norm()
                                : std::max(0.0, corr.col(j).norm() - t);
    worst = std::max(worst, v);
  }
  return worst;
}

FitResult adaptive_lasso_fit(const TermLibrary& lib, double lambda, const AdaptiveWeights& weights,
                             const SolverOptions& opts) {
  StackedLibrary stacked;
  stacked.experiments = {lib};
  stacked.labels = lib.labels;
  AdaptiveWeights w1 = weights;
  w1.w_hat = weights.w_hat.row(0);
  w1.w_random = weights.w_random.row(0);
  WeightedDesign d = build_weighted_design(stacked, w1);
  Eigen::VectorXd pen = group_penalties(w1, stacked.p());

  FitResult res;
  res.lambda = lambda;
  Eigen::VectorXd b = lasso_cd(d.X[0], d.y[0], lambda, pen, Eigen::VectorXd::Zero(stacked.p()),
                               opts, &res.duality_gap, &res.sweeps);
  res.kkt_residual = lasso_kkt_residual(d.X[0], d.y[0], lambda, pen, b);
  // the duality-gap stop does not bound the KKT residual on badly scaled
  // designs; tighten the gap until the certificate holds
  for (SolverOptions tight = opts;
       res.kkt_residual > opts.kkt_tol && tight.tol > 1e-18;) {
    tight.tol *= 1e-4;
    b = lasso_cd(d.X[0], d.y[0], lambda, pen, std::move(b), tight, &res.duality_gap,
                 &res.sweeps);
    res.kkt_residual = lasso_kkt_residual(d.X[0], d.y[0], lambda, pen, b);
  }
  if (res.kkt_residual > opts.kkt_tol)
    throw std::runtime_error("adaptive_lasso_fit: solver did not reach KKT tolerance");
  res.xi = (b.array() * d.unscale[0].array()).matrix().transpose();
  for (int j = 0; j < stacked.p(); ++j)
    if (res.xi(0, j) != 0.0) res.support.push_back(lib.labels[j]);
  return res;
}

FitResult group_lasso_fit(const StackedLibrary& stacked, double lambda,
                          const AdaptiveWeights& weights, const SolverOptions& opts) {
  WeightedDesign d = build_weighted_design(stacked, weights);
  Eigen::VectorXd pen = group_penalties(weights, stacked.p());

  FitResult res;
  res.lambda = lambda;
  Eigen::MatrixXd b =
      group_lasso_bcd(d.X, d.y, lambda, pen, Eigen::MatrixXd::Zero(stacked.q(), stacked.p()),
                      opts, &res.duality_gap, &res.sweeps);
  res.kkt_residual = group_kkt_residual(d.X, d.y, lambda, pen, b);
  if (res.kkt_residual > opts.kkt_tol)
    throw std::runtime_error("group_lasso_fit: solver did not reach KKT tolerance");
  res.xi.resize(stacked.q(), stacked.p());
  for (int i = 0; i < stacked.q(); ++i)
    res.xi.row(i) = (b.row(i).array() * d.unscale[i].transpose().array()).matrix();
  for (int j = 0; j < stacked.p(); ++j)
    if (res.xi.col(j).norm() != 0.0) res.support.push_back(stacked.labels[j]);
  return res;
}

double lambda_max(const TermLibrary& lib, const AdaptiveWeights& weights,
                  const SolverOptions& opts) {
  StackedLibrary stacked;
  stacked.experiments = {lib};
  stacked.labels = lib.labels;
  AdaptiveWeights w1 = weights;
  w1.w_hat = weights.w_hat.row(0);
  w1.w_random = weights.w_random.row(0);
  return lambda_max(stacked, w1, opts);
}

double lambda_max(const StackedLibrary& stacked, const AdaptiveWeights& weights,
                  const SolverOptions& opts) {
  (void)opts;
  WeightedDesign d = build_weighted_design(stacked, weights);
  Eigen::VectorXd pen = group_penalties(weights, stacked.p());
  double lmax = 0.0;
  for (int j = 0; j < stacked.p(); ++j) {
    double norm_sq = 0.0;
    for (int i = 0; i < stacked.q(); ++i) {
      const double c = d.X[i].col(j).dot(d.y[i]) / static_cast<double>(d.X[i].rows());
      norm_sq += c * c;
    }
    lmax = std::max(lmax, std::sqrt(norm_sq) / pen[j]);
  }
  return lmax;
}

Eigen::VectorXd lambda_path(double lambda_max, double epsilon, int m) {
  if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_path: lambda_max must be positive");
  if (!(epsilon > 0.0) || epsilon >= 1.0)
    throw std::invalid_argument("lambda_path: epsilon must be in (0, 1)");
  if (m < 2) throw std::invalid_argument("lambda_path: need at least two grid points");
  Eigen::VectorXd path(m);
  const double log_top = std::log(lambda_max);
  const double log_bot = std::log(epsilon * lambda_max);
  for (int k = 0; k < m; ++k)
    path[k] = std::exp(log_top + (log_bot - log_top) * k / static_cast<double>(m - 1));
  return path;
}

}  // namespace multipde
