#include "multipde/approximator.hpp"

#include <cmath>
#include <stdexcept>

#include "multipde/rng.hpp"

namespace multipde {

namespace {

std::vector<int> layer_dims(const NetworkConfig& c) {
  std::vector<int> dims;
  dims.push_back(c.input_dim);
  for (int l = 0; l < c.depth - 1; ++l) dims.push_back(c.width);
  dims.push_back(c.output_dim);
  return dims;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Taylor series of sin(a(s)) and cos(a(s)) up to order K, given the series
// of a. Recurrences follow from s' = c a', c' = -s a'.
void sine_series(const JetBatch& a, int K, std::vector<Eigen::MatrixXd>& s,
                 std::vector<Eigen::MatrixXd>& c) {
  s.resize(K + 1);
  c.resize(K + 1);
  s[0] = a.x[0].array().sin();
  c[0] = a.x[0].array().cos();
  for (int k = 1; k <= K; ++k) {
    Eigen::MatrixXd sk = Eigen::MatrixXd::Zero(a.x[0].rows(), a.x[0].cols());
    Eigen::MatrixXd ck = Eigen::MatrixXd::Zero(a.x[0].rows(), a.x[0].cols());
    for (int m = 1; m <= k; ++m) {
      sk.array() += (static_cast<double>(m) / k) * a.x[m].array() * c[k - m].array();
      ck.array() -= (static_cast<double>(m) / k) * a.x[m].array() * s[k - m].array();
    }
    s[k] = std::move(sk);
    c[k] = std::move(ck);
  }
}

JetBatch sine_apply(const JetBatch& a, int K, std::vector<Eigen::MatrixXd>& s,
                    std::vector<Eigen::MatrixXd>& c) {
  sine_series(a, K, s, c);
  JetBatch out;
  out.x.assign(s.begin(), s.end());
  out.t = c[0].array() * a.t.array();
  return out;
}

// Adjoint of sine_apply: given dL/d(out) accumulate dL/d(a).
JetBatch sine_backward(const JetBatch& a, const std::vector<Eigen::MatrixXd>& s,
                       const std::vector<Eigen::MatrixXd>& c, int K, const JetBatch& gout) {
  const Eigen::Index n = a.x[0].rows(), w = a.x[0].cols();
  JetBatch ga;
  ga.x.assign(K + 1, Eigen::MatrixXd::Zero(n, w));
  std::vector<Eigen::MatrixXd> gs(K + 1), gc(K + 1);
  for (int k = 0; k <= K; ++k) {
    gs[k] = gout.x[k];
    gc[k] = Eigen::MatrixXd::Zero(n, w);
  }
  // out.t = c0 * a.t
  ga.t = c[0].array() * gout.t.array();
  gc[0].array() += a.t.array() * gout.t.array();
  // reverse the order-k recurrences; k descending so that adjoints of lower
  // coefficients are complete before they are consumed
  for (int k = K; k >= 1; --k) {
    for (int m = 1; m <= k; ++m) {
      const double f = static_cast<double>(m) / k;
      ga.x[m].array() += f * c[k - m].array() * gs[k].array();
      gc[k - m].array() += f * a.x[m].array() * gs[k].array();
      ga.x[m].array() -= f * s[k - m].array() * gc[k].array();
      gs[k - m].array() -= f * a.x[m].array() * gc[k].array();
    }
  }
  ga.x[0].array() += c[0].array() * gs[0].array() - s[0].array() * gc[0].array();
  return ga;
}

JetBatch linear_apply(const DenseLayer& layer, const JetBatch& a, int K, double scale) {
  JetBatch out;
  out.x.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    out.x[k].noalias() = a.x[k] * layer.weight.transpose();
    if (k == 0) out.x[k].rowwise() += layer.bias.transpose();
    if (scale != 1.0) out.x[k] *= scale;
  }
  out.t.noalias() = a.t * layer.weight.transpose();
  if (scale != 1.0) out.t *= scale;
  return out;
}

JetBatch input_jet(const Eigen::MatrixXd& points, int K, const InputScaling& sc) {
  const Eigen::Index n = points.rows();
  JetBatch jet;
  jet.x.assign(K + 1, Eigen::MatrixXd::Zero(n, 2));
  jet.x[0].col(0) = (points.col(0).array() - sc.x_shift) * sc.x_scale;
  jet.x[0].col(1) = (points.col(1).array() - sc.t_shift) * sc.t_scale;
  if (K >= 1) jet.x[1].col(0).setConstant(sc.x_scale);
  jet.t = Eigen::MatrixXd::Zero(n, 2);
  jet.t.col(1).setConstant(sc.t_scale);
  return jet;
}

DerivativeBundle jet_to_bundle(const JetBatch& out, int K) {
  DerivativeBundle b;
  b.value = out.x[0].col(0);
  b.dt = out.t.col(0);
  b.dx.resize(K);
  for (int k = 1; k <= K; ++k) b.dx[k - 1] = factorial(k) * out.x[k].col(0);
  return b;
}

JetBatch forward_jets(const NetworkParams& params, const Eigen::MatrixXd& points, int K,
                      const InputScaling& sc, ForwardTape* tape) {
  if (points.cols() != 2) throw std::invalid_argument("points must be n x 2 (x, t)");
  if (!points.allFinite()) throw std::domain_error("non-finite input coordinates");
  const int depth = static_cast<int>(params.layers.size());
  JetBatch a = input_jet(points, K, sc);
  if (tape) {
    tape->max_order = K;
    tape->activations.clear();
    tape->pre.clear();
    tape->sin_s.clear();
    tape->cos_s.clear();
  }
  for (int l = 0; l < depth; ++l) {
    if (tape) tape->activations.push_back(a);
    const double scale = (l == 0) ? params.omega0 : 1.0;
    JetBatch z = linear_apply(params.layers[l], a, K, scale);
    if (l < depth - 1) {
      std::vector<Eigen::MatrixXd> s, c;
      JetBatch act = sine_apply(z, K, s, c);
      if (tape) {
        tape->pre.push_back(std::move(z));
        tape->sin_s.push_back(std::move(s));
        tape->cos_s.push_back(std::move(c));
      }
      a = std::move(act);
    } else {
      a = std::move(z);
    }
  }
  if (tape) tape->activations.push_back(a);
  return a;
}

}  // namespace

void NetworkConfig::validate() const {
  if (depth < 2) throw std::invalid_argument("NetworkConfig: depth must be >= 2");
  if (width < 1) throw std::invalid_argument("NetworkConfig: width must be >= 1");
  if (input_dim != 2) throw std::invalid_argument("NetworkConfig: input_dim must be 2 (x, t)");
  if (output_dim < 1) throw std::invalid_argument("NetworkConfig: output_dim must be >= 1");
}

std::size_t parameter_count(const NetworkConfig& config) {
  config.validate();
  const auto dims = layer_dims(config);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    total += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  return total;
}

std::size_t NetworkParams::size() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += static_cast<std::size_t>(l.weight.size()) + l.bias.size();
  return total;
}

void NetworkParams::set_zero() {
  for (auto& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

NetworkParams init_network(const NetworkConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto dims = layer_dims(config);
  NetworkParams params;
  params.omega0 = config.omega0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const double wr = (l == 0) ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / config.omega0;
    const double br = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    layer.bias.resize(fan_out);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) layer.weight(i, j) = rng.uniform(-wr, wr);
    for (int i = 0; i < fan_out; ++i) layer.bias(i) = rng.uniform(-br, br);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

InputScaling InputScaling::from_ranges(double x0, double x1, double t0, double t1) {
  InputScaling sc;
  sc.x_shift = 0.5 * (x0 + x1);
  sc.x_scale = (x1 > x0) ? 2.0 / (x1 - x0) : 1.0;
  sc.t_shift = 0.5 * (t0 + t1);
  sc.t_scale = (t1 > t0) ? 2.0 / (t1 - t0) : 1.0;
  return sc;
}

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::MatrixXd& points,
                        const InputScaling& scaling) {
  if (points.cols() != 2) throw std::invalid_argument("points must be n x 2 (x, t)");
  if (!points.allFinite()) throw std::domain_error("non-finite input coordinates");
  const int depth = static_cast<int>(params.layers.size());
  Eigen::MatrixXd a(points.rows(), 2);
  a.col(0) = (points.col(0).array() - scaling.x_shift) * scaling.x_scale;
  a.col(1) = (points.col(1).array() - scaling.t_shift) * scaling.t_scale;
  for (int l = 0; l < depth; ++l) {
    Eigen::MatrixXd z = a * params.layers[l].weight.transpose();
    z.rowwise() += params.layers[l].bias.transpose();
    if (l == 0) z *= params.omega0;
    if (l < depth - 1) z = z.array().sin();
    a = std::move(z);
  }
  return a.col(0);
}

DerivativeBundle input_derivatives(const NetworkParams& params, const Eigen::MatrixXd& points,
                                   int max_order, const InputScaling& scaling) {
  if (max_order < 1 || max_order > 5)
    throw std::invalid_argument("input_derivatives: max_order must be in [1, 5]");
  JetBatch out = forward_jets(params, points, max_order, scaling, nullptr);
  return jet_to_bundle(out, max_order);
}

DerivativeBundle forward_train(const NetworkParams& params, const Eigen::MatrixXd& points,
                               int max_order, const InputScaling& scaling, ForwardTape& tape) {
  if (max_order < 0 || max_order > 5)
    throw std::invalid_argument("forward_train: max_order must be in [0, 5]");
  JetBatch out = forward_jets(params, points, max_order, scaling, &tape);
  return jet_to_bundle(out, max_order);
}

ParamGrads backward(const NetworkParams& params, const ForwardTape& tape,
                    const DerivativeBundle& adjoint) {
  const int depth = static_cast<int>(params.layers.size());
  const int K = tape.max_order;
  const Eigen::Index n = tape.activations.front().x[0].rows();

  ParamGrads grads;
  grads.omega0 = params.omega0;
  grads.layers.resize(depth);
  for (int l = 0; l < depth; ++l) {
    grads.layers[l].weight = Eigen::MatrixXd::Zero(params.layers[l].weight.rows(),
                                                   params.layers[l].weight.cols());
    grads.layers[l].bias = Eigen::VectorXd::Zero(params.layers[l].bias.size());
  }

  // seed output-jet adjoint (Taylor coefficient k carries a factor k!)
  const int out_dim = static_cast<int>(tape.activations.back().x[0].cols());
  JetBatch g;
  g.x.assign(K + 1, Eigen::MatrixXd::Zero(n, out_dim));
  g.t = Eigen::MatrixXd::Zero(n, out_dim);
  if (adjoint.value.size() > 0) g.x[0].col(0) = adjoint.value;
  if (adjoint.dt.size() > 0) g.t.col(0) = adjoint.dt;
  for (int k = 1; k <= K && k <= adjoint.max_order(); ++k)
    if (adjoint.dx[k - 1].size() > 0) g.x[k].col(0) = factorial(k) * adjoint.dx[k - 1];

  for (int l = depth - 1; l >= 0; --l) {
    if (l < depth - 1)
      g = sine_backward(tape.pre[l], tape.sin_s[l], tape.cos_s[l], K, g);
    const double scale = (l == 0) ? params.omega0 : 1.0;
    const JetBatch& a = tape.activations[l];
    auto& gl = grads.layers[l];
    for (int k = 0; k <= K; ++k) gl.weight.noalias() += scale * g.x[k].transpose() * a.x[k];
    gl.weight.noalias() += scale * g.t.transpose() * a.t;
    gl.bias += scale * g.x[0].colwise().sum().transpose();
    if (l > 0) {
      JetBatch ga;
      ga.x.resize(K + 1);
      for (int k = 0; k <= K; ++k) ga.x[k].noalias() = scale * (g.x[k] * params.layers[l].weight);
      ga.t.noalias() = scale * (g.t * params.layers[l].weight);
      g = std::move(ga);
    }
  }
  return grads;
}

AdamState AdamState::zeros_like(const NetworkParams& params) {
  AdamState st;
  st.m.resize(params.layers.size());
  st.v.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    st.m[l].weight = Eigen::MatrixXd::Zero(params.layers[l].weight.rows(),
                                           params.layers[l].weight.cols());
    st.m[l].bias = Eigen::VectorXd::Zero(params.layers[l].bias.size());
    st.v[l] = st.m[l];
  }
  return st;
}

void adam_step(NetworkParams& params, const ParamGrads& grads, AdamState& state, double lr,
               std::pair<double, double> betas, double eps) {
  if (grads.layers.size() != params.layers.size())
    throw std::logic_error("adam_step: gradient/parameter layer count mismatch");
  const auto [b1, b2] = betas;
  state.step += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& gl = grads.layers[l];
    if (gl.weight.rows() != p.weight.rows() || gl.weight.cols() != p.weight.cols() ||
        gl.bias.size() != p.bias.size())
      throw std::logic_error("adam_step: gradient/parameter shape mismatch");
    auto& m = state.m[l];
    auto& v = state.v[l];
    m.weight = b1 * m.weight + (1.0 - b1) * gl.weight;
    m.bias = b1 * m.bias + (1.0 - b1) * gl.bias;
    v.weight.array() = b2 * v.weight.array() + (1.0 - b2) * gl.weight.array().square();
    v.bias.array() = b2 * v.bias.array() + (1.0 - b2) * gl.bias.array().square();
    p.weight.array() -= lr * (m.weight.array() / c1) / ((v.weight.array() / c2).sqrt() + eps);
    p.bias.array() -= lr * (m.bias.array() / c1) / ((v.bias.array() / c2).sqrt() + eps);
  }
}

}  // namespace multipde
