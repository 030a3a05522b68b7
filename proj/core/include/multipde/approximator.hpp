#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace multipde {

// Fully-connected sine-activation network û(x, t) with exact input
// derivatives up to fifth order in x and first order in t, propagated as
// truncated Taylor series, plus reverse-mode parameter gradients for
// training.

struct NetworkConfig {
  int depth = 4;   // number of linear layers (all but the last are followed by sine)
  int width = 65;  // neurons per hidden layer
  int input_dim = 2;
  int output_dim = 1;
  double omega0 = 30.0;  // frequency scale applied to the first layer pre-activation
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

std::size_t parameter_count(const NetworkConfig& config);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct NetworkParams {
  std::vector<DenseLayer> layers;
  double omega0 = 30.0;

  std::size_t size() const;
  void set_zero();
};

// Deterministic sine-network initialization: first layer uniform in
// [-1/fan_in, 1/fan_in], later layers uniform in
// [-sqrt(6/fan_in)/omega0, sqrt(6/fan_in)/omega0].
NetworkParams init_network(const NetworkConfig& config);

// Affine map from physical coordinates to the network's normalized inputs:
// normalized = (physical - shift) * scale.
struct InputScaling {
  double x_shift = 0.0, x_scale = 1.0;
  double t_shift = 0.0, t_scale = 1.0;

  // maps [x0,x1] x [t0,t1] onto [-1,1]^2
  static InputScaling from_ranges(double x0, double x1, double t0, double t1);
};

// û and its input derivatives (physical units) at n query points.
struct DerivativeBundle {
  Eigen::VectorXd value;                // û
  Eigen::VectorXd dt;                   // ∂û/∂t
  std::vector<Eigen::VectorXd> dx;      // dx[k-1] = ∂^k û/∂x^k, k = 1..max_order
  int max_order() const { return static_cast<int>(dx.size()); }
};

// points: n x 2 matrix of (x, t) in physical coordinates.
Eigen::VectorXd forward(const NetworkParams& params, const Eigen::MatrixXd& points,
                        const InputScaling& scaling = InputScaling{});

// Exact derivatives of the network function, 1 <= max_order <= 5.
DerivativeBundle input_derivatives(const NetworkParams& params, const Eigen::MatrixXd& points,
                                   int max_order, const InputScaling& scaling = InputScaling{});

// ---- training support -----------------------------------------------------

// Batched truncated Taylor series: x[k] holds the k-th Taylor coefficient
// (n x width) of every neuron along the x direction, t the first-order
// t-coefficient. x[0] is the value.
struct JetBatch {
  std::vector<Eigen::MatrixXd> x;
  Eigen::MatrixXd t;
};

// Saved intermediates of one jet forward pass, consumed by backward().
struct ForwardTape {
  int max_order = 0;
  std::vector<JetBatch> activations;                 // input of each layer; back() = output
  std::vector<JetBatch> pre;                         // pre-activation of each sine layer
  std::vector<std::vector<Eigen::MatrixXd>> sin_s;   // sine Taylor series per sine layer
  std::vector<std::vector<Eigen::MatrixXd>> cos_s;   // cosine Taylor series per sine layer
};

// Forward pass recording a tape; returns the bundle in physical units.
DerivativeBundle forward_train(const NetworkParams& params, const Eigen::MatrixXd& points,
                               int max_order, const InputScaling& scaling, ForwardTape& tape);

using ParamGrads = NetworkParams;

// Reverse pass: adjoint holds dL/d(bundle entries) in physical units;
// returns dL/d(params).
ParamGrads backward(const NetworkParams& params, const ForwardTape& tape,
                    const DerivativeBundle& adjoint);

// ---- Adam -----------------------------------------------------------------

struct AdamState {
  std::vector<DenseLayer> m, v;
  long step = 0;

  static AdamState zeros_like(const NetworkParams& params);
};

void adam_step(NetworkParams& params, const ParamGrads& grads, AdamState& state, double lr,
               std::pair<double, double> betas, double eps = 1e-8);

}  // namespace multipde
