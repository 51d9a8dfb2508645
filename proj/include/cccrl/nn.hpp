#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "cccrl/rng.hpp"

namespace cccrl {

enum class Activation { kRelu, kTanh, kLinear };

/// Plain fully connected network. Layer i maps layer_sizes[i] ->
/// layer_sizes[i+1] through an affine map followed by activations[i].
/// All weights and biases live in one flat parameter vector: per layer,
/// the (in x out) weight matrix in column-major order, then the bias.
/// Inputs are batch-major (one sample per row).
struct FeedForwardNet {
  std::vector<Eigen::Index> layer_sizes;
  std::vector<Activation> activations;
  Eigen::VectorXd params;
};

/// Cached pre- and post-activation values of one forward pass; lets the
/// backward pass skip recomputing the forward sweep.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // Z per layer
  std::vector<Eigen::MatrixXd> post;  // input followed by A per layer
};

Eigen::Index net_param_count(const std::vector<Eigen::Index>& layer_sizes);

FeedForwardNet make_net(std::vector<Eigen::Index> layer_sizes,
                        std::vector<Activation> activations);

/// Hidden layers get fan-in scaled Gaussian weights, the output layer a
/// small uniform band; biases start at zero.
void init_net_params(FeedForwardNet& net, Rng& rng,
                     double output_scale = 3e-3);

/// Every weight and bias drawn from N(0, sd^2).
void init_net_params_gaussian(FeedForwardNet& net, Rng& rng, double sd);

Eigen::MatrixXd net_forward(const FeedForwardNet& net,
                            const Eigen::MatrixXd& input);

Eigen::MatrixXd net_forward(const FeedForwardNet& net,
                            const Eigen::MatrixXd& input, ForwardCache& cache);

struct BackwardResult {
  Eigen::VectorXd param_grad;
  Eigen::MatrixXd input_grad;
};

/// Reverse-mode sweep for dL/dparams and dL/dinput given dL/doutput.
BackwardResult net_backward(const FeedForwardNet& net,
                            const Eigen::MatrixXd& input,
                            const Eigen::MatrixXd& output_grad);

BackwardResult net_backward(const FeedForwardNet& net,
                            const ForwardCache& cache,
                            const Eigen::MatrixXd& output_grad);

/// dL/dinput only; skips accumulating weight gradients.
Eigen::MatrixXd net_backward_input(const FeedForwardNet& net,
                                   const ForwardCache& cache,
                                   const Eigen::MatrixXd& output_grad);

}  // namespace cccrl
