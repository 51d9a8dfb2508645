#include "cccrl/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace cccrl {

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      // scalar tanh keeps results independent of each entry's position in
      // the SIMD packet layout, so row permutations commute bit-exactly
      z = z.unaryExpr([](double v) { return std::tanh(v); });
      break;
    case Activation::kLinear:
      break;
  }
}

// derivative of the activation given pre-activation z
Eigen::MatrixXd activation_grad(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return z.unaryExpr([](double v) {
        const double t = std::tanh(v);
        return 1.0 - t * t;
      });
    case Activation::kLinear:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  return {};
}

void check_net(const FeedForwardNet& net) {
  if (net.layer_sizes.size() < 2) {
    throw std::invalid_argument("net needs at least one layer");
  }
  if (net.activations.size() + 1 != net.layer_sizes.size()) {
    throw std::invalid_argument("one activation tag per layer required");
  }
  if (net.params.size() != net_param_count(net.layer_sizes)) {
    throw std::invalid_argument("param vector length does not match layers");
  }
}

}  // namespace

Eigen::Index net_param_count(const std::vector<Eigen::Index>& layer_sizes) {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    n += (layer_sizes[i] + 1) * layer_sizes[i + 1];
  }
  return n;
}

FeedForwardNet make_net(std::vector<Eigen::Index> layer_sizes,
                        std::vector<Activation> activations) {
  FeedForwardNet net{std::move(layer_sizes), std::move(activations), {}};
  if (net.activations.size() + 1 != net.layer_sizes.size()) {
    throw std::invalid_argument("one activation tag per layer required");
  }
  net.params = Eigen::VectorXd::Zero(net_param_count(net.layer_sizes));
  return net;
}

void init_net_params(FeedForwardNet& net, Rng& rng, double output_scale) {
  check_net(net);
  Eigen::Index off = 0;
  const std::size_t layers = net.activations.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Index in = net.layer_sizes[l];
    const Eigen::Index out = net.layer_sizes[l + 1];
    const bool last = (l + 1 == layers);
    const double sd = std::sqrt(2.0 / static_cast<double>(in));
    for (Eigen::Index k = 0; k < in * out; ++k) {
      net.params[off + k] =
          last ? rng.uniform(-output_scale, output_scale) : rng.normal(0.0, sd);
    }
    off += in * out;
    net.params.segment(off, out).setZero();
    off += out;
  }
}

void init_net_params_gaussian(FeedForwardNet& net, Rng& rng, double sd) {
  check_net(net);
  for (Eigen::Index k = 0; k < net.params.size(); ++k) {
    net.params[k] = rng.normal(0.0, sd);
  }
}

Eigen::MatrixXd net_forward(const FeedForwardNet& net,
                            const Eigen::MatrixXd& input) {
  ForwardCache cache;
  return net_forward(net, input, cache);
}

Eigen::MatrixXd net_forward(const FeedForwardNet& net,
                            const Eigen::MatrixXd& input,
                            ForwardCache& cache) {
  check_net(net);
  if (input.cols() != net.layer_sizes.front()) {
    throw std::invalid_argument("input width does not match first layer");
  }
  const std::size_t layers = net.activations.size();
  cache.pre.resize(layers);
  cache.post.resize(layers + 1);
  cache.post[0] = input;
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Index in = net.layer_sizes[l];
    const Eigen::Index out = net.layer_sizes[l + 1];
    Eigen::Map<const Eigen::MatrixXd> w(net.params.data() + off, in, out);
    Eigen::Map<const Eigen::VectorXd> b(net.params.data() + off + in * out,
                                        out);
    cache.pre[l].noalias() = cache.post[l] * w;
    cache.pre[l].rowwise() += b.transpose();
    cache.post[l + 1] = cache.pre[l];
    apply_activation(net.activations[l], cache.post[l + 1]);
    off += (in + 1) * out;
  }
  return cache.post.back();
}

BackwardResult net_backward(const FeedForwardNet& net,
                            const Eigen::MatrixXd& input,
                            const Eigen::MatrixXd& output_grad) {
  ForwardCache cache;
  net_forward(net, input, cache);
  return net_backward(net, cache, output_grad);
}

BackwardResult net_backward(const FeedForwardNet& net,
                            const ForwardCache& cache,
                            const Eigen::MatrixXd& output_grad) {
  check_net(net);
  if (output_grad.rows() != cache.post.back().rows() ||
      output_grad.cols() != cache.post.back().cols()) {
    throw std::invalid_argument("output_grad shape mismatch");
  }
  BackwardResult res;
  res.param_grad = Eigen::VectorXd::Zero(net.params.size());
  const std::size_t layers = net.activations.size();

  // offsets of each layer's parameter block
  std::vector<Eigen::Index> offsets(layers);
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += (net.layer_sizes[l] + 1) * net.layer_sizes[l + 1];
  }

  Eigen::MatrixXd delta = output_grad;
  for (std::size_t li = layers; li-- > 0;) {
    const Eigen::Index in = net.layer_sizes[li];
    const Eigen::Index out = net.layer_sizes[li + 1];
    delta = delta.cwiseProduct(activation_grad(net.activations[li],
                                               cache.pre[li]));
    Eigen::Map<Eigen::MatrixXd> dw(res.param_grad.data() + offsets[li], in,
                                   out);
    Eigen::Map<Eigen::VectorXd> db(
        res.param_grad.data() + offsets[li] + in * out, out);
    dw.noalias() = cache.post[li].transpose() * delta;
    db = delta.colwise().sum();
    Eigen::Map<const Eigen::MatrixXd> w(net.params.data() + offsets[li], in,
                                        out);
    if (li > 0) {
      delta = (delta * w.transpose()).eval();
    } else {
      res.input_grad.noalias() = delta * w.transpose();
    }
  }
  return res;
}

Eigen::MatrixXd net_backward_input(const FeedForwardNet& net,
                                   const ForwardCache& cache,
                                   const Eigen::MatrixXd& output_grad) {
  check_net(net);
  const std::size_t layers = net.activations.size();
  std::vector<Eigen::Index> offsets(layers);
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += (net.layer_sizes[l] + 1) * net.layer_sizes[l + 1];
  }
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t li = layers; li-- > 0;) {
    const Eigen::Index in = net.layer_sizes[li];
    const Eigen::Index out = net.layer_sizes[li + 1];
    delta = delta.cwiseProduct(activation_grad(net.activations[li],
                                               cache.pre[li]));
    Eigen::Map<const Eigen::MatrixXd> w(net.params.data() + offsets[li], in,
                                        out);
    delta = (delta * w.transpose()).eval();
  }
  return delta;
}

}  // namespace cccrl
