#include "cccrl/anm_mm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace cccrl {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kHsicFloor = 1e-12;
constexpr double kLogParamBox = 30.0;  // feasible box for log hyperparams

Eigen::MatrixXd concat_cause_effect(const CauseEffectDataset& ds) {
  Eigen::MatrixXd z(ds.agents(), 2 * ds.samples());
  z << ds.cause, ds.effect;
  return z;
}

Eigen::MatrixXd standardize(const AnmMmModel& model, const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = z;
  out.rowwise() -= model.input_mean;
  return out * model.input_scale.cwiseInverse().asDiagonal();
}

/// Cholesky of K with deterministic jitter escalation. Returns the jitter
/// actually applied through `jitter_out`.
Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(const Eigen::MatrixXd& k,
                                             double& jitter_out) {
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() == Eigen::Success) {
    jitter_out = 0.0;
    return llt;
  }
  for (double jitter = 1e-8; jitter <= 1e-4 * (1.0 + 1e-12); jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) {
      jitter_out = jitter;
      return llt;
    }
  }
  throw NumericalError("gp gram matrix not positive definite after jitter");
}

struct GpPieces {
  double nll = 0.0;
  Eigen::MatrixXd a;        // K^-1
  Eigen::MatrixXd alpha;    // K^-1 Y
  Eigen::MatrixXd kr;       // RBF part of K
  Eigen::MatrixXd sq_dist;  // pairwise squared distances of x_tilde rows
};

GpPieces gp_nll_pieces(const Eigen::MatrixXd& x_tilde, const Eigen::MatrixXd& y,
                       const GpHyper& hyper) {
  const Eigen::Index n = x_tilde.rows();
  const Eigen::Index d = y.cols();
  GpPieces p;
  p.sq_dist = pairwise_sq_dist(x_tilde, x_tilde);
  const double inv = -0.5 / (hyper.kernel.lengthscale * hyper.kernel.lengthscale);
  p.kr = hyper.kernel.variance * (p.sq_dist * inv).array().exp().matrix();
  Eigen::MatrixXd k = p.kr;
  k.diagonal().array() += 1.0 / hyper.noise_precision;
  double jitter = 0.0;
  const auto llt = chol_with_jitter(k, jitter);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  p.alpha = llt.solve(y);
  p.a = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const double trace_term = (y.array() * p.alpha.array()).sum();
  p.nll = 0.5 * static_cast<double>(d) *
              (static_cast<double>(n) * std::log(kTwoPi) + log_det) +
          0.5 * trace_term;
  return p;
}

/// For F = sum_ij W_ij k(x_i, x_j) with W symmetric and k an RBF with
/// lengthscale l (W already elementwise-multiplied by the kernel values),
/// dF/dX = -(2 / l^2) (diag(W 1) - W) X.
Eigen::MatrixXd rbf_input_grad(const Eigen::MatrixXd& w_times_k,
                               const Eigen::MatrixXd& x, double lengthscale) {
  const Eigen::VectorXd row_sums = w_times_k.rowwise().sum();
  Eigen::MatrixXd g = row_sums.asDiagonal() * x;
  g.noalias() -= w_times_k * x;
  return g * (-2.0 / (lengthscale * lengthscale));
}

struct ClosureContext {
  AnmMmModel model;  // mutated in-place per evaluation
  Eigen::MatrixXd z_std;
  Eigen::MatrixXd cause;
  Eigen::MatrixXd effect;
  Eigen::MatrixXd hsic_m;  // H K_x H, constant across evaluations
};

JointLoss evaluate_joint(ClosureContext& ctx) {
  const AnmMmModel& model = ctx.model;
  const Eigen::Index n = ctx.cause.rows();
  const Eigen::Index p = ctx.cause.cols();
  const Eigen::Index q = model.encoder.layer_sizes.back();

  ForwardCache cache;
  const Eigen::MatrixXd theta = net_forward(model.encoder, ctx.z_std, cache);
  Eigen::MatrixXd x_tilde(n, p + q);
  x_tilde << ctx.cause, theta;

  const GpPieces gp = gp_nll_pieces(x_tilde, ctx.effect, model.gp_hyper);
  const double dval = static_cast<double>(ctx.effect.cols());

  // dNLL/dK = (D/2) K^-1 - (1/2) K^-1 Y Y^T K^-1
  Eigen::MatrixXd g_k = 0.5 * dval * gp.a;
  g_k.noalias() -= 0.5 * (gp.alpha * gp.alpha.transpose());

  JointLoss out;
  out.loss = gp.nll;

  const Eigen::MatrixXd w_nll = g_k.cwiseProduct(gp.kr);
  const double ell = model.gp_hyper.kernel.lengthscale;
  const double d_log_var = w_nll.sum();
  const double d_log_ell =
      (w_nll.array() * gp.sq_dist.array()).sum() / (ell * ell);
  const double d_log_beta = -g_k.trace() / model.gp_hyper.noise_precision;

  Eigen::MatrixXd d_x_tilde = rbf_input_grad(w_nll, x_tilde, ell);
  Eigen::MatrixXd d_theta = d_x_tilde.rightCols(q);

  // independence term: lambda * log HSIC_b(X, Theta)
  const double s_theta = model.hsic_theta_bandwidth;
  const Eigen::MatrixXd l_theta =
      (pairwise_sq_dist(theta, theta) * (-0.5 / (s_theta * s_theta)))
          .array()
          .exp()
          .matrix();
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const double hsic = (ctx.hsic_m.array() * l_theta.array()).sum() / n2;
  out.hsic = hsic;
  if (hsic > kHsicFloor) {
    out.loss += model.lambda * std::log(hsic);
    const Eigen::MatrixXd w_hsic =
        (model.lambda / (hsic * n2)) * ctx.hsic_m.cwiseProduct(l_theta);
    d_theta += rbf_input_grad(w_hsic, theta, s_theta);
  } else {
    out.loss += model.lambda * std::log(kHsicFloor);
    out.hsic_clamped = true;
  }

  const BackwardResult enc = net_backward(model.encoder, cache, d_theta);

  out.grad.resize(enc.param_grad.size() + 3);
  out.grad.head(enc.param_grad.size()) = enc.param_grad;
  out.grad[enc.param_grad.size() + 0] = d_log_ell;
  out.grad[enc.param_grad.size() + 1] = d_log_var;
  out.grad[enc.param_grad.size() + 2] = d_log_beta;
  return out;
}

ClosureContext make_context(const AnmMmModel& model,
                            const CauseEffectDataset& ds) {
  ClosureContext ctx;
  ctx.model = model;
  ctx.cause = ds.cause;
  ctx.effect = ds.effect;
  ctx.z_std = standardize(model, concat_cause_effect(ds));
  const double sx = model.hsic_x_bandwidth;
  const Eigen::MatrixXd kx =
      (pairwise_sq_dist(ds.cause, ds.cause) * (-0.5 / (sx * sx)))
          .array()
          .exp()
          .matrix();
  const Eigen::MatrixXd h = centering_matrix(ds.agents());
  ctx.hsic_m = h * kx * h;
  return ctx;
}

}  // namespace

ThetaMatrix encode(const AnmMmModel& model, const CauseEffectDataset& ds) {
  if (ds.cause.rows() != ds.effect.rows() ||
      ds.cause.cols() != ds.effect.cols()) {
    throw std::invalid_argument("encode: cause/effect shape mismatch");
  }
  if (2 * ds.samples() != model.encoder.layer_sizes.front()) {
    throw std::invalid_argument("encode: dataset width does not match encoder");
  }
  return net_forward(model.encoder, standardize(model, concat_cause_effect(ds)));
}

double gp_neg_log_likelihood(const Eigen::MatrixXd& x_tilde,
                             const Eigen::MatrixXd& y, const GpHyper& hyper) {
  if (x_tilde.rows() != y.rows()) {
    throw std::invalid_argument("gp_neg_log_likelihood: row mismatch");
  }
  return gp_nll_pieces(x_tilde, y, hyper).nll;
}

Eigen::VectorXd anm_flatten(const AnmMmModel& model) {
  const Eigen::Index pn = model.encoder.params.size();
  Eigen::VectorXd flat(pn + 3);
  flat.head(pn) = model.encoder.params;
  flat[pn + 0] = std::log(model.gp_hyper.kernel.lengthscale);
  flat[pn + 1] = std::log(model.gp_hyper.kernel.variance);
  flat[pn + 2] = std::log(model.gp_hyper.noise_precision);
  return flat;
}

void anm_set_flat(AnmMmModel& model, const Eigen::VectorXd& flat) {
  const Eigen::Index pn = model.encoder.params.size();
  if (flat.size() != pn + 3) {
    throw std::invalid_argument("anm_set_flat: length mismatch");
  }
  model.encoder.params = flat.head(pn);
  model.gp_hyper.kernel.lengthscale = std::exp(flat[pn + 0]);
  model.gp_hyper.kernel.variance = std::exp(flat[pn + 1]);
  model.gp_hyper.noise_precision = std::exp(flat[pn + 2]);
}

JointLoss joint_loss(const AnmMmModel& model, const CauseEffectDataset& ds) {
  ClosureContext ctx = make_context(model, ds);
  return evaluate_joint(ctx);
}

LossClosure anm_loss_closure(const AnmMmModel& model_template,
                             const CauseEffectDataset& ds) {
  auto ctx = std::make_shared<ClosureContext>(make_context(model_template, ds));
  return [ctx](const Eigen::VectorXd& flat, Eigen::VectorXd& grad) -> double {
    const Eigen::Index pn = ctx->model.encoder.params.size();
    if (flat.tail(3).cwiseAbs().maxCoeff() > kLogParamBox) {
      // outside the feasible box: report an infinite trial loss so the
      // optimizer backs off
      grad = Eigen::VectorXd::Zero(flat.size());
      return std::numeric_limits<double>::infinity();
    }
    anm_set_flat(ctx->model, flat);
    JointLoss jl = evaluate_joint(*ctx);
    grad = std::move(jl.grad);
    (void)pn;
    return jl.loss;
  };
}

AnmMmFit fit(const CauseEffectDataset& ds, const AnmMmConfig& config) {
  if (ds.agents() < 2) {
    throw std::invalid_argument("fit: need at least two agents");
  }
  if (config.latent_dim < 1 || !(config.lambda > 0.0)) {
    throw std::invalid_argument("fit: invalid latent_dim or lambda");
  }
  Rng rng(config.seed);

  AnmMmModel model;
  model.lambda = config.lambda;
  model.encoder = make_net(
      {2 * ds.samples(), config.encoder_hidden, config.latent_dim},
      {Activation::kTanh, Activation::kLinear});
  init_net_params_gaussian(model.encoder, rng, 0.1);

  const Eigen::MatrixXd z = concat_cause_effect(ds);
  model.input_mean = z.colwise().mean();
  const Eigen::RowVectorXd var =
      (z.rowwise() - model.input_mean).array().square().colwise().mean();
  model.input_scale = var.array().sqrt().max(1e-6).matrix();

  model.hsic_x_bandwidth = median_heuristic(ds.cause);

  const Eigen::MatrixXd y_centered =
      ds.effect.rowwise() - ds.effect.colwise().mean();
  const double y_var = y_centered.array().square().mean();
  model.gp_hyper.kernel.variance = std::clamp(y_var, 1e-2, 1e4);
  model.gp_hyper.noise_precision = 100.0;

  ThetaMatrix theta = encode(model, ds);
  {
    Eigen::MatrixXd x_tilde(ds.agents(), ds.samples() + config.latent_dim);
    x_tilde << ds.cause, theta;
    model.gp_hyper.kernel.lengthscale = median_heuristic(x_tilde);
  }

  AnmMmFit result;
  result.hsic_clamp_events = 0;
  const Eigen::VectorXd flat_init = anm_flatten(model);

  int done = 0;
  while (done < config.max_iters) {
    model.hsic_theta_bandwidth = median_heuristic(encode(model, ds));
    const LossClosure closure = anm_loss_closure(model, ds);
    const int chunk = std::min(config.bandwidth_refresh, config.max_iters - done);
    const ScgResult res =
        optimize_scg(closure, anm_flatten(model), chunk, config.tol);
    anm_set_flat(model, res.params);
    done += std::max(res.iterations, 1);
    if (joint_loss(model, ds).hsic_clamped) result.hsic_clamp_events += 1;
    if (res.converged) break;
  }
  result.iterations = done;

  // loss accounting under the final bandwidths; a run that somehow ended
  // worse than it started is discarded in favor of the initial parameters
  {
    AnmMmModel init_model = model;
    anm_set_flat(init_model, flat_init);
    result.initial_loss = joint_loss(init_model, ds).loss;
    result.final_loss = joint_loss(model, ds).loss;
    if (result.final_loss > result.initial_loss) {
      model = init_model;
      result.final_loss = result.initial_loss;
    }
  }

  result.model = model;
  result.theta = encode(model, ds);
  return result;
}

}  // namespace cccrl
