#include <cmath>
#include <sstream>

#include "cccrl/harness.hpp"
#include "cccrl/kernels.hpp"

namespace cccrl {

namespace {

// ---- criterion helpers -----------------------------------------------

// brute-force HSIC via the expanded double-centering identity:
// (1/N^2) sum K.L - (2/N^3) 1'KL1 + (1/N^4)(1'K1)(1'L1)
double hsic_expanded_oracle(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l) {
  const Eigen::Index n = k.rows();
  double term1 = 0.0, k_total = 0.0, l_total = 0.0;
  Eigen::VectorXd k_rows = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd l_rows = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      term1 += k(i, j) * l(i, j);
      k_rows[i] += k(i, j);
      l_rows[i] += l(i, j);
      k_total += k(i, j);
      l_total += l(i, j);
    }
  }
  double cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) cross += k_rows[i] * l_rows[i];
  const double dn = static_cast<double>(n);
  return term1 / (dn * dn) - 2.0 * cross / (dn * dn * dn) +
         k_total * l_total / (dn * dn * dn * dn);
}

CheckResult check_hsic_oracle() {
  CheckResult res{"hsic oracle equivalence", true, ""};
  Rng rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(5));  // 2..6
    Eigen::MatrixXd x(n, 2), y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        x(i, j) = rng.normal();
        y(i, j) = rng.normal();
      }
    }
    const Eigen::MatrixXd k = rbf_gram(x, x, {1.0, 1.0});
    const Eigen::MatrixXd l = rbf_gram(y, y, {0.7, 1.3});
    worst = std::max(worst,
                     std::abs(hsic_biased(k, l) - hsic_expanded_oracle(k, l)));
  }
  res.passed = worst <= 1e-10;
  std::ostringstream os;
  os << "max |difference| = " << worst << " (bound 1e-10)";
  res.detail = os.str();
  return res;
}

double fd_relative_error(const LossClosure& closure, const Eigen::VectorXd& at,
                         const Eigen::VectorXd& analytic, double step) {
  Eigen::VectorXd fd(at.size());
  Eigen::VectorXd scratch(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Eigen::VectorXd p = at;
    p[i] = at[i] + step;
    const double hi = closure(p, scratch);
    p[i] = at[i] - step;
    const double lo = closure(p, scratch);
    fd[i] = (hi - lo) / (2.0 * step);
  }
  return (fd - analytic).norm() / std::max(fd.norm(), 1e-12);
}

CheckResult check_gradients() {
  CheckResult res{"gradient correctness vs finite differences", true, ""};
  double worst = 0.0;

  // joint extraction loss on small instances
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(100 + trial);
    const Eigen::Index n = 6, p = 4;
    CauseEffectDataset ds;
    ds.cause.resize(n, p);
    ds.effect.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        ds.cause(i, j) = rng.uniform(-2.0, 2.0);
        ds.effect(i, j) = std::sin(ds.cause(i, j)) + 0.1 * rng.normal();
      }
    }
    AnmMmModel model;
    model.lambda = 1.0;
    model.encoder = make_net({2 * p, 10, 1},
                             {Activation::kTanh, Activation::kLinear});
    init_net_params_gaussian(model.encoder, rng, 0.1);
    model.input_mean = Eigen::RowVectorXd::Zero(2 * p);
    model.input_scale = Eigen::RowVectorXd::Ones(2 * p);
    model.gp_hyper.kernel = {1.5, 1.0};
    model.gp_hyper.noise_precision = 20.0;
    model.hsic_x_bandwidth = median_heuristic(ds.cause);
    model.hsic_theta_bandwidth = 0.5;

    const LossClosure closure = anm_loss_closure(model, ds);
    const Eigen::VectorXd at = anm_flatten(model);
    Eigen::VectorXd grad(at.size());
    closure(at, grad);
    worst = std::max(worst, fd_relative_error(closure, at, grad, 1e-5));
  }

  // critic regression and actor objective gradients
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(200 + trial);
    const Eigen::Index b = 4, sd = 2, ad = 1;
    Eigen::MatrixXd states(b, sd), actions(b, ad);
    Eigen::VectorXd targets(b);
    for (Eigen::Index i = 0; i < b; ++i) {
      for (Eigen::Index j = 0; j < sd; ++j) states(i, j) = rng.normal();
      actions(i, 0) = rng.uniform(-1.0, 1.0);
      targets[i] = rng.normal();
    }
    FeedForwardNet critic =
        make_net({sd + ad, 8, 6, 1},
                 {Activation::kRelu, Activation::kRelu, Activation::kLinear});
    init_net_params_gaussian(critic, rng, 0.4);
    FeedForwardNet actor = make_net({sd, 8, ad},
                                    {Activation::kRelu, Activation::kTanh});
    init_net_params_gaussian(actor, rng, 0.4);

    const auto [closs, cgrad] = critic_loss_grad(critic, states, actions, targets);
    (void)closs;
    const LossClosure critic_closure =
        [&](const Eigen::VectorXd& pvec, Eigen::VectorXd& g) {
          FeedForwardNet c2 = critic;
          c2.params = pvec;
          g.setZero(pvec.size());
          return critic_loss_grad(c2, states, actions, targets).first;
        };
    worst = std::max(worst, fd_relative_error(critic_closure, critic.params,
                                              cgrad, 1e-5));

    const auto [obj, agrad] = actor_objective_grad(actor, critic, states, 2.0);
    (void)obj;
    const LossClosure actor_closure =
        [&](const Eigen::VectorXd& pvec, Eigen::VectorXd& g) {
          FeedForwardNet a2 = actor;
          a2.params = pvec;
          g.setZero(pvec.size());
          return actor_objective_grad(a2, critic, states, 2.0).first;
        };
    worst = std::max(worst,
                     fd_relative_error(actor_closure, actor.params, agrad, 1e-5));
  }

  res.passed = worst < 1e-4;
  std::ostringstream os;
  os << "max relative error = " << worst << " (bound 1e-4)";
  res.detail = os.str();
  return res;
}

CheckResult check_em_monotonic() {
  CheckResult res{"gmm em monotonicity", true, ""};
  Rng rng(7);
  double worst_drop = 0.0;
  int reseeds = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.below(40));
    const Eigen::Index q = 1 + static_cast<Eigen::Index>(rng.below(2));
    const int c = 1 + static_cast<int>(rng.below(4));
    Eigen::MatrixXd theta(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double center = (rng.below(2) == 0) ? -2.0 : 2.0;
      for (Eigen::Index j = 0; j < q; ++j) {
        theta(i, j) = center + rng.normal();
      }
    }
    const GmmFit fit = fit_gmm_em(theta, c, 1000 + trial);
    reseeds += fit.reseed_events;
    for (std::size_t i = 1; i < fit.log_likelihoods.size(); ++i) {
      worst_drop = std::max(
          worst_drop, fit.log_likelihoods[i - 1] - fit.log_likelihoods[i]);
    }
  }
  res.passed = worst_drop <= 1e-9 && reseeds == 0;
  std::ostringstream os;
  os << "worst per-step drop = " << worst_drop << " (bound 1e-9), reseeds = "
     << reseeds;
  res.detail = os.str();
  return res;
}

CheckResult check_allocation() {
  CheckResult res{"batch allocation exactness", true, ""};
  Rng rng(11);
  const int batches[] = {1, 64, 192};
  for (int trial = 0; trial < 1000 && res.passed; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(10));
    Eigen::VectorXd row(n);
    for (Eigen::Index i = 0; i < n; ++i) row[i] = -std::log(rng.uniform(1e-12, 1.0));
    row /= row.sum();
    for (int b : batches) {
      const Eigen::VectorXi alloc = allocate_batch(row, b);
      if (alloc.sum() != b || alloc.minCoeff() < 0) {
        res.passed = false;
        res.detail = "sum or sign violation";
        break;
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(alloc[i] - b * row[i]) > 1.0 + 1e-9) {
          res.passed = false;
          res.detail = "entry further than 1 from its quota";
          break;
        }
      }
    }
  }
  if (res.passed) res.detail = "1000 rows x B in {1, 64, 192}";
  return res;
}

CheckResult check_env_invariants() {
  CheckResult res{"environment invariants", true, ""};
  std::ostringstream os;
  double worst_trig = 0.0, worst_energy = 0.0;

  for (int trial = 0; trial < 100 && res.passed; ++trial) {
    // ar: rewards in (0, 1]
    {
      EnvSpec spec = with_defaults({});
      spec.target = -4.0;
      Rng rng(3000 + trial);
      EnvState st = reset_env(spec, rng);
      for (int t = 0; t < spec.horizon; ++t) {
        const Eigen::VectorXd a =
            Eigen::VectorXd::Constant(1, rng.uniform(-2.0, 2.0));
        auto [next, r] = env_step(spec, st, a, rng);
        if (!(r > 0.0 && r <= 1.0)) {
          res.passed = false;
          os << "ar reward out of (0,1]";
        }
        st = next;
      }
    }
    // sparse ar: rewards <= 100
    {
      EnvSpec spec;
      spec.kind = EnvKind::kArSparse;
      spec = with_defaults(spec);
      spec.target = 20.0;
      Rng rng(4000 + trial);
      EnvState st = reset_env(spec, rng);
      for (int t = 0; t < spec.horizon; ++t) {
        const Eigen::VectorXd a =
            Eigen::VectorXd::Constant(1, rng.uniform(-2.0, 2.0));
        auto [next, r] = env_step(spec, st, a, rng);
        if (!(r <= 100.0)) {
          res.passed = false;
          os << "sparse reward above 100";
        }
        st = next;
      }
    }
    // pendulum: trig normalization, angular velocity cap, rewards <= 0
    {
      EnvSpec spec;
      spec.kind = EnvKind::kPendulumWind;
      spec = with_defaults(spec);
      spec.wind = (trial % 2 == 0) ? 4.0 : -1.5;
      Rng rng(5000 + trial);
      EnvState st = reset_env(spec, rng);
      for (int t = 0; t < spec.horizon; ++t) {
        const Eigen::VectorXd a =
            Eigen::VectorXd::Constant(1, rng.uniform(-2.0, 2.0));
        auto [next, r] = env_step(spec, st, a, rng);
        worst_trig = std::max(
            worst_trig, std::abs(next.obs[0] * next.obs[0] +
                                 next.obs[1] * next.obs[1] - 1.0));
        if (!(r <= 0.0) || std::abs(next.obs[2]) > 8.0 + 1e-12) {
          res.passed = false;
          os << "pendulum reward/velocity bound violated";
        }
        st = next;
      }
    }
    // cart-pole: trig normalization, reward bounds, passive energy audit
    {
      EnvSpec spec;
      spec.kind = EnvKind::kCartpoleGravity;
      spec = with_defaults(spec);
      spec.gravity = 9.82;
      Rng rng(6000 + trial);
      EnvState st = reset_env(spec, rng);
      const double e0 = cartpole_energy(spec, st);
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
      for (int t = 0; t < 1000; ++t) {
        auto [next, r] = env_step(spec, st, zero, rng);
        worst_trig = std::max(
            worst_trig, std::abs(next.obs[2] * next.obs[2] +
                                 next.obs[3] * next.obs[3] - 1.0));
        if (!(r >= -1.0 && r <= 1.0)) {
          res.passed = false;
          os << "cartpole reward out of [-1,1]";
        }
        worst_energy = std::max(
            worst_energy, std::abs(cartpole_energy(spec, next) - e0) /
                              std::abs(e0));
        st = next;
      }
    }
  }
  if (worst_trig > 1e-9) {
    res.passed = false;
    os << "trig normalization drift " << worst_trig << "; ";
  }
  if (worst_energy > 0.02) {
    res.passed = false;
    os << "energy drift " << worst_energy << "; ";
  }
  if (res.passed) {
    os << "trig drift " << worst_trig << ", energy drift " << worst_energy
       << " (bounds 1e-9, 2%)";
  }
  res.detail = os.str();
  return res;
}

}  // namespace

std::vector<CheckResult> run_quick_checks() {
  return {check_hsic_oracle(), check_gradients(), check_em_monotonic(),
          check_allocation(), check_env_invariants()};
}

}  // namespace cccrl
