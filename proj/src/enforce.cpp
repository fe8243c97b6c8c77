#include "alpinn/enforce.hpp"

#include "alpinn/error.hpp"
#include "alpinn/metrics.hpp"
#include "alpinn/optim.hpp"

#include <cmath>
#include <iostream>
#include <memory>

namespace alpinn::enforce {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using losses::BoundaryWeights;
using losses::ResidualBundle;

BoundaryState BoundaryState::initial(int field_dim, Eigen::Index n_dirichlet, Eigen::Index n_flux, double beta0,
                                     double lambda0, double gamma) {
  if (!(beta0 > 0.0)) throw PreconditionError("initial penalty must be positive");
  if (!(gamma > 1.0)) throw PreconditionError("penalty growth factor must exceed 1");
  BoundaryState s;
  s.lambda_d = MatrixXd::Constant(field_dim, n_dirichlet, lambda0);
  s.beta_d = MatrixXd::Constant(field_dim, n_dirichlet, beta0);
  s.lambda_n = VectorXd::Constant(n_flux, lambda0);
  s.beta_n = VectorXd::Constant(n_flux, beta0);
  s.gamma = gamma;
  return s;
}

namespace {

double weights_beta_max(const BoundaryWeights& w) {
  double m = 0.0;
  if (w.beta_d.size() > 0) m = std::max(m, w.beta_d.maxCoeff());
  if (w.beta_n.size() > 0) m = std::max(m, w.beta_n.maxCoeff());
  return m;
}

}  // namespace

double BoundaryState::beta_max() const { return weights_beta_max(*this); }

void ConvergenceCriteria::validate() const {
  if (!(objective_tol > 0.0)) throw PreconditionError("objective tolerance must be positive");
  if (!(boundary_tol > 0.0)) throw PreconditionError("boundary tolerance must be positive");
  if (!(gradient_tol > 0.0)) throw PreconditionError("gradient tolerance must be positive");
  if (max_epochs < 1) throw PreconditionError("max_epochs must be at least 1");
}

namespace {

// 1/2 sum dA c^2, summed over field components.
double dirichlet_square(const ResidualBundle& b) {
  return 0.5 * (b.dirichlet.array().square().colwise().sum().transpose() * b.dirichlet_area.array()).sum();
}

double flux_square(const ResidualBundle& b) { return 0.5 * (b.flux.array().square() * b.flux_area.array()).sum(); }

void check_shape(const ResidualBundle& b, const BoundaryWeights& w) {
  if (w.lambda_d.rows() != b.dirichlet.rows() || w.lambda_d.cols() != b.dirichlet.cols() ||
      w.beta_d.rows() != b.dirichlet.rows() || w.beta_d.cols() != b.dirichlet.cols() ||
      w.lambda_n.size() != b.flux.size() || w.beta_n.size() != b.flux.size())
    throw ShapeError("boundary weights do not match the residuals");
}

}  // namespace

double penalty_objective(const ResidualBundle& bundle, double beta) {
  if (beta < 0.0) throw PreconditionError("penalty must be non-negative");
  return bundle.interior_loss + beta * (dirichlet_square(bundle) + flux_square(bundle));
}

double lra_beta_update(double beta_prev, const Eigen::Ref<const VectorXd>& grad_pde,
                       const Eigen::Ref<const VectorXd>& grad_bc, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw PreconditionError("moving-average factor must lie in [0, 1]");
  const double mean_bc = grad_bc.size() > 0 ? grad_bc.cwiseAbs().mean() : 0.0;
  if (!(mean_bc > 0.0)) {
    std::clog << "warning: boundary gradient vanishes, penalty left at " << beta_prev << "\n";
    return beta_prev;
  }
  const double beta_hat = grad_pde.cwiseAbs().maxCoeff() / mean_bc;
  return (1.0 - alpha) * beta_prev + alpha * beta_hat;
}

void sa_pinn_step(const ResidualBundle& bundle, BoundaryWeights& weights, double lr_beta) {
  if (!(lr_beta > 0.0)) throw PreconditionError("penalty learning rate must be positive");
  check_shape(bundle, weights);
  weights.beta_d += 0.5 * lr_beta * bundle.dirichlet.cwiseAbs2() * bundle.dirichlet_area.asDiagonal();
  weights.beta_n.array() += 0.5 * lr_beta * bundle.flux.array().square() * bundle.flux_area.array();
}

void lagrange_minmax_step(const ResidualBundle& bundle, BoundaryWeights& weights, double lr_lambda) {
  if (!(lr_lambda > 0.0)) throw PreconditionError("multiplier learning rate must be positive");
  check_shape(bundle, weights);
  weights.lambda_d += lr_lambda * bundle.dirichlet * bundle.dirichlet_area.asDiagonal();
  weights.lambda_n.array() += lr_lambda * bundle.flux.array() * bundle.flux_area.array();
}

double augmented_lagrangian_objective(const ResidualBundle& bundle, const BoundaryState& state) {
  check_shape(bundle, state);
  const auto& c = bundle.dirichlet.array();
  const VectorXd per_point = (state.lambda_d.array() * c + 0.5 * state.beta_d.array() * c.square()).colwise().sum();
  const auto& q = bundle.flux.array();
  return bundle.interior_loss + per_point.dot(bundle.dirichlet_area) +
         ((state.lambda_n.array() * q + 0.5 * state.beta_n.array() * q.square()) * bundle.flux_area.array()).sum();
}

void al_multiplier_update(BoundaryState& state, const ResidualBundle& bundle) {
  check_shape(bundle, state);
  state.lambda_d.array() += state.beta_d.array() * bundle.dirichlet.array();
  state.lambda_n.array() += state.beta_n.array() * bundle.flux.array();
  state.beta_d *= state.gamma;
  state.beta_n *= state.gamma;
  ++state.outer_iter;
}

Model pinn_model(const losses::Discretization& disc, const diffnet::MlpParams& init) {
  Model m;
  m.initial = init.flat();
  m.field_dim = disc.field_dim();
  m.n_dirichlet = disc.dirichlet.size();
  m.n_flux = disc.flux.size();
  auto scratch = std::make_shared<diffnet::MlpParams>(init);
  const losses::Discretization* d = &disc;
  m.evaluate = [scratch, d](const VectorXd& theta, const BoundaryWeights& w, bool with_gradient) {
    scratch->flat() = theta;
    Sample s;
    s.eval = losses::evaluate(*scratch, *d, w, with_gradient);
    const auto report = metrics::error_report(s.eval, *d);
    s.boundary_error = report.boundary_error;
    if (d->interior_exact.size() > 0) s.interior_error = report.interior_error;
    return s;
  };
  return m;
}

Method parse_method(const std::string& name) {
  if (name == "penalty") return Method::penalty;
  if (name == "lra") return Method::lra;
  if (name == "sa") return Method::sa;
  if (name == "minmax") return Method::minmax;
  if (name == "al") return Method::al;
  throw ConfigError("method: unknown value '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::penalty: return "penalty";
    case Method::lra: return "lra";
    case Method::sa: return "sa";
    case Method::minmax: return "minmax";
    case Method::al: return "al";
  }
  return "?";
}

namespace {

// Shared bookkeeping of the training loops.
class Trainer {
 public:
  Trainer(const Model& model, const SolverConfig& config)
      : model_(model), config_(config), adam_(model.initial.size(), config.lr) {
    result_.params = model.initial;
  }

  Sample sample(const BoundaryWeights& w) {
    Sample s;
    try {
      s = model_.evaluate(result_.params, w, true);
    } catch (const NumericError& e) {
      throw DivergedError(std::string("diverged at epoch ") + std::to_string(epoch_) + ": " + e.what(), epoch_);
    }
    if (!std::isfinite(s.eval.objective))
      throw DivergedError("objective is not finite at epoch " + std::to_string(epoch_), epoch_);
    return s;
  }

  // Appends a history row; false when the callback asks to stop.
  bool record(const Sample& s, double objective, double grad_norm, int outer_iter, double beta_max) {
    HistoryRow row;
    row.epoch = epoch_;
    row.outer_iter = outer_iter;
    row.objective = objective;
    row.grad_norm = grad_norm;
    row.boundary_error = s.boundary_error;
    row.interior_error = s.interior_error;
    row.beta_max = beta_max;
    result_.history.push_back(row);
    return !config_.on_epoch || config_.on_epoch(row);
  }

  void step(const VectorXd& grad) {
    try {
      optim::adam_step(adam_, result_.params, grad);
    } catch (const NumericError& e) {
      throw DivergedError(std::string("diverged at epoch ") + std::to_string(epoch_) + ": " + e.what(), epoch_);
    }
  }

  SolveResult finish(const BoundaryState& w, Termination t) {
    result_.termination = t;
    result_.state = w;
    result_.final = model_.evaluate(result_.params, w, false);
    return std::move(result_);
  }

  long& epoch() { return epoch_; }

 private:
  const Model& model_;
  const SolverConfig& config_;
  optim::AdamState adam_;
  SolveResult result_;
  long epoch_ = 0;
};

void require_epochs(const SolverConfig& c) {
  if (c.epochs < 1) throw PreconditionError("epochs must be at least 1");
}

BoundaryState weights_for(const Model& m, double beta, double lambda, double gamma = 2.0) {
  BoundaryState s = BoundaryState::initial(m.field_dim, m.n_dirichlet, m.n_flux, 1.0, lambda, gamma);
  s.beta_d.setConstant(beta);
  s.beta_n.setConstant(beta);
  return s;
}

}  // namespace

SolveResult penalty_solve(const Model& model, const SolverConfig& config) {
  require_epochs(config);
  if (config.beta < 0.0) throw PreconditionError("penalty must be non-negative");
  Trainer tr(model, config);
  const BoundaryState w = weights_for(model, config.beta, 0.0);
  for (long& e = tr.epoch(); e < config.epochs; ++e) {
    const Sample s = tr.sample(w);
    const VectorXd g = s.eval.gradient();
    const bool go = tr.record(s, s.eval.objective, g.norm(), 0, config.beta);
    tr.step(g);
    if (!go) return tr.finish(w, Termination::stopped);
  }
  return tr.finish(w, Termination::fixed_epochs);
}

SolveResult lra_solve(const Model& model, const SolverConfig& config) {
  require_epochs(config);
  Trainer tr(model, config);
  // Unit weights expose the unweighted boundary gradients; the region
  // penalties are applied afterwards.
  const BoundaryState unit = weights_for(model, 1.0, 0.0);
  double beta_d = config.beta, beta_n = config.beta;
  for (long& e = tr.epoch(); e < config.epochs; ++e) {
    const Sample s = tr.sample(unit);
    const auto& ev = s.eval;
    if (model.n_dirichlet > 0) beta_d = lra_beta_update(beta_d, ev.grad_interior, ev.grad_dirichlet, config.alpha);
    if (model.n_flux > 0) beta_n = lra_beta_update(beta_n, ev.grad_interior, ev.grad_flux, config.alpha);
    const VectorXd g = ev.grad_interior + beta_d * ev.grad_dirichlet + beta_n * ev.grad_flux;
    const double objective = ev.bundle.interior_loss + beta_d * dirichlet_square(ev.bundle) +
                             beta_n * flux_square(ev.bundle);
    const double beta_max = std::max(model.n_dirichlet > 0 ? beta_d : 0.0, model.n_flux > 0 ? beta_n : 0.0);
    const bool go = tr.record(s, objective, g.norm(), 0, beta_max);
    tr.step(g);
    if (!go) break;
  }
  BoundaryState w = weights_for(model, beta_d, 0.0);
  w.beta_n.setConstant(beta_n);
  return tr.finish(w, tr.epoch() < config.epochs ? Termination::stopped : Termination::fixed_epochs);
}

SolveResult sa_solve(const Model& model, const SolverConfig& config) {
  require_epochs(config);
  Trainer tr(model, config);
  BoundaryState w = weights_for(model, config.beta, 0.0);
  for (long& e = tr.epoch(); e < config.epochs; ++e) {
    const Sample s = tr.sample(w);
    const VectorXd g = s.eval.gradient();
    const bool go = tr.record(s, s.eval.objective, g.norm(), 0, w.beta_max());
    tr.step(g);
    sa_pinn_step(s.eval.bundle, w, config.lr_beta);
    if (!go) return tr.finish(w, Termination::stopped);
  }
  return tr.finish(w, Termination::fixed_epochs);
}

SolveResult minmax_solve(const Model& model, const SolverConfig& config) {
  require_epochs(config);
  Trainer tr(model, config);
  BoundaryState w = weights_for(model, 0.0, config.lambda0);
  for (long& e = tr.epoch(); e < config.epochs; ++e) {
    const Sample s = tr.sample(w);
    const VectorXd g = s.eval.gradient();
    const bool go = tr.record(s, s.eval.objective, g.norm(), 0, 0.0);
    tr.step(g);
    lagrange_minmax_step(s.eval.bundle, w, config.lr_lambda);
    if (!go) return tr.finish(w, Termination::stopped);
  }
  return tr.finish(w, Termination::fixed_epochs);
}

SolveResult al_solve(const Model& model, const SolverConfig& config) {
  config.criteria.validate();
  const ConvergenceCriteria& crit = config.criteria;
  Trainer tr(model, config);
  BoundaryState state =
      BoundaryState::initial(model.field_dim, model.n_dirichlet, model.n_flux, config.beta, config.lambda0, config.gamma);
  double z0 = 0.0, r0 = 0.0;
  bool inner_start = true;
  // One epoch is one evaluation followed by either an ADAM step or, once the
  // inner loop has converged, a multiplier update.
  for (long& e = tr.epoch(); e < crit.max_epochs; ++e) {
    const Sample s = tr.sample(state);
    const VectorXd g = s.eval.gradient();
    const double gnorm = g.norm();
    const bool squared = config.reference == GradientReference::squared ||
                         config.reference == GradientReference::outer_start_squared;
    const double measure = squared ? gnorm * gnorm : gnorm;
    if (e == 0) {
      z0 = s.eval.objective;
      r0 = measure;
    } else if (inner_start && (config.reference == GradientReference::outer_start ||
                               config.reference == GradientReference::outer_start_squared)) {
      r0 = measure;
    }
    inner_start = false;
    const bool go = tr.record(s, s.eval.objective, gnorm, state.outer_iter, state.beta_max());
    // The outer test is checked every epoch, not only when an inner loop ends.
    const double z_ratio = z0 != 0.0 ? std::abs(s.eval.objective / z0) : 0.0;
    if (s.boundary_error <= crit.boundary_tol && z_ratio <= crit.objective_tol)
      return tr.finish(state, Termination::converged);
    if (measure <= crit.gradient_tol * r0) {
      al_multiplier_update(state, s.eval.bundle);
      inner_start = true;
    } else {
      tr.step(g);
    }
    if (!go) return tr.finish(state, Termination::stopped);
  }
  return tr.finish(state, Termination::max_epochs);
}

SolveResult solve(Method method, const Model& model, const SolverConfig& config) {
  switch (method) {
    case Method::penalty: return penalty_solve(model, config);
    case Method::lra: return lra_solve(model, config);
    case Method::sa: return sa_solve(model, config);
    case Method::minmax: return minmax_solve(model, config);
    case Method::al: return al_solve(model, config);
  }
  throw ConfigError("method: unknown value");
}

}  // namespace alpinn::enforce
