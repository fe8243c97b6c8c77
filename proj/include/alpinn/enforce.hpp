#pragma once

#include "alpinn/losses.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace alpinn::enforce {

/// Multipliers and penalties of the Augmented Lagrangian, plus the growth
/// factor and the current outer iteration.
struct BoundaryState : losses::BoundaryWeights {
  double gamma = 2.0;
  int outer_iter = 0;

  /// lambda = lambda0, beta = beta0 everywhere. Throws PreconditionError
  /// unless beta0 > 0 and gamma > 1.
  static BoundaryState initial(int field_dim, Eigen::Index n_dirichlet, Eigen::Index n_flux, double beta0,
                               double lambda0, double gamma);

  double beta_max() const;
};

struct ConvergenceCriteria {
  double objective_tol = 5e-3;  // Z_f
  double boundary_tol = 1e-2;   // B_f
  double gradient_tol = 1e-2;   // R_f
  long max_epochs = 50000;

  /// Throws PreconditionError unless every threshold is positive.
  void validate() const;
};

// Single updates -------------------------------------------------------------

/// interior_loss + beta/2 sum dA c^2 over both boundary regions.
double penalty_objective(const losses::ResidualBundle& bundle, double beta);

/// beta_hat = max|grad_pde| / mean|grad_bc|, returns (1 - alpha) beta_prev + alpha beta_hat.
/// Returns beta_prev and logs a warning when mean|grad_bc| is zero.
/// Throws PreconditionError unless 0 <= alpha <= 1.
double lra_beta_update(double beta_prev, const Eigen::Ref<const Eigen::VectorXd>& grad_pde,
                       const Eigen::Ref<const Eigen::VectorXd>& grad_bc, double alpha);

/// beta += lr dA c^2 / 2 on every boundary point.
void sa_pinn_step(const losses::ResidualBundle& bundle, losses::BoundaryWeights& weights, double lr_beta);

/// lambda += lr dA c on every boundary point.
void lagrange_minmax_step(const losses::ResidualBundle& bundle, losses::BoundaryWeights& weights, double lr_lambda);

/// interior_loss + sum dA (lambda c + beta c^2 / 2). Throws ShapeError.
double augmented_lagrangian_objective(const losses::ResidualBundle& bundle, const BoundaryState& state);

/// lambda += beta * c, beta *= gamma, outer_iter += 1.
void al_multiplier_update(BoundaryState& state, const losses::ResidualBundle& bundle);

// Training -------------------------------------------------------------------

/// Everything a solver needs from one evaluation at fixed weights.
struct Sample {
  losses::Evaluation eval;
  double boundary_error = 0.0;
  double interior_error = std::numeric_limits<double>::quiet_NaN();
};

/// A constrained problem seen through a flat parameter vector. The PINN and
/// small analytic problems both plug in here.
struct Model {
  Eigen::VectorXd initial;
  // Residual layout: field_dim x n_dirichlet and n_flux.
  int field_dim = 1;
  Eigen::Index n_dirichlet = 0, n_flux = 0;
  std::function<Sample(const Eigen::VectorXd& theta, const losses::BoundaryWeights& weights, bool with_gradient)>
      evaluate;
};

/// Wraps a discretization and a network architecture.
Model pinn_model(const losses::Discretization& disc, const diffnet::MlpParams& init);

enum class Method { penalty, lra, sa, minmax, al };

Method parse_method(const std::string& name);
std::string method_name(Method m);

/// Where the inner AL loop measures its gradient threshold from.
enum class GradientReference {
  initial,      // |g| <= R_f |g0|
  squared,      // |g|^2 <= R_f |g0|^2
  outer_start,  // |g| <= R_f |g_s|, g_s the first gradient of each inner loop
  outer_start_squared  // |g|^2 <= R_f |g_s|^2
};

struct HistoryRow {
  long epoch = 0;
  int outer_iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double boundary_error = 0.0;
  double interior_error = 0.0;
  double beta_max = 0.0;
};

struct SolverConfig {
  double lr = 5e-3;
  long epochs = 10000;  // fixed-epoch methods
  double beta = 1.0;    // penalty weight, initial beta for lra, sa and al
  double lambda0 = 0.0;
  double alpha = 0.9;   // lra moving average
  double lr_beta = 0.5;
  double lr_lambda = 1e-2;
  double gamma = 2.0;
  ConvergenceCriteria criteria;
  GradientReference reference = GradientReference::initial;
  /// Called after every epoch with the row just recorded; returning false stops training.
  std::function<bool(const HistoryRow&)> on_epoch;
};

enum class Termination { converged, max_epochs, fixed_epochs, stopped };

struct SolveResult {
  Eigen::VectorXd params;
  BoundaryState state;
  std::vector<HistoryRow> history;
  Termination termination = Termination::fixed_epochs;
  /// Evaluation at the returned parameters.
  Sample final;
};

/// Fixed-epoch training; each row of the history describes the parameters
/// before that epoch's update. Throws PreconditionError if epochs < 1,
/// DivergedError on a non-finite objective.
SolveResult penalty_solve(const Model& model, const SolverConfig& config);
SolveResult lra_solve(const Model& model, const SolverConfig& config);
SolveResult sa_solve(const Model& model, const SolverConfig& config);
SolveResult minmax_solve(const Model& model, const SolverConfig& config);

/// Outer/inner Augmented Lagrangian loop. The outer loop stops once the
/// boundary error is at most B_f and |Z_t / Z_0| at most Z_f; the inner loop
/// runs ADAM until the gradient norm falls to R_f times the reference.
/// ADAM moments persist across outer iterations.
SolveResult al_solve(const Model& model, const SolverConfig& config);

SolveResult solve(Method method, const Model& model, const SolverConfig& config);

}  // namespace alpinn::enforce
