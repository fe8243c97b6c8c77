#pragma once

#include "alpinn/diffnet.hpp"
#include "alpinn/geometry.hpp"
#include "alpinn/physics.hpp"

#include <functional>
#include <vector>

namespace alpinn::losses {

/// A problem sampled on its quadrature grids, with forcing, boundary data,
/// exact values and distance-factor jets precomputed per point.
///
/// Keeps a pointer to the problem, which must outlive it.
struct Discretization {
  const physics::Problem* problem = nullptr;

  geometry::InteriorGrid interior;
  Eigen::MatrixXd forcing;         // field_dim x N
  Eigen::MatrixXd interior_exact;  // field_dim x N, empty without an exact solution
  std::vector<physics::ScalarJet> interior_distance;

  geometry::SurfacePoints dirichlet;
  Eigen::MatrixXd dirichlet_data;  // g, field_dim x M_D
  Eigen::VectorXd dirichlet_distance;

  geometry::SurfacePoints flux;
  Eigen::VectorXd flux_data;  // t or q, M_N
  std::vector<physics::ScalarJet> flux_distance;

  int field_dim() const { return problem->field_dim(); }
};

Discretization discretize(const physics::Problem& problem, const physics::Grids& grids);

/// Residuals of the current discretization on every quadrature point.
struct ResidualBundle {
  double interior_loss = 0.0;      // 1/2 sum dV |r|^2
  Eigen::MatrixXd dirichlet;       // u_hat - g, field_dim x M_D
  Eigen::VectorXd dirichlet_area;
  Eigen::VectorXd flux;            // Neumann or Robin gap, M_N
  Eigen::VectorXd flux_area;
};

/// Per-point multipliers and penalties, shaped like the residuals.
/// Boundary term: sum_j A_j (lambda_j c_j + beta_j c_j^2 / 2).
struct BoundaryWeights {
  Eigen::MatrixXd lambda_d, beta_d;
  Eigen::VectorXd lambda_n, beta_n;

  /// lambda = 0, beta constant on both regions.
  static BoundaryWeights penalty(const Discretization& disc, double beta_d, double beta_n);
};

struct Evaluation {
  ResidualBundle bundle;
  double objective = 0.0;
  Eigen::MatrixXd interior_values;  // u_hat at interior points, field_dim x N
  // Parameter gradients of the interior loss and the two weighted boundary terms.
  Eigen::VectorXd grad_interior, grad_dirichlet, grad_flux;

  Eigen::VectorXd gradient() const { return grad_interior + grad_dirichlet + grad_flux; }
};

/// Residuals, weighted objective and (optionally) its gradient split by term,
/// in one full-batch pass. Throws NumericError naming the point when a
/// residual is not finite, ShapeError when weights do not match.
Evaluation evaluate(const diffnet::MlpParams& params, const Discretization& disc, const BoundaryWeights& weights,
                    bool with_gradient);

/// Residuals only.
ResidualBundle assemble(const diffnet::MlpParams& params, const Discretization& disc);

/// u_hat at arbitrary points (dim x P), field_dim x P.
Eigen::MatrixXd predict(const diffnet::MlpParams& params, const physics::Problem& problem,
                        const Eigen::Ref<const Eigen::MatrixXd>& points);

// One-dimensional bar demonstration ----------------------------------------

/// max(0, 1 - |x - i/(N+1)| (N+1)).
double hat_function(int i, int n, double x);

/// 1/2 sum_i (int_0^1 [(k u_hat')' + 100 sin(pi x)] v_i dx)^2 by the composite
/// trapezoid rule on quad_points equally spaced nodes. Adds the gradient into
/// grad when given. Throws PreconditionError if n_test < 1 or quad_points < 2.
double weak_form_loss_1d(const diffnet::MlpParams& params, int n_test, int quad_points,
                         Eigen::VectorXd* grad = nullptr);

/// The same loss for an arbitrary field u(x) given as a 1D jet carrying
/// value, u' and u'' (lap).
double weak_form_loss_1d(const std::function<diffnet::JetValue(double)>& field, int n_test, int quad_points);

/// Exact bar displacement (adaptive Gauss-Kronrod quadrature).
double bar_exact_solution(double x);

}  // namespace alpinn::losses
