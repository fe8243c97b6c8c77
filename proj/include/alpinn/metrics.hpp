#pragma once

#include "alpinn/diffnet.hpp"
#include "alpinn/losses.hpp"

namespace alpinn::metrics {

struct ErrorReport {
  double interior_error = 0.0;
  double boundary_error = 0.0;
  Eigen::Index n_interior = 0;
  Eigen::Index n_boundary = 0;
};

/// sum_j w_j |a_j - b_j| / sum_j w_j |b_j| over columns (Euclidean norm per
/// column). Throws DegenerateError if the denominator vanishes, ShapeError on
/// mismatched sizes.
double relative_l1(const Eigen::Ref<const Eigen::MatrixXd>& approx, const Eigen::Ref<const Eigen::MatrixXd>& exact,
                   const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Relative L1 error of u_hat against the exact solution on the interior grid.
double interior_error(const diffnet::MlpParams& params, const losses::Discretization& disc);
/// Relative L1 error of u_hat against g on the Dirichlet points.
double boundary_error(const diffnet::MlpParams& params, const losses::Discretization& disc);

/// Both errors from an evaluation already computed at the current parameters.
/// The boundary error is 0 when there are no Dirichlet points.
ErrorReport error_report(const losses::Evaluation& eval, const losses::Discretization& disc);

}  // namespace alpinn::metrics
