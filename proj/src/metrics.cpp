#include "alpinn/metrics.hpp"

#include "alpinn/error.hpp"

namespace alpinn::metrics {

double relative_l1(const Eigen::Ref<const Eigen::MatrixXd>& approx, const Eigen::Ref<const Eigen::MatrixXd>& exact,
                   const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (approx.rows() != exact.rows() || approx.cols() != exact.cols() || weights.size() != exact.cols()) {
    throw ShapeError("relative_l1: field and weight sizes differ");
  }
  double num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < exact.cols(); ++j) {
    num += weights[j] * (approx.col(j) - exact.col(j)).norm();
    den += weights[j] * exact.col(j).norm();
  }
  if (!(den > 0.0)) throw DegenerateError("relative error with a vanishing reference field");
  return num / den;
}

double interior_error(const diffnet::MlpParams& params, const losses::Discretization& disc) {
  if (disc.interior_exact.size() == 0) throw Unsupported("interior error needs a manufactured solution");
  const Eigen::MatrixXd u = losses::predict(params, *disc.problem, disc.interior.points);
  return relative_l1(u, disc.interior_exact, Eigen::VectorXd::Constant(u.cols(), disc.interior.delta_v));
}

double boundary_error(const diffnet::MlpParams& params, const losses::Discretization& disc) {
  const Eigen::MatrixXd u = losses::predict(params, *disc.problem, disc.dirichlet.points);
  return relative_l1(u, disc.dirichlet_data, disc.dirichlet.areas);
}

ErrorReport error_report(const losses::Evaluation& eval, const losses::Discretization& disc) {
  ErrorReport r;
  r.n_interior = disc.interior.count();
  r.n_boundary = disc.dirichlet.size();
  r.interior_error = relative_l1(eval.interior_values, disc.interior_exact,
                                 Eigen::VectorXd::Constant(r.n_interior, disc.interior.delta_v));
  if (r.n_boundary > 0) {
    r.boundary_error =
        relative_l1(eval.bundle.dirichlet + disc.dirichlet_data, disc.dirichlet_data, disc.dirichlet.areas);
  }
  return r;
}

}  // namespace alpinn::metrics
