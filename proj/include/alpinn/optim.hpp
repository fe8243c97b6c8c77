#pragma once

#include <Eigen/Dense>

namespace alpinn::optim {

/// ADAM state for one flat parameter vector.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  AdamState() = default;
  AdamState(Eigen::Index size, double learning_rate);
};

/// One bias-corrected ADAM update, eps added outside the square root.
/// Throws ShapeError on size mismatch, NumericError on a non-finite gradient,
/// PreconditionError if lr <= 0.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad);

enum class Direction { ascend, descend };

/// params <- params +/- lr * grad, no momentum.
void gd_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad, double lr,
             Direction direction);

}  // namespace alpinn::optim
