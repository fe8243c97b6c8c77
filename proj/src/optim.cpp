#include "alpinn/optim.hpp"

#include "alpinn/error.hpp"

#include <cmath>

namespace alpinn::optim {

AdamState::AdamState(Eigen::Index size, double learning_rate)
    : lr(learning_rate), m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (!(state.lr > 0.0)) throw PreconditionError("ADAM learning rate must be positive");
  if (params.size() != grad.size()) throw ShapeError("ADAM: parameter and gradient lengths differ");
  if (state.m.size() == 0 && state.v.size() == 0) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("ADAM: moment vectors do not match the parameter length");
  }
  if (!grad.allFinite()) throw NumericError("ADAM: gradient contains non-finite entries");

  ++state.step_count;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  params.array() -= state.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

void gd_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad, double lr,
             Direction direction) {
  if (!(lr > 0.0)) throw PreconditionError("gradient step size must be positive");
  if (params.size() != grad.size()) throw ShapeError("gradient step: length mismatch");
  if (direction == Direction::ascend) {
    params += lr * grad;
  } else {
    params -= lr * grad;
  }
}

}  // namespace alpinn::optim
