#include "alpinn/losses.hpp"

#include "alpinn/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace alpinn::losses {

namespace {

using diffnet::BatchJet;
using diffnet::JetOrder;
using diffnet::JetValue;
using physics::ScalarJet;

constexpr Eigen::Index kChunk = 64;

// Runs the network over points in chunks. fn(index, jet_n, seed_n) returns
// nothing and fills seed_n (zeroed) with the adjoint on the raw network jet.
template <class Fn>
void sweep(const diffnet::MlpParams& params, JetOrder order, const Eigen::MatrixXd& points, Eigen::VectorXd* grad,
           Fn&& fn) {
  if (points.cols() == 0) return;
  BatchJet net(params, order);
  const int outputs = params.output_dim();
  const int inputs = params.input_dim();
  for (Eigen::Index start = 0; start < points.cols(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, points.cols() - start);
    net.forward(points.middleCols(start, len));
    for (Eigen::Index b = 0; b < len; ++b) {
      JetValue seed(outputs, inputs, order);
      fn(start + b, net.point(static_cast<int>(b)), seed);
      if (grad) net.add_adjoint(static_cast<int>(b), seed);
    }
    if (grad) net.backward(*grad);
  }
}

[[noreturn]] void non_finite(const char* what, const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::ostringstream msg;
  msg << "non-finite " << what << " residual at point (" << x.transpose() << ")";
  throw NumericError(msg.str());
}

}  // namespace

Discretization discretize(const physics::Problem& problem, const physics::Grids& grids) {
  Discretization d;
  d.problem = &problem;
  const int fd = problem.field_dim();
  d.interior = grids.interior;
  const Eigen::Index n = d.interior.count();
  d.forcing.resize(fd, n);
  d.interior_distance.resize(static_cast<std::size_t>(n));
  if (problem.has_exact()) d.interior_exact.resize(fd, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = d.interior.points.col(i);
    const physics::Vec f = physics::manufactured_forcing(problem, x);
    for (int k = 0; k < fd; ++k) d.forcing(k, i) = f[k];
    if (problem.has_exact()) {
      const JetValue u = problem.exact(x);
      for (int k = 0; k < fd; ++k) d.interior_exact(k, i) = u.value[k];
    }
    d.interior_distance[static_cast<std::size_t>(i)] = problem.distance(x);
  }

  d.dirichlet = grids.boundary.dirichlet;
  d.dirichlet_data.resize(fd, d.dirichlet.size());
  d.dirichlet_distance.resize(d.dirichlet.size());
  for (Eigen::Index j = 0; j < d.dirichlet.size(); ++j) {
    const auto s = d.dirichlet.points.col(j);
    const JetValue u = problem.exact(s);
    for (int k = 0; k < fd; ++k) d.dirichlet_data(k, j) = u.value[k];
    d.dirichlet_distance[j] = problem.distance(s).value;
  }

  d.flux = grids.boundary.flux;
  d.flux_data.resize(d.flux.size());
  d.flux_distance.resize(static_cast<std::size_t>(d.flux.size()));
  for (Eigen::Index j = 0; j < d.flux.size(); ++j) {
    d.flux_data[j] = physics::flux_data(problem, d.flux.points.col(j), d.flux.normals.col(j));
    d.flux_distance[static_cast<std::size_t>(j)] = problem.distance(d.flux.points.col(j));
  }
  return d;
}

BoundaryWeights BoundaryWeights::penalty(const Discretization& disc, double beta_d, double beta_n) {
  const int fd = disc.field_dim();
  return {Eigen::MatrixXd::Zero(fd, disc.dirichlet.size()), Eigen::MatrixXd::Constant(fd, disc.dirichlet.size(), beta_d),
          Eigen::VectorXd::Zero(disc.flux.size()), Eigen::VectorXd::Constant(disc.flux.size(), beta_n)};
}

Evaluation evaluate(const diffnet::MlpParams& params, const Discretization& disc, const BoundaryWeights& w,
                    bool with_gradient) {
  const physics::Problem& problem = *disc.problem;
  const int fd = problem.field_dim();
  const Eigen::Index md = disc.dirichlet.size(), mn = disc.flux.size();
  if (w.lambda_d.rows() != fd || w.lambda_d.cols() != md || w.beta_d.rows() != fd || w.beta_d.cols() != md ||
      w.lambda_n.size() != mn || w.beta_n.size() != mn) {
    throw ShapeError("boundary weights do not match the boundary point sets");
  }
  if (params.input_dim() != problem.dim() || params.output_dim() != fd) {
    throw ShapeError("network shape does not match the problem dimensions");
  }

  Evaluation ev;
  const Eigen::Index np = params.size();
  ev.grad_interior = Eigen::VectorXd::Zero(with_gradient ? np : 0);
  ev.grad_dirichlet = ev.grad_interior;
  ev.grad_flux = ev.grad_interior;
  ev.interior_values.resize(fd, disc.interior.count());

  // Interior: 1/2 dV |G(u_hat) + f|^2.
  const double dv = disc.interior.delta_v;
  double interior = 0.0;
  sweep(params, problem.interior_order(), disc.interior.points, with_gradient ? &ev.grad_interior : nullptr,
        [&](Eigen::Index i, const JetValue& n, JetValue& seed) {
          const auto x = disc.interior.points.col(i);
          const ScalarJet& dist = disc.interior_distance[static_cast<std::size_t>(i)];
          const JetValue u = physics::apply_distance(n, dist);
          std::array<double, 3> r{};
          problem.apply_operator(u, x, r.data());
          double sq = 0.0;
          for (int k = 0; k < fd; ++k) {
            r[k] += disc.forcing(k, i);
            sq += r[k] * r[k];
            ev.interior_values(k, i) = u.value[k];
          }
          if (!std::isfinite(sq)) non_finite("interior", x);
          interior += 0.5 * dv * sq;
          if (!with_gradient) return;
          for (int k = 0; k < fd; ++k) r[k] *= dv;
          JetValue seed_u(n.outputs, n.inputs, n.order);
          problem.operator_adjoint(u, x, r.data(), seed_u);
          physics::distance_adjoint(seed_u, dist, seed);
        });
  ev.bundle.interior_loss = interior;

  // Dirichlet: c = u_hat - g.
  double boundary = 0.0;
  ev.bundle.dirichlet.resize(fd, md);
  ev.bundle.dirichlet_area = disc.dirichlet.areas;
  sweep(params, JetOrder::value, disc.dirichlet.points, with_gradient ? &ev.grad_dirichlet : nullptr,
        [&](Eigen::Index j, const JetValue& n, JetValue& seed) {
          const double a = disc.dirichlet.areas[j], dist = disc.dirichlet_distance[j];
          for (int k = 0; k < fd; ++k) {
            const double c = dist * n.value[k] - disc.dirichlet_data(k, j);
            if (!std::isfinite(c)) non_finite("Dirichlet", disc.dirichlet.points.col(j));
            ev.bundle.dirichlet(k, j) = c;
            boundary += a * (w.lambda_d(k, j) * c + 0.5 * w.beta_d(k, j) * c * c);
            seed.value[k] = a * (w.lambda_d(k, j) + w.beta_d(k, j) * c) * dist;
          }
        });

  // Flux region: Neumann or Robin gap.
  ev.bundle.flux.resize(mn);
  ev.bundle.flux_area = disc.flux.areas;
  sweep(params, JetOrder::gradient, disc.flux.points, with_gradient ? &ev.grad_flux : nullptr,
        [&](Eigen::Index j, const JetValue& n, JetValue& seed) {
          const auto normal = disc.flux.normals.col(j);
          const ScalarJet& dist = disc.flux_distance[static_cast<std::size_t>(j)];
          const JetValue u = physics::apply_distance(n, dist);
          const double c = physics::flux_residual(problem, u, normal, disc.flux_data[j]);
          if (!std::isfinite(c)) non_finite("flux", disc.flux.points.col(j));
          ev.bundle.flux[j] = c;
          const double a = disc.flux.areas[j];
          boundary += a * (w.lambda_n[j] * c + 0.5 * w.beta_n[j] * c * c);
          if (!with_gradient) return;
          JetValue seed_u(n.outputs, n.inputs, n.order);
          physics::flux_residual_adjoint(problem, u, normal, a * (w.lambda_n[j] + w.beta_n[j] * c), seed_u);
          physics::distance_adjoint(seed_u, dist, seed);
        });

  ev.objective = interior + boundary;
  return ev;
}

ResidualBundle assemble(const diffnet::MlpParams& params, const Discretization& disc) {
  return evaluate(params, disc, BoundaryWeights::penalty(disc, 0.0, 0.0), false).bundle;
}

Eigen::MatrixXd predict(const diffnet::MlpParams& params, const physics::Problem& problem,
                        const Eigen::Ref<const Eigen::MatrixXd>& points) {
  Eigen::MatrixXd out(problem.field_dim(), points.cols());
  const Eigen::MatrixXd pts = points;
  sweep(params, JetOrder::value, pts, nullptr, [&](Eigen::Index j, const JetValue& n, JetValue&) {
    const double d = problem.distance(pts.col(j)).value;
    for (int k = 0; k < problem.field_dim(); ++k) out(k, j) = d * n.value[k];
  });
  return out;
}

double hat_function(int i, int n, double x) {
  const double m = n + 1.0;
  return std::max(0.0, 1.0 - std::abs(x - i / m) * m);
}

namespace {

struct TrapezoidGrid {
  Eigen::MatrixXd x;  // 1 x Q
  Eigen::VectorXd weight;
};

TrapezoidGrid weak_form_grid(int n_test, int quad_points) {
  if (n_test < 1) throw PreconditionError("weak form needs at least one test function");
  if (quad_points < 2) throw PreconditionError("trapezoid rule needs at least two nodes");
  TrapezoidGrid g{Eigen::RowVectorXd::LinSpaced(quad_points, 0.0, 1.0),
                  Eigen::VectorXd::Constant(quad_points, 1.0 / (quad_points - 1))};
  g.weight[0] *= 0.5;
  g.weight[quad_points - 1] *= 0.5;
  return g;
}

// Strong bar residual (k u')' + 100 sin(pi x) of a field jet.
double bar_residual(const physics::Problem& bar, const JetValue& u, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double g = 0.0;
  bar.apply_operator(u, x, &g);
  return g + 100.0 * std::sin(std::numbers::pi * x[0]);
}

Eigen::VectorXd weak_moments(const TrapezoidGrid& g, const Eigen::VectorXd& r, int n_test) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n_test);
  for (int i = 1; i <= n_test; ++i) {
    for (Eigen::Index q = 0; q < r.size(); ++q) m[i - 1] += g.weight[q] * r[q] * hat_function(i, n_test, g.x(0, q));
  }
  return m;
}

}  // namespace

double weak_form_loss_1d(const diffnet::MlpParams& params, int n_test, int quad_points, Eigen::VectorXd* grad) {
  const TrapezoidGrid g = weak_form_grid(n_test, quad_points);
  if (params.input_dim() != 1 || params.output_dim() != 1) throw ShapeError("weak form expects a 1 -> 1 network");
  if (grad && grad->size() != params.size()) throw ShapeError("gradient has the wrong size");

  const auto bar = physics::make_problem("bar1d");
  std::vector<JetValue> jets(static_cast<std::size_t>(quad_points));
  Eigen::VectorXd r(quad_points);
  sweep(params, JetOrder::laplacian, g.x, nullptr, [&](Eigen::Index q, const JetValue& n, JetValue&) {
    const auto xq = g.x.col(q);
    jets[static_cast<std::size_t>(q)] = physics::apply_distance(n, bar->distance(xq));
    r[q] = bar_residual(*bar, jets[static_cast<std::size_t>(q)], xq);
  });
  const Eigen::VectorXd moments = weak_moments(g, r, n_test);
  const double loss = 0.5 * moments.squaredNorm();
  if (!std::isfinite(loss)) throw NumericError("weak form loss is not finite");
  if (!grad) return loss;

  // dL/dr_q = w_q sum_i m_i v_i(x_q)
  sweep(params, JetOrder::laplacian, g.x, grad, [&](Eigen::Index q, const JetValue& n, JetValue& seed) {
    const auto xq = g.x.col(q);
    double bar_r = 0.0;
    for (int i = 1; i <= n_test; ++i) bar_r += moments[i - 1] * hat_function(i, n_test, xq[0]);
    bar_r *= g.weight[q];
    JetValue seed_u(n.outputs, n.inputs, n.order);
    bar->operator_adjoint(jets[static_cast<std::size_t>(q)], xq, &bar_r, seed_u);
    physics::distance_adjoint(seed_u, bar->distance(xq), seed);
  });
  return loss;
}

double weak_form_loss_1d(const std::function<JetValue(double)>& field, int n_test, int quad_points) {
  const TrapezoidGrid g = weak_form_grid(n_test, quad_points);
  const auto bar = physics::make_problem("bar1d");
  Eigen::VectorXd r(quad_points);
  for (Eigen::Index q = 0; q < quad_points; ++q) r[q] = bar_residual(*bar, field(g.x(0, q)), g.x.col(q));
  return 0.5 * weak_moments(g, r, n_test).squaredNorm();
}

double bar_exact_solution(double x) { return physics::bar_exact(x).value[0]; }

}  // namespace alpinn::losses
