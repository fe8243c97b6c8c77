#pragma once

#include "alpinn/diffnet.hpp"
#include "alpinn/geometry.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alpinn::physics {

using diffnet::JetOrder;
using diffnet::JetValue;
using diffnet::kMaxDim;
using Point = Eigen::Ref<const Eigen::VectorXd>;
using Vec = std::array<double, kMaxDim>;
using Mat = std::array<Vec, kMaxDim>;

/// Value, gradient and Hessian of a scalar function at a point.
struct ScalarJet {
  double value = 1.0;
  Vec grad{};
  Mat hess{};

  double laplacian(int dim) const;
};

/// Isotropic linear elastic material.
class ElasticMaterial {
 public:
  /// Throws MaterialError unless E > 0 and -1 < nu < 0.5.
  ElasticMaterial(double youngs_modulus, double poisson_ratio);

  double youngs_modulus() const noexcept { return e_; }
  double poisson_ratio() const noexcept { return nu_; }
  double lame_lambda() const noexcept { return e_ * nu_ / ((1 + nu_) * (1 - 2 * nu_)); }
  double lame_mu() const noexcept { return e_ / (2 * (1 + nu_)); }

 private:
  double e_;
  double nu_;
};

enum class FluxKind { neumann, robin };

/// Interior and boundary quadrature for one problem.
struct Grids {
  geometry::InteriorGrid interior;
  geometry::BoundaryPartition boundary;
  std::optional<geometry::SurfaceMesh> mesh;  // when built by marching cubes
};

/// A boundary value problem G(u) + f = 0 with a manufactured solution.
///
/// The discretized field is u_hat = D(x) N(x). Dirichlet data g is the exact
/// solution on the Dirichlet region; flux data is derived from it on the
/// flux region (Neumann: t = grad u . n, Robin: q = -grad u . n - sigma u^4).
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int field_dim() const { return 1; }
  /// Derivatives the interior operator needs from the field.
  virtual JetOrder interior_order() const { return JetOrder::laplacian; }

  /// Distance factor D; identity unless overridden.
  virtual ScalarJet distance(const Point& x) const;

  virtual bool has_exact() const { return true; }
  /// Manufactured solution with gradient and Hessian. Throws Unsupported if absent.
  virtual JetValue exact(const Point& x) const = 0;

  /// out[k] = G(u)_k at x.
  virtual void apply_operator(const JetValue& u, const Point& x, double* out) const = 0;
  /// Adds sum_k bar[k] dG_k/du into seed.
  virtual void operator_adjoint(const JetValue& u, const Point& x, const double* bar, JetValue& seed) const = 0;

  virtual geometry::Region region(const Point& /*x*/) const { return geometry::Region::dirichlet; }
  virtual FluxKind flux_kind() const { return FluxKind::neumann; }
  /// Robin radiation coefficient sigma.
  virtual double emissivity() const { return 0.0; }

  virtual int default_resolution() const = 0;
  /// Quadrature grids at background resolution n.
  virtual Grids build_grids(int n) const = 0;
  /// Level set of the domain, if it has one in 3D.
  virtual std::optional<geometry::LevelSet> level_set() const { return std::nullopt; }
};

/// Tunable constants of the catalog problems.
struct ProblemOptions {
  double fisher_mu = 1.0;
  double fisher_rate = 0.5;
  double heat_sigma = 0.1;
  double pipe_r1 = 0.175;
  double pipe_r2 = 0.295;
  double pipe_a = 0.22;
  double pipe_u0 = 25.0;
  double youngs_modulus = 1.0;
  double poisson_ratio = 0.3;
  int disk_boundary_points = 500;
  double sphere_radius = 0.4;
};

/// Names accepted by make_problem.
const std::vector<std::string>& problem_names();

/// Catalog lookup: bar1d, disk2d, fisher_branch, heat_tabletop,
/// elastic_pipe, sphere_check. Throws ConfigError on an unknown name.
std::unique_ptr<Problem> make_problem(std::string_view name, const ProblemOptions& options = {});

/// Bar stiffness k(x) = 1 + sin(20 pi x) / 2.
double bar_stiffness(double x);
/// Exact bar displacement for (k u')' + 100 sin(pi x) = 0, u(0) = u(1) = 0,
/// with first and second derivatives, by adaptive quadrature.
JetValue bar_exact(double x);

// Pointwise residuals ------------------------------------------------------

/// mu * lap u + r u (1 - u) + f.
double residual_fisher_kpp(const JetValue& u, double rate, double f, double mu = 1.0);
/// (1 + x3) lap u + du/dx3 + f.
double residual_graded_heat(const JetValue& u, const Point& x, double f);
/// (lambda + mu) grad(div u) + mu lap u + f. Needs Hessians of all 3 components.
Vec residual_elasticity(const JetValue& u, const ElasticMaterial& material, const Vec& f);

/// f = -G(u_exact)(x). Throws Unsupported without a manufactured solution.
Vec manufactured_forcing(const Problem& problem, const Point& x);

/// q = -grad u . n - sigma u^4 from the exact solution at s.
double robin_flux_data(const Problem& problem, const Point& s, const Point& normal);
/// Neumann or Robin data for the problem's flux kind.
double flux_data(const Problem& problem, const Point& s, const Point& normal);

/// Neumann: grad u . n - t. Robin: -grad u . n - q - sigma u^4.
double flux_residual(const Problem& problem, const JetValue& u, const Point& normal, double data);
void flux_residual_adjoint(const Problem& problem, const JetValue& u, const Point& normal, double bar,
                           JetValue& seed);

// Distance-factor product rule --------------------------------------------

/// Jet of D * N from the jet of N, same order as n.
JetValue apply_distance(const JetValue& n, const ScalarJet& d);
/// Transpose of apply_distance: maps a seed on D * N to a seed on N (added).
void distance_adjoint(const JetValue& seed_u, const ScalarJet& d, JetValue& seed_n);

/// u_hat = D N and its derivatives at x. order as in diffnet::jet (1 or 2).
JetValue discretized_solution(const diffnet::MlpParams& params, const Problem& problem, const Point& x,
                              int order = 2);

}  // namespace alpinn::physics
