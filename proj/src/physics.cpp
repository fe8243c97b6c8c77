#include "alpinn/physics.hpp"

#include "alpinn/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace alpinn::physics {

namespace {

constexpr double kPi = std::numbers::pi;
using geometry::Region;

// sin(a pi x) sin(b pi x) with first and second derivatives.
struct Fn1 {
  double v, d, dd;
};

Fn1 sine_product(double a, double b, double x) {
  const double sa = std::sin(a * kPi * x), ca = std::cos(a * kPi * x);
  const double sb = std::sin(b * kPi * x), cb = std::cos(b * kPi * x);
  return {sa * sb, kPi * (a * ca * sb + b * sa * cb), kPi * kPi * (-(a * a + b * b) * sa * sb + 2 * a * b * ca * cb)};
}

Fn1 sine(double x) {
  const double s = std::sin(kPi * x), c = std::cos(kPi * x);
  return {s, kPi * c, -kPi * kPi * s};
}

// Jet of scale * f0(x0) f1(x1) f2(x2).
ScalarJet separable(const std::array<Fn1, 3>& f, double scale) {
  ScalarJet out;
  auto pick = [&](int axis, int order) { return order == 0 ? f[axis].v : order == 1 ? f[axis].d : f[axis].dd; };
  auto term = [&](std::array<int, 3> orders) {
    return scale * pick(0, orders[0]) * pick(1, orders[1]) * pick(2, orders[2]);
  };
  out.value = term({0, 0, 0});
  for (int i = 0; i < 3; ++i) {
    std::array<int, 3> o{};
    o[i] = 1;
    out.grad[i] = term(o);
    for (int j = 0; j < 3; ++j) {
      std::array<int, 3> h{};
      ++h[i];
      ++h[j];
      out.hess[i][j] = term(h);
    }
  }
  return out;
}

JetValue scalar_field(const ScalarJet& s, int dim) {
  JetValue u(1, dim, JetOrder::hessian);
  u.value[0] = s.value;
  for (int i = 0; i < dim; ++i) {
    u.grad[0][i] = s.grad[i];
    for (int j = 0; j < dim; ++j) u.hess[0][i][j] = s.hess[i][j];
  }
  u.lap[0] = s.laplacian(dim);
  return u;
}

Grids level_set_grids(const Problem& p, int n) {
  const geometry::LevelSet ls = *p.level_set();
  Grids g;
  g.interior = geometry::interior_grid(ls, geometry::background_grid(n, ls.box));
  g.mesh = geometry::marching_cubes(ls, n);
  g.boundary = geometry::partition_boundary(geometry::surface_points(*g.mesh),
                                            [&p](const Point& x) { return p.region(x); });
  return g;
}

// Poisson: G(u) = lap u.
class PoissonBase : public Problem {
 public:
  void apply_operator(const JetValue& u, const Point&, double* out) const override { out[0] = u.lap[0]; }
  void operator_adjoint(const JetValue&, const Point&, const double* bar, JetValue& seed) const override {
    seed.lap[0] += bar[0];
  }
};

class Bar1d : public Problem {
 public:
  std::string name() const override { return "bar1d"; }
  int dim() const override { return 1; }
  ScalarJet distance(const Point& x) const override {
    const Fn1 s = sine(x[0]);
    ScalarJet d;
    d.value = s.v;
    d.grad[0] = s.d;
    d.hess[0][0] = s.dd;
    return d;
  }
  JetValue exact(const Point& x) const override { return bar_exact(x[0]); }
  // (k u')' = k u'' + k' u'
  void apply_operator(const JetValue& u, const Point& x, double* out) const override {
    out[0] = bar_stiffness(x[0]) * u.lap[0] + stiffness_slope(x[0]) * u.grad[0][0];
  }
  void operator_adjoint(const JetValue&, const Point& x, const double* bar, JetValue& seed) const override {
    seed.lap[0] += bar_stiffness(x[0]) * bar[0];
    seed.grad[0][0] += stiffness_slope(x[0]) * bar[0];
  }
  int default_resolution() const override { return 2001; }
  Grids build_grids(int n) const override {
    Grids g;
    const geometry::LevelSet ls{[](const Point& x) { return x[0] * (x[0] - 1.0); }, geometry::Box::unit(1)};
    g.interior = geometry::interior_grid(ls, geometry::background_grid(n, ls.box));
    g.boundary.dirichlet = {Eigen::MatrixXd(1, 0), Eigen::MatrixXd(1, 0), Eigen::VectorXd(0)};
    g.boundary.flux = g.boundary.dirichlet;
    return g;
  }

 private:
  static double stiffness_slope(double x) { return 10.0 * kPi * std::cos(20.0 * kPi * x); }
};

class Disk2d : public PoissonBase {
 public:
  explicit Disk2d(int boundary_points) : boundary_points_(boundary_points) {}
  std::string name() const override { return "disk2d"; }
  int dim() const override { return 2; }
  // u = 10 (x y + sin(pi x) sin(pi y) (1 - x^2 - y^2))
  JetValue exact(const Point& x) const override {
    const Fn1 a = sine(x[0]), b = sine(x[1]);
    const double p = a.v * b.v, px = a.d * b.v, py = a.v * b.d;
    const double pxx = a.dd * b.v, pyy = a.v * b.dd, pxy = a.d * b.d;
    const double q = 1 - x[0] * x[0] - x[1] * x[1], qx = -2 * x[0], qy = -2 * x[1];
    ScalarJet s;
    s.value = 10 * (x[0] * x[1] + p * q);
    s.grad[0] = 10 * (x[1] + px * q + p * qx);
    s.grad[1] = 10 * (x[0] + py * q + p * qy);
    s.hess[0][0] = 10 * (pxx * q + 2 * px * qx - 2 * p);
    s.hess[1][1] = 10 * (pyy * q + 2 * py * qy - 2 * p);
    s.hess[0][1] = s.hess[1][0] = 10 * (1 + pxy * q + px * qy + py * qx);
    return scalar_field(s, 2);
  }
  int default_resolution() const override { return 100; }
  Grids build_grids(int n) const override {
    Grids g;
    const geometry::LevelSet ls{[](const Point& x) { return x.squaredNorm() - 1.0; }, geometry::Box::cube(2, -1, 1)};
    g.interior = geometry::interior_grid(ls, geometry::background_grid(n, ls.box));
    g.boundary = geometry::partition_boundary(geometry::circle_boundary(boundary_points_, Eigen::Vector2d::Zero(), 1.0),
                                              [](const Point&) { return Region::dirichlet; });
    return g;
  }

 private:
  int boundary_points_;
};

class SphereCheck : public PoissonBase {
 public:
  explicit SphereCheck(double radius) : radius_(radius) {}
  std::string name() const override { return "sphere_check"; }
  int dim() const override { return 3; }
  // u = 1 + x y + sin(pi z)
  JetValue exact(const Point& x) const override {
    const Fn1 s = sine(x[2]);
    ScalarJet j;
    j.value = 1 + x[0] * x[1] + s.v;
    j.grad = {x[1], x[0], s.d};
    j.hess[0][1] = j.hess[1][0] = 1.0;
    j.hess[2][2] = s.dd;
    return scalar_field(j, 3);
  }
  int default_resolution() const override { return 75; }
  Grids build_grids(int n) const override { return level_set_grids(*this, n); }
  std::optional<geometry::LevelSet> level_set() const override {
    const double r2 = radius_ * radius_;
    return geometry::LevelSet{[r2](const Point& x) { return (x.array() - 0.5).square().sum() - r2; },
                              geometry::Box::unit(3)};
  }

 private:
  double radius_;
};

class FisherBranch : public Problem {
 public:
  FisherBranch(double mu, double rate) : mu_(mu), rate_(rate) {}
  std::string name() const override { return "fisher_branch"; }
  int dim() const override { return 3; }
  ScalarJet distance(const Point& x) const override { return separable({sine(x[0]), sine(x[1]), sine(x[2])}, 1.0); }
  // u = 10 sin(3 pi z) sin(2 pi x) sin(pi x) sin(pi y) sin(pi z)
  JetValue exact(const Point& x) const override {
    return scalar_field(separable({sine_product(2, 1, x[0]), sine(x[1]), sine_product(3, 1, x[2])}, 10.0), 3);
  }
  void apply_operator(const JetValue& u, const Point&, double* out) const override {
    out[0] = residual_fisher_kpp(u, rate_, 0.0, mu_);
  }
  void operator_adjoint(const JetValue& u, const Point&, const double* bar, JetValue& seed) const override {
    seed.lap[0] += mu_ * bar[0];
    seed.value[0] += rate_ * (1 - 2 * u.value[0]) * bar[0];
  }
  int default_resolution() const override { return 75; }
  Grids build_grids(int n) const override { return level_set_grids(*this, n); }
  std::optional<geometry::LevelSet> level_set() const override {
    return geometry::LevelSet{[](const Point& x) {
                                const double a = std::cos(2 * kPi * x[0]) - (1 - 2 * x[2]);
                                return a * a + 9 * (x[1] - 0.5) * (x[1] - 0.5) - 0.5;
                              },
                              geometry::Box::unit(3)};
  }

 private:
  double mu_;
  double rate_;
};

class HeatTabletop : public Problem {
 public:
  explicit HeatTabletop(double sigma) : sigma_(sigma) {}
  std::string name() const override { return "heat_tabletop"; }
  int dim() const override { return 3; }
  ScalarJet distance(const Point& x) const override {
    ScalarJet d;
    d.value = x[2];
    d.grad[2] = 1.0;
    return d;
  }
  // u = 2 z (1 + sin(2 pi x) sin(2 pi y))
  JetValue exact(const Point& x) const override {
    const double w = 2 * kPi;
    const double sx = std::sin(w * x[0]), cx = std::cos(w * x[0]);
    const double sy = std::sin(w * x[1]), cy = std::cos(w * x[1]);
    const double z = x[2];
    ScalarJet j;
    j.value = 2 * z * (1 + sx * sy);
    j.grad = {2 * z * w * cx * sy, 2 * z * w * sx * cy, 2 * (1 + sx * sy)};
    j.hess[0][0] = -2 * z * w * w * sx * sy;
    j.hess[1][1] = j.hess[0][0];
    j.hess[0][1] = j.hess[1][0] = 2 * z * w * w * cx * cy;
    j.hess[0][2] = j.hess[2][0] = 2 * w * cx * sy;
    j.hess[1][2] = j.hess[2][1] = 2 * w * sx * cy;
    return scalar_field(j, 3);
  }
  void apply_operator(const JetValue& u, const Point& x, double* out) const override {
    out[0] = residual_graded_heat(u, x, 0.0);
  }
  void operator_adjoint(const JetValue&, const Point& x, const double* bar, JetValue& seed) const override {
    seed.lap[0] += (1 + x[2]) * bar[0];
    seed.grad[0][2] += bar[0];
  }
  Region region(const Point& x) const override { return x[2] < 0.5 ? Region::dirichlet : Region::flux; }
  FluxKind flux_kind() const override { return FluxKind::robin; }
  double emissivity() const override { return sigma_; }
  int default_resolution() const override { return 75; }
  Grids build_grids(int n) const override { return level_set_grids(*this, n); }
  std::optional<geometry::LevelSet> level_set() const override {
    return geometry::LevelSet{[](const Point& x) {
                                const double z = 1 - 5 * x[2] * x[2];
                                const double a = std::cos(2 * kPi * x[0]) - z, b = std::cos(2 * kPi * x[1]) - z;
                                return a * a + 9 * (x[1] - 0.5) * (x[1] - 0.5) + b * b + 9 * (x[0] - 0.5) * (x[0] - 0.5) -
                                       3;
                              },
                              geometry::Box::unit(3)};
  }

 private:
  double sigma_;
};

class ElasticPipe : public Problem {
 public:
  explicit ElasticPipe(const ProblemOptions& o)
      : material_(o.youngs_modulus, o.poisson_ratio), u0_(o.pipe_u0), r1_(o.pipe_r1), r2_(o.pipe_r2), a_(o.pipe_a) {}
  std::string name() const override { return "elastic_pipe"; }
  int dim() const override { return 3; }
  int field_dim() const override { return 3; }
  JetOrder interior_order() const override { return JetOrder::hessian; }
  ScalarJet distance(const Point& x) const override {
    const Fn1 s = sine(x[0]);
    ScalarJet d;
    d.value = s.v;
    d.grad[0] = s.d;
    d.hess[0][0] = s.dd;
    return d;
  }
  // u = u0 sin(pi x) r (0, y - 1/2, z - 1/2), r the distance from the pipe axis.
  JetValue exact(const Point& x) const override {
    JetValue u(3, 3, JetOrder::hessian);
    const Fn1 s = sine(x[0]);
    const double y = x[1] - 0.5, z = x[2] - 0.5;
    const double r = std::hypot(y, z), r3 = r * r * r;
    for (int comp = 1; comp < 3; ++comp) {
      // c is the radial coordinate carried by this component, o the other one.
      const double c = comp == 1 ? y : z, o = comp == 1 ? z : y;
      const int ic = comp, io = comp == 1 ? 2 : 1;
      const double f = c * r;
      Vec g{};
      g[ic] = r + c * c / r;
      g[io] = c * o / r;
      Mat h{};
      h[ic][ic] = 3 * c / r - c * c * c / r3;
      h[ic][io] = h[io][ic] = o / r - c * c * o / r3;
      h[io][io] = c / r - c * o * o / r3;

      u.value[comp] = u0_ * s.v * f;
      u.grad[comp][0] = u0_ * s.d * f;
      u.grad[comp][ic] = u0_ * s.v * g[ic];
      u.grad[comp][io] = u0_ * s.v * g[io];
      u.hess[comp][0][0] = u0_ * s.dd * f;
      for (int j : {ic, io}) {
        u.hess[comp][0][j] = u.hess[comp][j][0] = u0_ * s.d * g[j];
        for (int k : {ic, io}) u.hess[comp][j][k] = u0_ * s.v * h[j][k];
      }
      u.lap[comp] = u.hess[comp][0][0] + u.hess[comp][1][1] + u.hess[comp][2][2];
    }
    return u;
  }
  void apply_operator(const JetValue& u, const Point&, double* out) const override {
    const Vec r = residual_elasticity(u, material_, Vec{});
    for (int k = 0; k < 3; ++k) out[k] = r[k];
  }
  void operator_adjoint(const JetValue&, const Point&, const double* bar, JetValue& seed) const override {
    const double lm = material_.lame_lambda() + material_.lame_mu(), mu = material_.lame_mu();
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) seed.hess[k][i][k] += lm * bar[i];
      for (int j = 0; j < 3; ++j) seed.hess[i][j][j] += mu * bar[i];
    }
  }
  int default_resolution() const override { return 75; }
  Grids build_grids(int n) const override { return level_set_grids(*this, n); }
  std::optional<geometry::LevelSet> level_set() const override {
    const double r1 = r1_, r2 = r2_, a = a_;
    return geometry::LevelSet{[=](const Point& x) {
                                const double rr = (x[2] - 0.5) * (x[2] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
                                const double bulge = a * a * std::exp(-100 * (x[0] - 0.5) * (x[0] - 0.5));
                                return (rr - r2 * r2 - bulge) * (rr - r1 * r1);
                              },
                              geometry::Box::unit(3)};
  }
  const ElasticMaterial& material() const noexcept { return material_; }

 private:
  ElasticMaterial material_;
  double u0_, r1_, r2_, a_;
};

}  // namespace

double ScalarJet::laplacian(int dim) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += hess[i][i];
  return s;
}

ElasticMaterial::ElasticMaterial(double youngs_modulus, double poisson_ratio)
    : e_(youngs_modulus), nu_(poisson_ratio) {
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) {
    throw MaterialError("Poisson ratio must lie in (-1, 0.5), got " + std::to_string(poisson_ratio));
  }
  if (!(youngs_modulus > 0.0)) throw MaterialError("Young's modulus must be positive");
}

ScalarJet Problem::distance(const Point&) const { return {}; }

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"bar1d",         "disk2d",       "fisher_branch",
                                              "heat_tabletop", "elastic_pipe", "sphere_check"};
  return names;
}

std::unique_ptr<Problem> make_problem(std::string_view name, const ProblemOptions& o) {
  if (name == "bar1d") return std::make_unique<Bar1d>();
  if (name == "disk2d") return std::make_unique<Disk2d>(o.disk_boundary_points);
  if (name == "fisher_branch") return std::make_unique<FisherBranch>(o.fisher_mu, o.fisher_rate);
  if (name == "heat_tabletop") return std::make_unique<HeatTabletop>(o.heat_sigma);
  if (name == "elastic_pipe") return std::make_unique<ElasticPipe>(o);
  if (name == "sphere_check") return std::make_unique<SphereCheck>(o.sphere_radius);
  throw ConfigError("problem: unknown name '" + std::string(name) + "'");
}

double bar_stiffness(double x) { return 1.0 + 0.5 * std::sin(20.0 * kPi * x); }

JetValue bar_exact(double x) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto load = [](double t) { return 100.0 / kPi * (1.0 - std::cos(kPi * t)); };
  // k u' = C - F(x); C fixed by u(1) = 0.
  static const double c = [&] {
    const double num = Quad::integrate([&](double t) { return load(t) / bar_stiffness(t); }, 0.0, 1.0, 20, 1e-13);
    const double den = Quad::integrate([](double t) { return 1.0 / bar_stiffness(t); }, 0.0, 1.0, 20, 1e-13);
    return num / den;
  }();
  const auto slope = [&](double t) { return (c - load(t)) / bar_stiffness(t); };

  JetValue u(1, 1, JetOrder::hessian);
  u.value[0] = x <= 0.0 ? 0.0 : Quad::integrate(slope, 0.0, x, 20, 1e-12);
  const double k = bar_stiffness(x), dk = 10.0 * kPi * std::cos(20.0 * kPi * x);
  u.grad[0][0] = slope(x);
  u.hess[0][0][0] = (-100.0 * std::sin(kPi * x) - dk * u.grad[0][0]) / k;
  u.lap[0] = u.hess[0][0][0];
  return u;
}

double residual_fisher_kpp(const JetValue& u, double rate, double f, double mu) {
  return mu * u.lap[0] + rate * u.value[0] * (1.0 - u.value[0]) + f;
}

double residual_graded_heat(const JetValue& u, const Point& x, double f) {
  return (1.0 + x[2]) * u.lap[0] + u.grad[0][2] + f;
}

Vec residual_elasticity(const JetValue& u, const ElasticMaterial& m, const Vec& f) {
  if (u.outputs != 3 || u.inputs != 3 || !u.has_hessian()) {
    throw ShapeError("elasticity needs the Hessian of a 3-component field in 3D");
  }
  const double lm = m.lame_lambda() + m.lame_mu(), mu = m.lame_mu();
  Vec r{};
  for (int i = 0; i < 3; ++i) {
    double grad_div = 0.0, lap = 0.0;
    for (int k = 0; k < 3; ++k) {
      grad_div += u.hess[k][i][k];
      lap += u.hess[i][k][k];
    }
    r[i] = lm * grad_div + mu * lap + f[i];
  }
  return r;
}

Vec manufactured_forcing(const Problem& problem, const Point& x) {
  if (!problem.has_exact()) throw Unsupported(problem.name() + " has no manufactured solution");
  Vec g{};
  problem.apply_operator(problem.exact(x), x, g.data());
  for (double& v : g) v = -v;
  return g;
}

double robin_flux_data(const Problem& problem, const Point& s, const Point& normal) {
  const JetValue u = problem.exact(s);
  double dn = 0.0;
  for (int i = 0; i < problem.dim(); ++i) dn += u.grad[0][i] * normal[i];
  return -dn - problem.emissivity() * std::pow(u.value[0], 4);
}

double flux_data(const Problem& problem, const Point& s, const Point& normal) {
  if (problem.field_dim() != 1) throw Unsupported("flux conditions are implemented for scalar fields only");
  if (problem.flux_kind() == FluxKind::robin) return robin_flux_data(problem, s, normal);
  const JetValue u = problem.exact(s);
  double dn = 0.0;
  for (int i = 0; i < problem.dim(); ++i) dn += u.grad[0][i] * normal[i];
  return dn;
}

double flux_residual(const Problem& problem, const JetValue& u, const Point& normal, double data) {
  double dn = 0.0;
  for (int i = 0; i < problem.dim(); ++i) dn += u.grad[0][i] * normal[i];
  if (problem.flux_kind() == FluxKind::neumann) return dn - data;
  return -dn - data - problem.emissivity() * std::pow(u.value[0], 4);
}

void flux_residual_adjoint(const Problem& problem, const JetValue& u, const Point& normal, double bar,
                           JetValue& seed) {
  const double sign = problem.flux_kind() == FluxKind::neumann ? 1.0 : -1.0;
  for (int i = 0; i < problem.dim(); ++i) seed.grad[0][i] += sign * normal[i] * bar;
  if (problem.flux_kind() == FluxKind::robin) {
    seed.value[0] -= 4.0 * problem.emissivity() * std::pow(u.value[0], 3) * bar;
  }
}

JetValue apply_distance(const JetValue& n, const ScalarJet& d) {
  JetValue u = n;
  const int dim = n.inputs;
  for (int k = 0; k < n.outputs; ++k) {
    const double v = n.value[k];
    u.value[k] = d.value * v;
    if (!n.has_gradient()) continue;
    for (int i = 0; i < dim; ++i) u.grad[k][i] = d.value * n.grad[k][i] + v * d.grad[i];
    if (!n.has_laplacian()) continue;
    double cross = 0.0;
    for (int i = 0; i < dim; ++i) cross += d.grad[i] * n.grad[k][i];
    u.lap[k] = d.value * n.lap[k] + 2.0 * cross + v * d.laplacian(dim);
    if (!n.has_hessian()) continue;
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        u.hess[k][i][j] = d.value * n.hess[k][i][j] + d.grad[i] * n.grad[k][j] + n.grad[k][i] * d.grad[j] +
                          v * d.hess[i][j];
      }
    }
  }
  return u;
}

void distance_adjoint(const JetValue& s, const ScalarJet& d, JetValue& out) {
  const int dim = s.inputs;
  for (int k = 0; k < s.outputs; ++k) {
    double value_bar = d.value * s.value[k];
    if (s.has_gradient()) {
      for (int i = 0; i < dim; ++i) {
        value_bar += d.grad[i] * s.grad[k][i];
        out.grad[k][i] += d.value * s.grad[k][i];
      }
    }
    if (s.has_laplacian()) {
      value_bar += d.laplacian(dim) * s.lap[k];
      out.lap[k] += d.value * s.lap[k];
      for (int i = 0; i < dim; ++i) out.grad[k][i] += 2.0 * d.grad[i] * s.lap[k];
    }
    if (s.has_hessian()) {
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          const double h = s.hess[k][i][j];
          value_bar += d.hess[i][j] * h;
          out.hess[k][i][j] += d.value * h;
          out.grad[k][j] += d.grad[i] * h;
          out.grad[k][i] += d.grad[j] * h;
        }
      }
    }
    out.value[k] += value_bar;
  }
}

JetValue discretized_solution(const diffnet::MlpParams& params, const Problem& problem, const Point& x, int order) {
  return apply_distance(diffnet::jet(params, x, order), problem.distance(x));
}

}  // namespace alpinn::physics
