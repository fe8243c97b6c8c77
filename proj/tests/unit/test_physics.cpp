#include "doctest.h"

#include "alpinn/error.hpp"
#include "alpinn/physics.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace alpinn;
using namespace alpinn::physics;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

// Random point strictly inside the problem's bounding region, away from
// singular sets (pipe axis).
VectorXd random_point(const Problem& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  VectorXd x(p.dim());
  do {
    for (int i = 0; i < p.dim(); ++i) x[i] = p.name() == "disk2d" ? 2 * u(rng) - 1 : u(rng);
  } while (p.name() == "elastic_pipe" && std::hypot(x[1] - 0.5, x[2] - 0.5) < 0.05);
  return x;
}

// Perturbs one jet entry, identified by a flat index over the entries the
// order carries: value, grad, lap, hess (upper triangle, applied symmetrically).
struct Entry {
  int kind, k, i, j;
};

std::vector<Entry> entries(const JetValue& u) {
  std::vector<Entry> e;
  for (int k = 0; k < u.outputs; ++k) {
    e.push_back({0, k, 0, 0});
    if (u.has_gradient()) {
      for (int i = 0; i < u.inputs; ++i) e.push_back({1, k, i, 0});
    }
    if (u.order == JetOrder::laplacian) e.push_back({2, k, 0, 0});
    if (u.has_hessian()) {
      for (int i = 0; i < u.inputs; ++i)
        for (int j = i; j < u.inputs; ++j) e.push_back({3, k, i, j});
    }
  }
  return e;
}

void bump(JetValue& u, const Entry& e, double h) {
  switch (e.kind) {
    case 0: u.value[e.k] += h; break;
    case 1: u.grad[e.k][e.i] += h; break;
    case 2: u.lap[e.k] += h; break;
    default:
      u.hess[e.k][e.i][e.j] += h;
      if (e.i != e.j) u.hess[e.k][e.j][e.i] += h;
      if (e.i == e.j) u.lap[e.k] += h;
  }
}

double seed_of(const JetValue& s, const Entry& e) {
  switch (e.kind) {
    case 0: return s.value[e.k];
    case 1: return s.grad[e.k][e.i];
    case 2: return s.lap[e.k];
    default: return e.i == e.j ? s.hess[e.k][e.i][e.i] + s.lap[e.k] : s.hess[e.k][e.i][e.j] + s.hess[e.k][e.j][e.i];
  }
}

JetValue random_jet(int outputs, int inputs, JetOrder order, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  JetValue u(outputs, inputs, order);
  for (int k = 0; k < outputs; ++k) {
    u.value[k] = n(rng);
    for (int i = 0; i < inputs; ++i) {
      u.grad[k][i] = n(rng);
      for (int j = i; j < inputs; ++j) u.hess[k][i][j] = u.hess[k][j][i] = n(rng);
    }
    u.lap[k] = 0;
    if (order == JetOrder::hessian) {
      for (int i = 0; i < inputs; ++i) u.lap[k] += u.hess[k][i][i];
    } else {
      u.lap[k] = n(rng);
    }
  }
  return u;
}

// Checks the adjoint of a linear functional L(u) = sum_k bar_k F_k(u) against
// central differences in every jet entry.
void check_adjoint(const std::function<double(const JetValue&)>& functional, const JetValue& u,
                   const JetValue& seed) {
  for (const Entry& e : entries(u)) {
    const double h = 1e-6;
    JetValue up = u, dn = u;
    bump(up, e, h);
    bump(dn, e, -h);
    const double fd = (functional(up) - functional(dn)) / (2 * h);
    REQUIRE(seed_of(seed, e) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

}  // namespace

TEST_CASE("ElasticMaterial") {
  const ElasticMaterial m(1.0, 0.3);
  CHECK(m.lame_lambda() == doctest::Approx(0.576923).epsilon(1e-6));
  CHECK(m.lame_mu() == doctest::Approx(0.384615).epsilon(1e-6));
  CHECK_THROWS_AS(ElasticMaterial(1.0, 0.5), MaterialError);
  CHECK_THROWS_AS(ElasticMaterial(1.0, -1.0), MaterialError);
  CHECK_THROWS_AS(ElasticMaterial(0.0, 0.3), MaterialError);
}

TEST_CASE("residual operators: trivial fields") {
  SUBCASE("Fisher-KPP zero and unit fields") {
    JetValue u(1, 3, JetOrder::laplacian);
    CHECK(residual_fisher_kpp(u, 0.5, 0.0) == 0.0);
    u.value[0] = 1.0;
    CHECK(residual_fisher_kpp(u, 0.5, 0.0) == 0.0);
  }
  SUBCASE("graded heat") {
    JetValue u(1, 3, JetOrder::laplacian);
    u.value[0] = 0.3;
    u.grad[0][0] = 2.0;  // linear in x1
    CHECK(residual_graded_heat(u, vec({0.2, 0.4, 0.9}), 0.0) == 0.0);
    JetValue z(1, 3, JetOrder::laplacian);
    z.grad[0][2] = 1.0;  // u = x3
    CHECK(residual_graded_heat(z, vec({0.2, 0.4, 0.9}), -1.0) == 0.0);
  }
  SUBCASE("rigid translation") {
    JetValue u(3, 3, JetOrder::hessian);
    u.value = {1.0, -2.0, 0.5};
    const Vec r = residual_elasticity(u, ElasticMaterial(1.0, 0.3), Vec{});
    CHECK(r == Vec{0, 0, 0});
  }
  SUBCASE("linear in f") {
    std::mt19937_64 rng(4);
    const JetValue u = random_jet(1, 3, JetOrder::laplacian, rng);
    const VectorXd x = vec({0.1, 0.2, 0.3});
    CHECK(residual_graded_heat(u, x, 1.5) - residual_graded_heat(u, x, 0.0) == doctest::Approx(1.5));
    CHECK(residual_fisher_kpp(u, 0.5, 2.0) - residual_fisher_kpp(u, 0.5, -1.0) == doctest::Approx(3.0));
  }
}

TEST_CASE("manufactured solutions match symbolic oracle values") {
  // Reference values from tests/oracles/manufactured.py (sympy, 30 digits).
  SUBCASE("disk2d") {
    const auto p = make_problem("disk2d");
    CHECK(p->exact(vec({0, 0})).value[0] == 0.0);
    CHECK(manufactured_forcing(*p, vec({0, 0}))[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(manufactured_forcing(*p, vec({0.3, -0.4}))[0] == doctest::Approx(-178.32584636797818).epsilon(1e-12));
  }
  SUBCASE("fisher_branch") {
    const auto p = make_problem("fisher_branch");
    const VectorXd x = vec({0.3, 0.45, 0.2});
    CHECK(p->exact(x).value[0] == doctest::Approx(4.2482386720478818).epsilon(1e-13));
    CHECK(manufactured_forcing(*p, x)[0] == doctest::Approx(829.85224884749239).epsilon(1e-12));
  }
  SUBCASE("heat_tabletop") {
    const auto p = make_problem("heat_tabletop");
    const VectorXd x = vec({0.3, 0.45, 0.7});
    CHECK(p->exact(x).value[0] == doctest::Approx(1.8114496766047310).epsilon(1e-13));
    CHECK(manufactured_forcing(*p, x)[0] == doctest::Approx(52.639714078717450).epsilon(1e-12));
    CHECK(p->exact(vec({0.25, 0.25, 1.0})).value[0] == doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("elastic_pipe") {
    const auto p = make_problem("elastic_pipe");
    const VectorXd x = vec({0.3, 0.75, 0.4});
    const JetValue u = p->exact(x);
    CHECK(u.value[0] == 0.0);
    CHECK(u.value[1] == doctest::Approx(1.3614655770255311).epsilon(1e-13));
    CHECK(u.value[2] == doctest::Approx(-0.54458623081021244).epsilon(1e-13));
    const Vec f = manufactured_forcing(*p, x);
    CHECK(f[0] == doctest::Approx(-35.856301035040461).epsilon(1e-12));
    CHECK(f[1] == doctest::Approx(-70.669479451324785).epsilon(1e-12));
    CHECK(f[2] == doctest::Approx(28.267791780529910).epsilon(1e-12));
  }
  SUBCASE("bar1d") {
    CHECK(bar_exact(0.0).value[0] == 0.0);
    CHECK(std::abs(bar_exact(1.0).value[0]) < 1e-8);
    CHECK(bar_exact(0.25).value[0] == doctest::Approx(7.892658795984118).epsilon(1e-10));
    CHECK(bar_exact(0.5).value[0] == doctest::Approx(11.700594904062185).epsilon(1e-10));
    CHECK(bar_exact(0.75).value[0] == doctest::Approx(8.634009374241653).epsilon(1e-10));
  }
}

TEST_CASE("manufactured derivatives agree with finite differences") {
  std::mt19937_64 rng(17);
  for (const auto& name : problem_names()) {
    CAPTURE(name);
    const auto p = make_problem(name);
    const int trials = name == "bar1d" ? 5 : 40;
    for (int t = 0; t < trials; ++t) {
      const VectorXd x = random_point(*p, rng);
      const JetValue u = p->exact(x);
      for (int i = 0; i < p->dim(); ++i) {
        const double h = 1e-5;
        VectorXd a = x, b = x;
        a[i] += h;
        b[i] -= h;
        const JetValue ua = p->exact(a), ub = p->exact(b);
        for (int k = 0; k < p->field_dim(); ++k) {
          const double scale = 1.0 + std::abs(u.grad[k][i]);
          REQUIRE(std::abs((ua.value[k] - ub.value[k]) / (2 * h) - u.grad[k][i]) < 1e-6 * scale);
          for (int j = 0; j < p->dim(); ++j) {
            const double hs = 1.0 + std::abs(u.hess[k][i][j]);
            REQUIRE(std::abs((ua.grad[k][j] - ub.grad[k][j]) / (2 * h) - u.hess[k][i][j]) < 1e-5 * hs);
          }
        }
      }
    }
  }
}

TEST_CASE("exact solutions cancel the residual at 1000 random points") {
  std::mt19937_64 rng(99);
  for (const std::string name : {"disk2d", "fisher_branch", "heat_tabletop", "elastic_pipe"}) {
    CAPTURE(name);
    const auto p = make_problem(name);
    for (int t = 0; t < 1000; ++t) {
      const VectorXd x = random_point(*p, rng);
      const Vec f = manufactured_forcing(*p, x);
      const JetValue u = p->exact(x);
      double norm2 = 0.0;
      if (name == "fisher_branch") {
        norm2 = std::pow(residual_fisher_kpp(u, 0.5, f[0]), 2);
      } else if (name == "heat_tabletop") {
        norm2 = std::pow(residual_graded_heat(u, x, f[0]), 2);
      } else if (name == "elastic_pipe") {
        const Vec r = residual_elasticity(u, ElasticMaterial(1.0, 0.3), f);
        norm2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
      } else {
        norm2 = std::pow(u.lap[0] + f[0], 2);
      }
      REQUIRE(std::sqrt(norm2) < 1e-9);
    }
  }
}

TEST_CASE("operator adjoints agree with finite differences") {
  std::mt19937_64 rng(5);
  for (const auto& name : problem_names()) {
    CAPTURE(name);
    const auto p = make_problem(name);
    for (int t = 0; t < 10; ++t) {
      const VectorXd x = random_point(*p, rng);
      const JetValue u = random_jet(p->field_dim(), p->dim(), p->interior_order(), rng);
      std::array<double, 3> bar{};
      std::normal_distribution<double> n;
      for (int k = 0; k < p->field_dim(); ++k) bar[k] = n(rng);
      JetValue seed(u.outputs, u.inputs, u.order);
      p->operator_adjoint(u, x, bar.data(), seed);
      check_adjoint(
          [&](const JetValue& v) {
            std::array<double, 3> g{};
            p->apply_operator(v, x, g.data());
            return bar[0] * g[0] + bar[1] * g[1] + bar[2] * g[2];
          },
          u, seed);
    }
  }
}

TEST_CASE("Robin flux data and residual") {
  const auto p = make_problem("heat_tabletop");
  CHECK(p->flux_kind() == FluxKind::robin);
  CHECK(p->emissivity() == 0.1);
  // u = 1 with zero normal derivative: pick x3 = 0.5 and x1 = x2 = 0 (sines vanish),
  // normal orthogonal to grad u = (.., .., 2).
  const VectorXd s = vec({0.0, 0.0, 0.5});
  CHECK(p->exact(s).value[0] == doctest::Approx(1.0));
  const VectorXd n = vec({1.0, 0.0, 0.0});
  CHECK(robin_flux_data(*p, s, n) == doctest::Approx(-0.1).epsilon(1e-12));

  // The exact solution satisfies its own Robin condition.
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const VectorXd x = random_point(*p, rng);
    VectorXd normal = random_point(*p, rng).array() - 0.5;
    normal.normalize();
    const double q = flux_data(*p, x, normal);
    CHECK(std::abs(flux_residual(*p, p->exact(x), normal, q)) < 1e-12);
  }

  // Adjoint of the Robin gap.
  const JetValue u = random_jet(1, 3, JetOrder::gradient, rng);
  const VectorXd normal = vec({0.6, 0.0, 0.8});
  JetValue seed(1, 3, JetOrder::gradient);
  flux_residual_adjoint(*p, u, normal, 1.3, seed);
  check_adjoint([&](const JetValue& v) { return 1.3 * flux_residual(*p, v, normal, 0.2); }, u, seed);
}

TEST_CASE("sigma = 0 and constant field give zero flux data") {
  ProblemOptions o;
  o.heat_sigma = 0.0;
  const auto p = make_problem("heat_tabletop", o);
  // x3 direction carries the only gradient at x1 = x2 = 0; use a tangential normal.
  CHECK(std::abs(robin_flux_data(*p, vec({0.0, 0.0, 0.3}), vec({0.0, 1.0, 0.0}))) < 1e-12);
}

TEST_CASE("distance factor product rule") {
  SUBCASE("vanishes where D does") {
    const auto heat = make_problem("heat_tabletop");
    const auto params = diffnet::init_mlp({3, 8, 8, 1}, 1);
    CHECK(discretized_solution(params, *heat, vec({0.3, 0.6, 0.0})).value[0] == 0.0);
    const auto pipe = make_problem("elastic_pipe");
    const auto vparams = diffnet::init_mlp({3, 8, 8, 3}, 2);
    const JetValue u = discretized_solution(vparams, *pipe, vec({0.0, 0.6, 0.2}));
    for (int k = 0; k < 3; ++k) CHECK(u.value[k] == 0.0);
  }
  SUBCASE("identity factor") {
    const auto disk = make_problem("disk2d");
    const auto params = diffnet::init_mlp({2, 8, 8, 1}, 3);
    const VectorXd x = vec({0.2, -0.3});
    const JetValue a = discretized_solution(params, *disk, x), b = diffnet::jet(params, x, 2);
    CHECK(a.value == b.value);
    CHECK(a.grad == b.grad);
    CHECK(a.hess == b.hess);
  }
  SUBCASE("matches finite differences of D N") {
    std::mt19937_64 rng(8);
    for (const std::string name : {"fisher_branch", "heat_tabletop", "elastic_pipe", "bar1d"}) {
      CAPTURE(name);
      const auto p = make_problem(name);
      const auto params = diffnet::init_mlp({p->dim(), 10, 10, p->field_dim()}, 11);
      auto value = [&](const VectorXd& y) {
        return (p->distance(y).value * diffnet::forward(params, y)).eval();
      };
      for (int t = 0; t < 10; ++t) {
        const VectorXd x = random_point(*p, rng);
        const JetValue u = discretized_solution(params, *p, x);
        for (int i = 0; i < p->dim(); ++i) {
          const double h = 1e-5;
          VectorXd a = x, b = x;
          a[i] += h;
          b[i] -= h;
          const VectorXd g = (value(a) - value(b)) / (2 * h);
          const JetValue ua = discretized_solution(params, *p, a), ub = discretized_solution(params, *p, b);
          for (int k = 0; k < p->field_dim(); ++k) {
            REQUIRE(u.grad[k][i] == doctest::Approx(g[k]).epsilon(1e-5).scale(1.0));
            for (int j = 0; j < p->dim(); ++j) {
              const double hfd = (ua.grad[k][j] - ub.grad[k][j]) / (2 * h);
              REQUIRE(u.hess[k][i][j] == doctest::Approx(hfd).epsilon(1e-5).scale(1.0));
            }
          }
        }
        double trace = 0.0;
        for (int i = 0; i < p->dim(); ++i) trace += u.hess[0][i][i];
        CHECK(u.lap[0] == doctest::Approx(trace).epsilon(1e-12));
      }
    }
  }
  SUBCASE("adjoint is the transpose") {
    std::mt19937_64 rng(21);
    const auto p = make_problem("fisher_branch");
    for (JetOrder order : {JetOrder::value, JetOrder::gradient, JetOrder::laplacian, JetOrder::hessian}) {
      const VectorXd x = random_point(*p, rng);
      const ScalarJet d = p->distance(x);
      const JetValue n = random_jet(2, 3, order, rng);
      const JetValue s = random_jet(2, 3, order, rng);
      JetValue seed_n(2, 3, order);
      distance_adjoint(s, d, seed_n);
      // <s, A n> is linear in n; its gradient is the seed.
      check_adjoint(
          [&](const JetValue& v) {
            const JetValue u = apply_distance(v, d);
            double sum = 0.0;
            for (int k = 0; k < 2; ++k) {
              sum += s.value[k] * u.value[k];
              if (order >= JetOrder::gradient)
                for (int i = 0; i < 3; ++i) sum += s.grad[k][i] * u.grad[k][i];
              if (order >= JetOrder::laplacian) sum += s.lap[k] * u.lap[k];
              if (order == JetOrder::hessian)
                for (int i = 0; i < 3; ++i)
                  for (int j = 0; j < 3; ++j) sum += s.hess[k][i][j] * u.hess[k][i][j];
            }
            return sum;
          },
          n, seed_n);
    }
  }
}

TEST_CASE("problem catalog") {
  CHECK(problem_names().size() == 6);
  CHECK_THROWS_AS(make_problem("unknown"), ConfigError);
  for (const auto& name : problem_names()) {
    const auto p = make_problem(name);
    CHECK(p->name() == name);
  }
  const auto pipe = make_problem("elastic_pipe");
  CHECK(pipe->field_dim() == 3);
  CHECK(pipe->interior_order() == JetOrder::hessian);
  ProblemOptions bad;
  bad.poisson_ratio = 0.6;
  CHECK_THROWS_AS(make_problem("elastic_pipe", bad), MaterialError);
}

TEST_CASE("catalog grids") {
  SUBCASE("disk2d") {
    const auto g = make_problem("disk2d")->build_grids(100);
    CHECK(g.boundary.dirichlet.size() == 500);
    CHECK(g.boundary.flux.empty());
    CHECK(g.interior.delta_v == doctest::Approx(std::pow(2.0 / 99, 2)).epsilon(1e-14));
    CHECK(g.interior.count() * g.interior.delta_v == doctest::Approx(M_PI).epsilon(0.01));
  }
  SUBCASE("heat_tabletop regions") {
    const auto g = make_problem("heat_tabletop")->build_grids(30);
    CHECK(g.boundary.dirichlet.size() > 0);
    CHECK(g.boundary.flux.size() > 0);
    for (Eigen::Index k = 0; k < g.boundary.dirichlet.size(); ++k) REQUIRE(g.boundary.dirichlet.points(2, k) < 0.5);
  }
  SUBCASE("pipe counts at n=75") {
    const auto g = make_problem("elastic_pipe")->build_grids(75);
    CHECK(std::abs(g.interior.count() - 83164) <= 0.02 * 83164);
    CHECK(std::abs(g.boundary.dirichlet.size() - 45168) <= 0.02 * 45168);
  }
}
