#include "app/config.hpp"
#include "app/runs.hpp"

#include "alpinn/diffnet.hpp"
#include "alpinn/error.hpp"
#include "alpinn/geometry.hpp"
#include "alpinn/metrics.hpp"
#include "alpinn/physics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace alpinn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

app::RunConfig config_from(const py::dict& d) {
  const nlohmann::json j = py_to_json(d);
  std::string base = "fisher_branch";
  if (j.contains("preset")) base = j["preset"].get<std::string>();
  else if (j.contains("problem")) base = j["problem"].get<std::string>();
  return app::merge(app::preset(base), j);
}

py::dict history_dict(const std::vector<enforce::HistoryRow>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXi epoch(n), outer(n);
  VectorXd objective(n), grad(n), b(n), i(n), beta(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    epoch[k] = static_cast<int>(r.epoch);
    outer[k] = r.outer_iter;
    objective[k] = r.objective;
    grad[k] = r.grad_norm;
    b[k] = r.boundary_error;
    i[k] = r.interior_error;
    beta[k] = r.beta_max;
  }
  py::dict d;
  d["epoch"] = epoch;
  d["outer_iter"] = outer;
  d["objective"] = objective;
  d["grad_norm"] = grad;
  d["boundary_error"] = b;
  d["interior_error"] = i;
  d["beta_max"] = beta;
  return d;
}

py::dict surface_dict(const geometry::SurfacePoints& s) {
  py::dict d;
  d["points"] = s.points;
  d["normals"] = s.normals;
  d["areas"] = s.areas;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Boundary-condition enforcement for physics-informed neural networks";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "AlpinnError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergedError>(m, "DivergedError", PyExc_ArithmeticError);

  m.def("problem_names", &physics::problem_names);

  m.def("preset", [](const std::string& name) { return json_to_py(app::to_json(app::preset(name))); },
        py::arg("name"), "Reference settings of a catalog problem as a dict.");

  m.def(
      "train",
      [](const py::dict& config) {
        const app::RunConfig c = config_from(config);
        app::Training t;
        {
          py::gil_scoped_release release;
          t = app::train(c);
        }
        py::dict d;
        d["status"] = t.status();
        d["converged"] = t.converged();
        d["epochs"] = t.epochs();
        d["interior_error"] = t.interior_error;
        d["boundary_error"] = t.boundary_error;
        d["outer_iterations"] = t.outer_iterations;
        d["beta_max"] = t.beta_max;
        d["params"] = t.params.flat();
        d["layer_sizes"] = t.params.layer_sizes();
        d["history"] = history_dict(t.history);
        if (!t.message.empty()) d["message"] = t.message;
        return d;
      },
      py::arg("config"), "Trains a network; config holds the JSON run-configuration keys.");

  m.def(
      "grids",
      [](const std::string& name, int n) {
        const auto p = physics::make_problem(name);
        const physics::Grids g = p->build_grids(n);
        py::dict d;
        d["interior"] = g.interior.points;
        d["delta_v"] = g.interior.delta_v;
        d["dirichlet"] = surface_dict(g.boundary.dirichlet);
        d["flux"] = surface_dict(g.boundary.flux);
        return d;
      },
      py::arg("problem"), py::arg("n"));

  m.def(
      "marching_cubes",
      [](const std::function<double(const VectorXd&)>& phi, int n, double lo, double hi) {
        const geometry::LevelSet ls{[&phi](const Eigen::Ref<const VectorXd>& x) { return phi(VectorXd(x)); },
                                    geometry::Box::cube(3, lo, hi)};
        const geometry::SurfaceMesh mesh = geometry::marching_cubes(ls, n);
        Eigen::MatrixXi faces(static_cast<Eigen::Index>(mesh.faces.size()), 3);
        for (std::size_t f = 0; f < mesh.faces.size(); ++f)
          for (int k = 0; k < 3; ++k) faces(static_cast<Eigen::Index>(f), k) = mesh.faces[f][static_cast<std::size_t>(k)];
        py::dict d;
        d["vertices"] = MatrixXd(mesh.vertices.transpose());
        d["faces"] = faces;
        d["centroids"] = MatrixXd(mesh.centroids.transpose());
        d["normals"] = MatrixXd(mesh.normals.transpose());
        d["areas"] = mesh.areas;
        return d;
      },
      py::arg("phi"), py::arg("n"), py::arg("lo") = 0.0, py::arg("hi") = 1.0,
      "Triangulates the zero set of phi on an n^3 grid of the cube [lo, hi]^3.");

  m.def(
      "init_mlp",
      [](std::vector<int> layers, std::uint64_t seed) { return VectorXd(diffnet::init_mlp(std::move(layers), seed).flat()); },
      py::arg("layer_sizes"), py::arg("seed"));

  m.def(
      "forward",
      [](std::vector<int> layers, const VectorXd& flat, const MatrixXd& x) {
        diffnet::MlpParams p(std::move(layers));
        if (flat.size() != p.size()) throw ShapeError("parameter vector has the wrong length");
        p.flat() = flat;
        MatrixXd out(x.rows(), p.output_dim());
        for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = diffnet::forward(p, x.row(i).transpose()).transpose();
        return out;
      },
      py::arg("layer_sizes"), py::arg("params"), py::arg("x"), "Network output for each row of x.");

  m.def(
      "exact",
      [](const std::string& name, const MatrixXd& x) {
        const auto p = physics::make_problem(name);
        MatrixXd out(x.rows(), p->field_dim());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const VectorXd xi = x.row(i).transpose();
          const auto u = p->exact(xi);
          for (int k = 0; k < p->field_dim(); ++k) out(i, k) = u.value[static_cast<std::size_t>(k)];
        }
        return out;
      },
      py::arg("problem"), py::arg("x"), "Manufactured solution at each row of x.");

  m.def(
      "relative_l1",
      [](const MatrixXd& approx, const MatrixXd& exact, const VectorXd& weights) {
        return metrics::relative_l1(approx.transpose(), exact.transpose(), weights);
      },
      py::arg("approx"), py::arg("exact"), py::arg("weights"),
      "sum w |approx - exact| / sum w |exact| with one point per row.");
}
