#include "alpinn/geometry.hpp"

#include "alpinn/error.hpp"
#include "marching_cubes_tables.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace alpinn::geometry {

namespace {

constexpr double kMinFaceArea = 1e-14;

void check_box(const Box& box) {
  if (box.lo.size() != box.hi.size() || box.dim() < 1 || box.dim() > 3) {
    throw ShapeError("bounding box must have matching 1-3 dimensional corners");
  }
  if ((box.hi.array() <= box.lo.array()).any()) throw ShapeError("bounding box has non-positive extent");
}

}  // namespace

Box Box::unit(int dim) { return cube(dim, 0.0, 1.0); }

Box Box::cube(int dim, double lo, double hi) {
  return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
}

Eigen::VectorXd BackgroundGrid::spacing() const { return (box.hi - box.lo) / static_cast<double>(n - 1); }

BackgroundGrid background_grid(int n, const Box& box) {
  if (n < 2) throw InvalidResolution("background grid needs n >= 2, got " + std::to_string(n));
  check_box(box);
  const int dim = box.dim();
  Eigen::Index total = 1;
  for (int a = 0; a < dim; ++a) total *= n;

  BackgroundGrid grid{n, box, Eigen::MatrixXd(dim, total)};
  const Eigen::VectorXd h = grid.spacing();
  for (Eigen::Index p = 0; p < total; ++p) {
    Eigen::Index rest = p;
    for (int a = dim - 1; a >= 0; --a) {
      const Eigen::Index i = rest % n;
      rest /= n;
      // Exact endpoints rather than lo + (n-1)*h.
      grid.points(a, p) = i == n - 1 ? box.hi[a] : box.lo[a] + static_cast<double>(i) * h[a];
    }
  }
  return grid;
}

InteriorGrid interior_grid(const LevelSet& ls, const BackgroundGrid& grid) {
  if (grid.points.cols() == 0) throw EmptyGeometry("background grid is empty");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index p = 0; p < grid.points.cols(); ++p) {
    const double v = ls.phi(grid.points.col(p));
    if (!std::isfinite(v)) throw NumericError("level set is not finite on the background grid");
    if (v < 0.0) keep.push_back(p);
  }
  if (keep.empty()) throw EmptyGeometry("level set has no interior points on the grid");

  InteriorGrid out;
  out.points.resize(grid.points.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.points.col(static_cast<Eigen::Index>(k)) = grid.points.col(keep[k]);
  out.delta_v = grid.spacing().prod();
  return out;
}

SurfaceMesh marching_cubes(const LevelSet& ls, int n) {
  if (n < 2) throw InvalidResolution("marching cubes needs n >= 2, got " + std::to_string(n));
  check_box(ls.box);
  if (ls.box.dim() != 3) throw PreconditionError("marching cubes needs a 3D bounding box");

  const BackgroundGrid grid = background_grid(n, ls.box);
  const Eigen::VectorXd h = grid.spacing();
  const Eigen::Index nn = n;
  auto node = [nn](Eigen::Index i, Eigen::Index j, Eigen::Index k) { return (i * nn + j) * nn + k; };

  Eigen::VectorXd values(grid.points.cols());
  bool negative = false, positive = false;
  for (Eigen::Index p = 0; p < values.size(); ++p) {
    values[p] = ls.phi(grid.points.col(p));
    if (!std::isfinite(values[p])) throw NumericError("level set is not finite on the background grid");
    (values[p] < 0.0 ? negative : positive) = true;
  }
  if (!negative || !positive) throw EmptySurface("level set does not change sign on the grid");

  // Vertex id per grid edge, keyed by (lower node, axis).
  std::vector<int> edge_vertex(static_cast<std::size_t>(values.size()) * 3, -1);
  std::vector<Eigen::Vector3d> verts;
  std::vector<std::array<int, 3>> tris;

  auto vertex_on_edge = [&](Eigen::Index a, Eigen::Index b, int axis) {
    const Eigen::Index lower = std::min(a, b);
    int& slot = edge_vertex[static_cast<std::size_t>(lower) * 3 + axis];
    if (slot < 0) {
      const double va = values[a], vb = values[b];
      const double t = va == vb ? 0.5 : va / (va - vb);
      verts.push_back(grid.points.col(a) + t * (grid.points.col(b) - grid.points.col(a)));
      slot = static_cast<int>(verts.size()) - 1;
    }
    return slot;
  };

  for (Eigen::Index i = 0; i + 1 < nn; ++i) {
    for (Eigen::Index j = 0; j + 1 < nn; ++j) {
      for (Eigen::Index k = 0; k + 1 < nn; ++k) {
        std::array<Eigen::Index, 8> corner;
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          const auto* o = detail::kCornerOffset[c];
          corner[c] = node(i + o[0], j + o[1], k + o[2]);
          if (values[corner[c]] < 0.0) cube |= 1 << c;
        }
        const int edges = detail::kEdgeTable[cube];
        if (edges == 0) continue;
        std::array<int, 12> vid{};
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const int c0 = detail::kEdgeCorners[e][0], c1 = detail::kEdgeCorners[e][1];
          int axis = 0;
          while (detail::kCornerOffset[c0][axis] == detail::kCornerOffset[c1][axis]) ++axis;
          vid[e] = vertex_on_edge(corner[c0], corner[c1], axis);
        }
        for (int t = 0; detail::kTriTable[cube][t] != -1; t += 3) {
          tris.push_back({vid[detail::kTriTable[cube][t]], vid[detail::kTriTable[cube][t + 1]],
                          vid[detail::kTriTable[cube][t + 2]]});
        }
      }
    }
  }

  SurfaceMesh mesh;
  mesh.vertices.resize(3, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t v = 0; v < verts.size(); ++v) mesh.vertices.col(static_cast<Eigen::Index>(v)) = verts[v];

  std::vector<Eigen::Vector3d> centroids, normals;
  std::vector<double> areas;
  Eigen::VectorXd probe(3);
  for (auto tri : tris) {
    const Eigen::Vector3d a = verts[tri[0]], b = verts[tri[1]], c = verts[tri[2]];
    Eigen::Vector3d cross = (b - a).cross(c - a);
    const double twice_area = cross.norm();
    if (!(0.5 * twice_area >= kMinFaceArea)) {
      ++mesh.dropped_faces;
      continue;
    }
    const Eigen::Vector3d centroid = (a + b + c) / 3.0;
    Eigen::Vector3d grad;
    for (int d = 0; d < 3; ++d) {
      probe = centroid;
      probe[d] += h[d];
      const double up = ls.phi(probe);
      probe[d] -= 2.0 * h[d];
      grad[d] = up - ls.phi(probe);
    }
    if (cross.dot(grad) < 0.0) {
      cross = -cross;
      std::swap(tri[1], tri[2]);
    }
    mesh.faces.push_back(tri);
    centroids.push_back(centroid);
    normals.push_back(cross / twice_area);
    areas.push_back(0.5 * twice_area);
  }

  const auto faces = static_cast<Eigen::Index>(areas.size());
  mesh.centroids.resize(3, faces);
  mesh.normals.resize(3, faces);
  mesh.areas.resize(faces);
  for (Eigen::Index f = 0; f < faces; ++f) {
    mesh.centroids.col(f) = centroids[f];
    mesh.normals.col(f) = normals[f];
    mesh.areas[f] = areas[f];
  }
  return mesh;
}

SurfacePoints surface_points(const SurfaceMesh& mesh) { return {mesh.centroids, mesh.normals, mesh.areas}; }

SurfacePoints circle_boundary(int n, const Eigen::Vector2d& center, double radius) {
  if (n < 3) throw InvalidResolution("circle boundary needs at least 3 points");
  if (!(radius > 0.0)) throw PreconditionError("circle radius must be positive");
  SurfacePoints s{Eigen::MatrixXd(2, n), Eigen::MatrixXd(2, n), Eigen::VectorXd::Constant(n, 2.0 * std::numbers::pi * radius / n)};
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n;
    s.normals.col(k) << std::cos(angle), std::sin(angle);
    s.points.col(k) = center + radius * s.normals.col(k);
  }
  return s;
}

BoundaryPartition partition_boundary(const SurfacePoints& surface, const RegionPredicate& region) {
  BoundaryPartition out;
  for (Eigen::Index j = 0; j < surface.size(); ++j) {
    (region(surface.points.col(j)) == Region::dirichlet ? out.dirichlet_index : out.flux_index).push_back(j);
  }
  auto gather = [&](const std::vector<Eigen::Index>& idx) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    SurfacePoints s{Eigen::MatrixXd(surface.dim(), m), Eigen::MatrixXd(surface.dim(), m), Eigen::VectorXd(m)};
    for (Eigen::Index k = 0; k < m; ++k) {
      s.points.col(k) = surface.points.col(idx[k]);
      s.normals.col(k) = surface.normals.col(idx[k]);
      s.areas[k] = surface.areas[idx[k]];
    }
    return s;
  };
  out.dirichlet = gather(out.dirichlet_index);
  out.flux = gather(out.flux_index);
  return out;
}

double surface_integral(const SurfacePoints& surface, const ScalarField& integrand) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < surface.size(); ++j) {
    const double v = integrand(surface.points.col(j));
    if (!std::isfinite(v)) throw NumericError("surface integrand is not finite");
    sum += v * surface.areas[j];
  }
  return sum;
}

void write_vtk_polydata(const SurfaceMesh& mesh, std::ostream& out) {
  out << "# vtk DataFile Version 3.0\nsurface mesh\nASCII\nDATASET POLYDATA\n";
  out.precision(17);
  out << "POINTS " << mesh.vertices.cols() << " double\n";
  for (Eigen::Index v = 0; v < mesh.vertices.cols(); ++v) {
    out << mesh.vertices(0, v) << ' ' << mesh.vertices(1, v) << ' ' << mesh.vertices(2, v) << '\n';
  }
  out << "POLYGONS " << mesh.faces.size() << ' ' << 4 * mesh.faces.size() << '\n';
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  out << "CELL_DATA " << mesh.faces.size() << "\nNORMALS normals double\n";
  for (Eigen::Index f = 0; f < mesh.normals.cols(); ++f) {
    out << mesh.normals(0, f) << ' ' << mesh.normals(1, f) << ' ' << mesh.normals(2, f) << '\n';
  }
}

}  // namespace alpinn::geometry
