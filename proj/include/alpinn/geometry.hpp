#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

namespace alpinn::geometry {

/// Axis-aligned box [lo, hi] in 1 to 3 dimensions.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  static Box unit(int dim);
  static Box cube(int dim, double lo, double hi);
};

using ScalarField = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Implicit geometry: interior where phi < 0, boundary where phi = 0.
struct LevelSet {
  ScalarField phi;
  Box box = Box::unit(3);
};

/// Uniform tensor grid with endpoints; axis 0 varies slowest.
struct BackgroundGrid {
  int n = 0;
  Box box;
  Eigen::MatrixXd points;  // dim x n^dim

  /// Per-axis spacing (hi - lo) / (n - 1).
  Eigen::VectorXd spacing() const;
};

/// Throws InvalidResolution if n < 2.
BackgroundGrid background_grid(int n, const Box& box);

struct InteriorGrid {
  Eigen::MatrixXd points;  // dim x N
  double delta_v = 0.0;

  Eigen::Index count() const noexcept { return points.cols(); }
};

/// Grid points with phi < 0, weighted by the background cell volume.
/// Throws EmptyGeometry if none remain.
InteriorGrid interior_grid(const LevelSet& ls, const BackgroundGrid& grid);

/// Triangulated zero isosurface with per-face quadrature data.
struct SurfaceMesh {
  Eigen::MatrixXd vertices;              // 3 x V
  std::vector<std::array<int, 3>> faces;  // counter-clockwise seen from outside
  Eigen::MatrixXd centroids;             // 3 x F
  Eigen::MatrixXd normals;               // 3 x F, outward unit
  Eigen::VectorXd areas;                 // F
  long dropped_faces = 0;                // degenerate faces discarded

  Eigen::Index face_count() const noexcept { return areas.size(); }
};

/// Marching cubes on the n^3 background grid of ls.box.
/// Throws InvalidResolution (n < 2), EmptySurface (no sign change),
/// PreconditionError (box not 3D), NumericError (non-finite phi).
SurfaceMesh marching_cubes(const LevelSet& ls, int n);

/// Surface quadrature points: positions, outward normals, area weights.
struct SurfacePoints {
  Eigen::MatrixXd points;   // dim x M
  Eigen::MatrixXd normals;  // dim x M
  Eigen::VectorXd areas;    // M

  Eigen::Index size() const noexcept { return areas.size(); }
  int dim() const noexcept { return static_cast<int>(points.rows()); }
  bool empty() const noexcept { return areas.size() == 0; }
};

SurfacePoints surface_points(const SurfaceMesh& mesh);

/// n equally spaced points on a circle, radial normals, weights 2*pi*r/n.
SurfacePoints circle_boundary(int n, const Eigen::Vector2d& center, double radius);

enum class Region { dirichlet, flux };

using RegionPredicate = std::function<Region(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Disjoint split of the surface points; flux covers Neumann or Robin.
struct BoundaryPartition {
  SurfacePoints dirichlet;
  SurfacePoints flux;
  std::vector<Eigen::Index> dirichlet_index;  // positions in the input
  std::vector<Eigen::Index> flux_index;
};

BoundaryPartition partition_boundary(const SurfacePoints& surface, const RegionPredicate& region);

/// Sum of integrand(point) * area. Throws NumericError on a non-finite value.
double surface_integral(const SurfacePoints& surface, const ScalarField& integrand);

/// Legacy ASCII VTK POLYDATA with the mesh triangles.
void write_vtk_polydata(const SurfaceMesh& mesh, std::ostream& out);

}  // namespace alpinn::geometry
