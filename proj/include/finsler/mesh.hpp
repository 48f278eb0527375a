#pragma once

// Conforming triangle meshes of planar polygons.

#include <array>
#include <string>
#include <vector>

#include "finsler/polygon.hpp"

namespace finsler {

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  ///< counter-clockwise
  std::vector<bool> boundary_flags;
  double h_max = 0.0;  ///< longest edge
  Polygon domain;      ///< the polygon the mesh covers
  std::string label;   ///< "square", "disk", "polygon:<file>", ...

  int size() const { return static_cast<int>(vertices.size()); }
};

/// [0, side]^2 split into n x n cells, diagonals alternating by cell parity.
Mesh square_mesh(double side, int n);

/// Inscribed disk polygon of radius R, centred at the origin, meshed by
/// concentric rings with 6k vertices on ring k and ring spacing <= h.
Mesh disk_mesh(double radius, double h);

/// Ear-clipping triangulation followed by uniform red refinement until the
/// longest edge is <= h.
Mesh polygon_mesh(const Polygon& poly, double h);

/// Splits every triangle into four through edge midpoints.
Mesh refine(const Mesh& mesh);

/// Applies the linear map x -> T x to every vertex (and the domain polygon).
Mesh transform(const Mesh& mesh, const Eigen::Matrix2d& T);

/// Marks vertices on edges that belong to exactly one triangle and recomputes h_max.
void finalize(Mesh& mesh);

double triangle_area(const Mesh& mesh, int t);

/// Builds a mesh from a domain spec: "square", "disk" or "polygon:<file>".
Mesh mesh_from_spec(const std::string& spec, double h);

/// Writes `x y u` per node.
void write_field(const Mesh& mesh, const Eigen::VectorXd& values, const std::string& path);

}  // namespace finsler
