#pragma once

// Planar polygons: validity checks and the anisotropic metric quantities the
// planar solver needs (perimeter, H0-inradius, distance to the boundary).

#include <string>
#include <vector>

#include <Eigen/Core>

#include "finsler/norms.hpp"

namespace finsler {

using Point = Eigen::Vector2d;
using Polygon = std::vector<Point>;

/// Positive for counter-clockwise vertex order.
double signed_area(const Polygon& poly);

/// True when no two non-adjacent edges intersect and no edge is degenerate.
bool is_simple(const Polygon& poly);

bool contains(const Polygon& poly, const Point& x);

double boundary_distance(const Polygon& poly, const Point& x);

double diameter(const Polygon& poly);

/// Axis-aligned square [0, side]^2, counter-clockwise.
Polygon square_polygon(double side = 1.0);

/// Regular n-gon inscribed in the circle of radius R centred at the origin.
Polygon regular_polygon(double radius, int n);

/// n-gon inscribed in the Wulff ball {H0 < R}: vertices R w / H0(w) on the
/// Euclidean unit circle.
Polygon wulff_polygon(const NormModel& norm, double radius, int n);

/// One `x y` pair per line; blank lines and `#` comments ignored. Clockwise
/// input is reversed to counter-clockwise.
Polygon read_polygon_file(const std::string& path);

/// H0-distance from an interior point to the boundary: the largest r with
/// x + W_r contained in the polygon, W_r = {H0 < r}.
double h0_boundary_distance(const NormModel& norm, const Polygon& poly, const Point& x);

struct Inradius {
  double radius = 0.0;
  Point center = Point::Zero();
};

/// H0-inradius by grid search plus pattern-search polish. The result is a
/// lower bound of the true inradius, which keeps bounds that decrease in L
/// conservative.
Inradius h0_inradius(const NormModel& norm, const Polygon& poly, int grid = 64);

}  // namespace finsler
