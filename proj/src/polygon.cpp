#include "finsler/polygon.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Point& a, const Point& b, const Point& c) {
  const double v = cross(b - a, c - a);
  const double scale = (b - a).norm() * (c - a).norm();
  if (std::abs(v) <= 1e-14 * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return p.x() >= std::min(a.x(), b.x()) - 1e-14 && p.x() <= std::max(a.x(), b.x()) + 1e-14 &&
         p.y() >= std::min(a.y(), b.y()) - 1e-14 && p.y() <= std::max(a.y(), b.y()) + 1e-14;
}

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
  const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double segment_distance(const Point& a, const Point& b, const Point& x) {
  const Point ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - x).norm();
}

}  // namespace

double signed_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if ((poly[(i + 1) % n] - poly[i]).norm() == 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point &a = poly[i], &b = poly[(i + 1) % n], &c = poly[j], &d = poly[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folds back.
        const Point shared = j == i + 1 ? b : a;
        const Point u = (j == i + 1 ? a : b) - shared, v = (j == i + 1 ? d : c) - shared;
        if (orientation(shared, shared + u, shared + v) == 0 && u.dot(v) > 0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

bool contains(const Polygon& poly, const Point& x) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point &a = poly[i], &b = poly[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

double boundary_distance(const Polygon& poly, const Point& x) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) d = std::min(d, segment_distance(poly[i], poly[(i + 1) % poly.size()], x));
  return d;
}

double diameter(const Polygon& poly) {
  double d = 0.0;
  for (const auto& a : poly)
    for (const auto& b : poly) d = std::max(d, (a - b).norm());
  return d;
}

Polygon square_polygon(double side) { return {Point(0, 0), Point(side, 0), Point(side, side), Point(0, side)}; }

Polygon regular_polygon(double radius, int n) {
  Polygon poly;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n;
    poly.emplace_back(radius * std::cos(th), radius * std::sin(th));
  }
  return poly;
}

Polygon wulff_polygon(const NormModel& norm, double radius, int n) {
  Polygon poly;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n;
    const Point w(std::cos(th), std::sin(th));
    poly.push_back(radius * w / dual_norm(norm, w));
  }
  return poly;
}

Polygon read_polygon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open polygon file '" + path + "'");
  Polygon poly;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double x, y;
    std::string extra;
    if (!(ls >> x >> y) || (ls >> extra))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'x y'");
    poly.emplace_back(x, y);
  }
  if (poly.size() < 3) throw ConfigError(path + ": polygon needs at least 3 vertices");
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  if (!is_simple(poly)) throw ConfigError(path + ": polygon is self-intersecting");
  return poly;
}

double h0_boundary_distance(const NormModel& norm, const Polygon& poly, const Point& x) {
  // For each edge, the closest point of the edge's line in the H0 metric is
  // where the scaled Wulff ball touches it: x + r grad H(n). Along a segment
  // H0(y - x) is convex, so clamping that touching point to the segment gives
  // the segment minimizer.
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    const Point e = b - a;
    Point normal(e.y(), -e.x());
    normal.normalize();
    const double r = (a - x).dot(normal) / eval_norm(norm, normal);
    const Point touch = x + std::abs(r) * grad_norm(norm, Point(r >= 0 ? normal : Point(-normal)));
    const double t = std::clamp((touch - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    const Vec y = a + t * e - x;
    best = std::min(best, dual_norm(norm, y));
  }
  return best;
}

Inradius h0_inradius(const NormModel& norm, const Polygon& poly, int grid) {
  Point lo = poly.front(), hi = poly.front();
  for (const auto& v : poly) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
  const auto value = [&](const Point& x) { return contains(poly, x) ? h0_boundary_distance(norm, poly, x) : 0.0; };

  Inradius best;
  for (int i = 1; i < grid; ++i)
    for (int j = 1; j < grid; ++j) {
      const Point x(lo.x() + (hi.x() - lo.x()) * i / grid, lo.y() + (hi.y() - lo.y()) * j / grid);
      const double v = value(x);
      if (v > best.radius) best = {v, x};
    }
  double step = (hi - lo).maxCoeff() / grid;
  const Point dirs[4] = {Point(1, 0), Point(-1, 0), Point(0, 1), Point(0, -1)};
  while (step > 1e-10 * (hi - lo).maxCoeff()) {
    bool moved = false;
    for (const auto& d : dirs) {
      const Point x = best.center + step * d;
      const double v = value(x);
      if (v > best.radius) {
        best = {v, x};
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

}  // namespace finsler
