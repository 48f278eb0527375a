#include "finsler/mesh.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool in_triangle(const Point& p, const Point& a, const Point& b, const Point& c) {
  return cross(b - a, p - a) >= 0 && cross(c - b, p - b) >= 0 && cross(a - c, p - c) >= 0;
}

std::string fmt(double v) {
  char buf[32];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

}  // namespace

double triangle_area(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Point& a = mesh.vertices[tri[0]];
  return 0.5 * cross(mesh.vertices[tri[1]] - a, mesh.vertices[tri[2]] - a);
}

void finalize(Mesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  mesh.h_max = 0.0;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
      mesh.h_max = std::max(mesh.h_max, (mesh.vertices[a] - mesh.vertices[b]).norm());
    }
  mesh.boundary_flags.assign(mesh.vertices.size(), false);
  for (const auto& [e, n] : count)
    if (n == 1) mesh.boundary_flags[e.first] = mesh.boundary_flags[e.second] = true;
}

Mesh square_mesh(double side, int n) {
  if (n < 2) throw ConfigError("square_mesh: need at least 2 cells per side");
  Mesh m;
  m.label = "square";
  m.domain = square_polygon(side);
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(side * i / n, side * j / n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.triangles.push_back({a, b, c});
        m.triangles.push_back({a, c, d});
      } else {
        m.triangles.push_back({a, b, d});
        m.triangles.push_back({b, c, d});
      }
    }
  finalize(m);
  return m;
}

Mesh disk_mesh(double radius, double h) {
  if (!(radius > 0.0 && h > 0.0)) throw ConfigError("disk_mesh: radius and h must be positive");
  const int rings = std::max(2, static_cast<int>(std::ceil(radius / h)));
  Mesh m;
  m.label = "disk";
  m.vertices.emplace_back(0.0, 0.0);
  std::vector<int> first{0}, count{1};
  for (int k = 1; k <= rings; ++k) {
    first.push_back(m.size());
    count.push_back(6 * k);
    const double r = radius * k / rings;
    for (int i = 0; i < 6 * k; ++i) {
      const double th = 2.0 * std::numbers::pi * i / (6 * k);
      m.vertices.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  for (int i = 0; i < 6; ++i) m.triangles.push_back({0, 1 + i, 1 + (i + 1) % 6});
  for (int k = 2; k <= rings; ++k) {
    // Merge the inner and outer rings by angle.
    const int na = count[k - 1], nb = count[k];
    int i = 0, j = 0;
    while (i < na || j < nb) {
      const int a = first[k - 1] + i % na, a1 = first[k - 1] + (i + 1) % na;
      const int b = first[k] + j % nb, b1 = first[k] + (j + 1) % nb;
      const double next_a = double(i + 1) / na, next_b = double(j + 1) / nb;
      if (j < nb && (i >= na || next_b <= next_a)) {
        m.triangles.push_back({a, b, b1});
        ++j;
      } else {
        m.triangles.push_back({a, b, a1});
        ++i;
      }
    }
  }
  for (auto& t : m.triangles)
    if (cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]) < 0) std::swap(t[1], t[2]);
  for (int i = 0; i < 6 * rings; ++i) m.domain.push_back(m.vertices[first[rings] + i]);
  finalize(m);
  return m;
}

Mesh refine(const Mesh& in) {
  Mesh m;
  m.label = in.label;
  m.domain = in.domain;
  m.vertices = in.vertices;
  std::map<std::pair<int, int>, int> mid;
  const auto midpoint = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    if (const auto it = mid.find(key); it != mid.end()) return it->second;
    m.vertices.push_back(0.5 * (in.vertices[a] + in.vertices[b]));
    return mid[key] = m.size() - 1;
  };
  for (const auto& t : in.triangles) {
    const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
    m.triangles.push_back({t[0], ab, ca});
    m.triangles.push_back({ab, t[1], bc});
    m.triangles.push_back({ca, bc, t[2]});
    m.triangles.push_back({ab, bc, ca});
  }
  finalize(m);
  return m;
}

Mesh polygon_mesh(const Polygon& poly_in, double h) {
  if (!(h > 0.0)) throw ConfigError("polygon_mesh: h must be positive");
  Polygon poly = poly_in;
  if (!is_simple(poly)) throw ConfigError("polygon_mesh: polygon is not simple");
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());

  Mesh m;
  m.label = "polygon";
  m.domain = poly;
  m.vertices = poly;
  std::vector<int> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  while (idx.size() > 3) {
    bool clipped = false;
    const std::size_t n = idx.size();
    for (std::size_t k = 0; k < n && !clipped; ++k) {
      const int a = idx[(k + n - 1) % n], b = idx[k], c = idx[(k + 1) % n];
      const Point &A = poly[a], &B = poly[b], &C = poly[c];
      if (cross(B - A, C - B) <= 0) continue;  // reflex or degenerate
      bool empty = true;
      for (int v : idx)
        if (v != a && v != b && v != c && in_triangle(poly[v], A, B, C)) {
          empty = false;
          break;
        }
      if (!empty) continue;
      m.triangles.push_back({a, b, c});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
    }
    if (!clipped) throw ConfigError("polygon_mesh: ear clipping failed");
  }
  m.triangles.push_back({idx[0], idx[1], idx[2]});
  finalize(m);
  while (m.h_max > h) m = refine(m);
  return m;
}

Mesh transform(const Mesh& in, const Eigen::Matrix2d& T) {
  Mesh m = in;
  for (auto& v : m.vertices) v = T * v;
  for (auto& v : m.domain) v = T * v;
  if (T.determinant() < 0) {
    for (auto& t : m.triangles) std::swap(t[1], t[2]);
    std::reverse(m.domain.begin(), m.domain.end());
  }
  finalize(m);
  return m;
}

Mesh mesh_from_spec(const std::string& spec, double h) {
  if (!(h > 0.0 && h < 1.0)) throw ConfigError("mesh h must lie in (0, 1)");
  if (spec == "square") return square_mesh(1.0, static_cast<int>(std::ceil(1.0 / h)));
  if (spec == "disk") return disk_mesh(1.0, h);
  if (spec.rfind("polygon:", 0) == 0) {
    Mesh m = polygon_mesh(read_polygon_file(spec.substr(8)), h);
    m.label = spec;
    return m;
  }
  throw ConfigError("unknown domain '" + spec + "' (expected square, disk or polygon:<file>)");
}

void write_field(const Mesh& mesh, const Eigen::VectorXd& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (int i = 0; i < mesh.size(); ++i)
    out << fmt(mesh.vertices[i].x()) << ' ' << fmt(mesh.vertices[i].y()) << ' ' << fmt(values[i]) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace finsler
