#pragma once

// Triangle mesh of a qubit polytope clipped to the Bloch ball.
//
// Candidate points: feasible intersections of three facet planes, the points
// where two facet planes meet on the sphere, each facet's circle on the sphere
// and a latitude/longitude sphere grid (both at 5 degree steps). The mesh is
// the convex hull of the candidates that satisfy every facet.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include "qpoly/polytope.hpp"

namespace qpoly {

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise seen from outside
};

namespace detail {

struct Plane {
  Eigen::Vector3d n;
  double off;
};

inline std::vector<Eigen::Vector3d> convex_hull_points(const std::vector<Eigen::Vector3d>& pts,
                                                       std::vector<std::array<int, 3>>& tris) {
  constexpr double kEps = 1e-10;
  const int np = static_cast<int>(pts.size());
  if (np < 4) throw Error(ErrorKind::EmptyRegion, "region has fewer than four extreme points");

  int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
  double best = 0.0;
  for (int i = 1; i < np; ++i)
    if (double v = (pts[i] - pts[i0]).norm(); v > best) best = v, i1 = i;
  if (i1 < 0 || best < 1e-9) throw Error(ErrorKind::EmptyRegion, "region is degenerate");
  best = 0.0;
  for (int i = 0; i < np; ++i)
    if (double v = (pts[i] - pts[i0]).cross(pts[i1] - pts[i0]).norm(); v > best) best = v, i2 = i;
  if (i2 < 0 || best < 1e-9) throw Error(ErrorKind::EmptyRegion, "region is degenerate");
  const Eigen::Vector3d n0 = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  best = 0.0;
  for (int i = 0; i < np; ++i)
    if (double v = std::abs(n0.dot(pts[i] - pts[i0])); v > best) best = v, i3 = i;
  if (i3 < 0 || best < 1e-9) throw Error(ErrorKind::EmptyRegion, "region is flat");

  struct Face {
    int a, b, c;
    Eigen::Vector3d n;
    double off;
    bool alive;
  };
  std::vector<Face> faces;
  const Eigen::Vector3d inner = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  auto add_face = [&](int a, int b, int c) {
    Eigen::Vector3d n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    n.normalize();
    if (n.dot(inner - pts[a]) > 0) {
      std::swap(b, c);
      n = -n;
    }
    faces.push_back({a, b, c, n, n.dot(pts[a]), true});
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (int p = 0; p < np; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::set<std::pair<int, int>> edges;
    bool any = false;
    for (auto& f : faces) {
      if (!f.alive || f.n.dot(pts[p]) - f.off <= kEps) continue;
      any = true;
      f.alive = false;
      edges.insert({f.a, f.b});
      edges.insert({f.b, f.c});
      edges.insert({f.c, f.a});
    }
    if (!any) continue;
    for (const auto& [u, v] : edges) {
      if (edges.count({v, u})) continue;
      Eigen::Vector3d n = (pts[v] - pts[u]).cross(pts[p] - pts[u]);
      const double len = n.norm();
      if (len == 0.0) continue;
      n /= len;
      faces.push_back({u, v, p, n, n.dot(pts[u]), true});
    }
  }

  std::vector<int> remap(pts.size(), -1);
  std::vector<Eigen::Vector3d> out;
  tris.clear();
  for (const auto& f : faces) {
    if (!f.alive) continue;
    std::array<int, 3> t{f.a, f.b, f.c};
    for (int& idx : t) {
      if (remap[static_cast<std::size_t>(idx)] < 0) {
        remap[static_cast<std::size_t>(idx)] = static_cast<int>(out.size());
        out.push_back(pts[static_cast<std::size_t>(idx)]);
      }
      idx = remap[static_cast<std::size_t>(idx)];
    }
    tris.push_back(t);
  }
  return out;
}

}  // namespace detail

inline TriangleMesh mesh_qubit_polytope(const ConfidencePolytope& poly) {
  if (poly.dim() != 2) throw Error(ErrorKind::NonQubit, "mesh export is limited to qubits");
  constexpr double kTol = 1e-9;
  const double step = 5.0 * std::numbers::pi / 180.0;

  std::vector<detail::Plane> planes;
  for (const auto& f : poly.facets()) {
    if (f.clamped) continue;
    const Eigen::Vector3d n = f.normal.head<3>();
    const double len = n.norm();
    if (len == 0.0 || f.offset >= len) continue;  // the plane misses the ball
    planes.push_back({n / len, f.offset / len});
  }

  auto feasible = [&](const Eigen::Vector3d& r) {
    if (r.norm() > 1.0 + kTol) return false;
    for (const auto& p : planes)
      if (p.n.dot(r) > p.off + kTol) return false;
    return true;
  };

  std::vector<Eigen::Vector3d> cand;
  auto push = [&](const Eigen::Vector3d& r) {
    if (!feasible(r)) return;
    for (const auto& q : cand)
      if ((q - r).norm() < kTol) return;
    cand.push_back(r);
  };

  const std::size_t k = planes.size();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      for (std::size_t c = b + 1; c < k; ++c) {
        Eigen::Matrix3d m;
        m.row(0) = planes[a].n;
        m.row(1) = planes[b].n;
        m.row(2) = planes[c].n;
        if (std::abs(m.determinant()) < 1e-12) continue;
        push(m.partialPivLu().solve(Eigen::Vector3d(planes[a].off, planes[b].off, planes[c].off)));
      }

  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      const Eigen::Vector3d u = planes[a].n.cross(planes[b].n);
      if (u.norm() < 1e-12) continue;
      // point on both planes closest to the origin
      Eigen::Matrix<double, 2, 3> m;
      m.row(0) = planes[a].n;
      m.row(1) = planes[b].n;
      const Eigen::Vector3d x0 =
          m.transpose() * (m * m.transpose()).inverse() * Eigen::Vector2d(planes[a].off, planes[b].off);
      const Eigen::Vector3d ud = u.normalized();
      const double bq = x0.dot(ud);
      const double disc = bq * bq - (x0.squaredNorm() - 1.0);
      if (disc < 0) continue;
      for (double sgn : {-1.0, 1.0}) push(x0 + (-bq + sgn * std::sqrt(disc)) * ud);
    }

  for (const auto& p : planes) {
    const Eigen::Vector3d c = p.off * p.n;
    const double rad = std::sqrt(std::max(0.0, 1.0 - p.off * p.off));
    const Eigen::Vector3d e1 = p.n.unitOrthogonal();
    const Eigen::Vector3d e2 = p.n.cross(e1);
    for (int i = 0; i < 72; ++i) {
      const double t = i * step;
      push(c + rad * (std::cos(t) * e1 + std::sin(t) * e2));
    }
  }

  push(Eigen::Vector3d(0, 0, 1));
  push(Eigen::Vector3d(0, 0, -1));
  for (int i = 1; i < 36; ++i)
    for (int j = 0; j < 72; ++j) {
      const double th = i * step, ph = j * step;
      push(Eigen::Vector3d(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)));
    }

  TriangleMesh mesh;
  mesh.vertices = detail::convex_hull_points(cand, mesh.triangles);
  return mesh;
}

}  // namespace qpoly
