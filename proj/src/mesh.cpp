#include "movedg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace movedg {

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const Edge& e : edges) h = std::max(h, e.length);
  return h;
}

double Mesh::min_edge_length() const {
  double h = edges.empty() ? 0.0 : edges.front().length;
  for (const Edge& e : edges) h = std::min(h, e.length);
  return h;
}

Eigen::Vector2d Mesh::centroid(int element) const {
  const auto& el = elements[element];
  return (vertices[el[0]] + vertices[el[1]] + vertices[el[2]]) / 3.0;
}

BoundaryClassifier all_dirichlet() {
  return [](const Eigen::Vector2d&) { return BoundaryTag::dirichlet; };
}

namespace {

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

void finalize_topology(Mesh& mesh, const BoundaryClassifier& classify) {
  std::map<std::pair<int, int>, int> edge_lookup;
  mesh.element_edges.assign(mesh.elements.size(), {-1, -1, -1});
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const double area = signed_area(mesh.vertices[el[0]], mesh.vertices[el[1]],
                                    mesh.vertices[el[2]]);
    if (area <= 0.0) throw std::runtime_error("mesh: element with non-positive area");
    mesh.area.push_back(area);
    double dmax = 0.0, perim = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int a = el[k], b = el[(k + 1) % 3];
      const double len = (mesh.vertices[b] - mesh.vertices[a]).norm();
      dmax = std::max(dmax, len);
      perim += len;
      auto key = std::minmax(a, b);
      auto it = edge_lookup.find(key);
      if (it == edge_lookup.end()) {
        Edge edge;
        edge.v = {a, b};
        edge.left = e;
        edge.length = len;
        Eigen::Vector2d dir = (mesh.vertices[b] - mesh.vertices[a]) / len;
        edge.normal = Eigen::Vector2d(dir.y(), -dir.x());  // outward for a CCW element
        mesh.element_edges[e][k] = mesh.n_edges();
        edge_lookup.emplace(key, mesh.n_edges());
        mesh.edges.push_back(edge);
      } else {
        Edge& edge = mesh.edges[it->second];
        if (edge.right >= 0) throw std::runtime_error("mesh: non-manifold edge");
        edge.right = e;
        mesh.element_edges[e][k] = it->second;
      }
    }
    mesh.diameter.push_back(dmax);
    mesh.inradius.push_back(2.0 * area / perim);
  }
  for (Edge& edge : mesh.edges) {
    edge.tag = edge.on_boundary()
                   ? classify(0.5 * (mesh.vertices[edge.v[0]] + mesh.vertices[edge.v[1]]))
                   : BoundaryTag::interior;
    if (edge.on_boundary() && edge.tag == BoundaryTag::interior)
      throw std::runtime_error("mesh: boundary edge classified as interior");
  }
}

}  // namespace

Mesh build_structured_unit_square(int n, DiagonalPattern pattern,
                                  const BoundaryClassifier& classify) {
  if (n < 2) throw std::invalid_argument("build_structured_unit_square: n must be >= 2");
  Mesh mesh;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      const bool flip = pattern == DiagonalPattern::alternating && ((i + j) % 2 == 1);
      if (!flip) {
        mesh.elements.push_back({v00, v10, v11});
        mesh.elements.push_back({v00, v11, v01});
      } else {
        mesh.elements.push_back({v00, v10, v01});
        mesh.elements.push_back({v10, v11, v01});
      }
    }
  }
  finalize_topology(mesh, classify);
  return mesh;
}

PatchMap build_connectivity(const Mesh& mesh) {
  PatchMap patches;
  patches.vertex_elements.resize(mesh.n_vertices());
  for (int e = 0; e < mesh.n_elements(); ++e)
    for (int v : mesh.elements[e]) patches.vertex_elements[v].push_back(e);

  patches.edge_patch.resize(mesh.n_edges());
  patches.edge_patch_area.resize(mesh.n_edges());
  for (int k = 0; k < mesh.n_edges(); ++k) {
    const Edge& edge = mesh.edges[k];
    patches.edge_patch[k].push_back(edge.left);
    if (edge.right >= 0) patches.edge_patch[k].push_back(edge.right);
    double a = 0.0;
    for (int e : patches.edge_patch[k]) a += mesh.area[e];
    patches.edge_patch_area[k] = a;
  }

  patches.element_patch.resize(mesh.n_elements());
  patches.element_patch_area.resize(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    std::vector<int>& patch = patches.element_patch[e];
    for (int v : mesh.elements[e])
      for (int other : patches.vertex_elements[v])
        if (std::find(patch.begin(), patch.end(), other) == patch.end()) patch.push_back(other);
    std::sort(patch.begin(), patch.end());
    double a = 0.0;
    for (int other : patch) a += mesh.area[other];
    patches.element_patch_area[e] = a;
  }
  return patches;
}

QualityReport validate_mesh(const Mesh& mesh, double xi0, double diam_ratio_bound) {
  QualityReport report;
  const int nel = mesh.n_elements();
  report.shape_ratio.resize(nel);
  report.min_angle_deg.resize(nel);
  for (int e = 0; e < nel; ++e) {
    report.shape_ratio[e] =
        mesh.inradius[e] > 0 ? mesh.diameter[e] / mesh.inradius[e]
                             : std::numeric_limits<double>::infinity();
    double amin = M_PI;
    const auto& el = mesh.elements[e];
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector2d u = mesh.vertices[el[(k + 1) % 3]] - mesh.vertices[el[k]];
      Eigen::Vector2d v = mesh.vertices[el[(k + 2) % 3]] - mesh.vertices[el[k]];
      const double nu = u.norm(), nv = v.norm();
      if (nu == 0 || nv == 0) {
        amin = 0;
        break;
      }
      amin = std::min(amin, std::acos(std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0)));
    }
    report.min_angle_deg[e] = amin * 180.0 / M_PI;
    if (!(report.shape_ratio[e] <= xi0)) report.shape_violations.push_back(e);
  }
  for (const Edge& edge : mesh.edges) {
    if (edge.right < 0) continue;
    const double r = mesh.diameter[edge.left] / mesh.diameter[edge.right];
    if (r > diam_ratio_bound || 1.0 / r > diam_ratio_bound) {
      report.uniformity_violations.push_back(edge.left);
      report.uniformity_violations.push_back(edge.right);
    }
  }
  report.ok = report.shape_violations.empty() && report.uniformity_violations.empty();
  return report;
}

std::string serialize_mesh(const Mesh& mesh) {
  std::string out;
  char line[256];
  auto emit = [&out, &line](int k) { out.append(line, static_cast<size_t>(k)); };
  emit(std::snprintf(line, sizeof line,
                     "# movedg mesh: vertices %d elements %d edges %d\n"
                     "# vertex <id> <x> <y>\n# element <id> <v0> <v1> <v2>\n"
                     "# edge <id> <v0> <v1> <left> <right> <tag> <length> <nx> <ny>\n",
                     mesh.n_vertices(), mesh.n_elements(), mesh.n_edges()));
  for (int i = 0; i < mesh.n_vertices(); ++i)
    emit(std::snprintf(line, sizeof line, "vertex %d %.17g %.17g\n", i, mesh.vertices[i].x(),
                       mesh.vertices[i].y()));
  for (int e = 0; e < mesh.n_elements(); ++e)
    emit(std::snprintf(line, sizeof line, "element %d %d %d %d\n", e, mesh.elements[e][0],
                       mesh.elements[e][1], mesh.elements[e][2]));
  static const char* tag_names[] = {"interior", "dirichlet", "neumann"};
  for (int k = 0; k < mesh.n_edges(); ++k) {
    const Edge& ed = mesh.edges[k];
    emit(std::snprintf(line, sizeof line, "edge %d %d %d %d %d %s %.17g %.17g %.17g\n", k,
                       ed.v[0], ed.v[1], ed.left, ed.right, tag_names[static_cast<int>(ed.tag)],
                       ed.length, ed.normal.x(), ed.normal.y()));
  }
  return out;
}

}  // namespace movedg
