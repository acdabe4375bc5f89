#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

namespace movedg {

enum class BoundaryTag { interior, dirichlet, neumann };

struct Edge {
  std::array<int, 2> v;         // endpoint vertex ids
  int left = -1;                // element owning the normal
  int right = -1;               // -1 on the boundary
  BoundaryTag tag = BoundaryTag::interior;
  double length = 0.0;          // h_E
  Eigen::Vector2d normal;       // unit, outward from the left element
  bool on_boundary() const { return right < 0; }
};

/// Decides the tag of a boundary edge from its midpoint.
using BoundaryClassifier = std::function<BoundaryTag(const Eigen::Vector2d&)>;

enum class DiagonalPattern { fixed, alternating };

/// Static reference triangulation of the unit square. Immutable after
/// construction; all elements are counterclockwise.
struct Mesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> elements;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> element_edges;  // local edge k joins vertices k, k+1
  std::vector<double> area;      // per element
  std::vector<double> diameter;  // h_K (longest edge)
  std::vector<double> inradius;  // r_K

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  double max_edge_length() const;
  double min_edge_length() const;
  Eigen::Vector2d centroid(int element) const;
};

BoundaryClassifier all_dirichlet();

Mesh build_structured_unit_square(int n, DiagonalPattern pattern = DiagonalPattern::fixed,
                                  const BoundaryClassifier& classify = all_dirichlet());

/// Patches: for an edge the union of its incident elements, for an element
/// the union of elements sharing at least one vertex with it.
struct PatchMap {
  std::vector<std::vector<int>> edge_patch;
  std::vector<std::vector<int>> element_patch;
  std::vector<std::vector<int>> vertex_elements;
  std::vector<double> edge_patch_area;
  std::vector<double> element_patch_area;
};

PatchMap build_connectivity(const Mesh& mesh);

struct QualityReport {
  Eigen::VectorXd shape_ratio;    // h_K / r_K
  Eigen::VectorXd min_angle_deg;
  std::vector<int> shape_violations;        // elements with ratio > xi0
  std::vector<int> uniformity_violations;   // adjacent-diameter violations
  bool ok = true;
};

QualityReport validate_mesh(const Mesh& mesh, double xi0, double diam_ratio_bound = 4.0);

/// Plain-text node/element/edge listing, one record per line.
std::string serialize_mesh(const Mesh& mesh);

}  // namespace movedg
