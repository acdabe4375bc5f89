#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "movedg/basis.hpp"
#include "movedg/mesh.hpp"
#include "movedg/quadrature.hpp"

namespace movedg {

/// Affine map from the reference triangle onto a mesh element,
/// X = origin + frame * xi.
struct AffineMap {
  Eigen::Vector2d origin;
  Eigen::Matrix2d frame;
  Eigen::Matrix2d inv_frame;
  double det = 0.0;
};

/// Basis tables of one element side of a mesh edge, evaluated at the edge
/// quadrature points (which are shared between the two sides).
struct EdgeSideTables {
  Eigen::MatrixXd phi;                      // nqe x m
  std::array<Eigen::MatrixXd, 2> grad_ref;  // reference-coordinate derivatives
};

/// Discrete broken polynomial space on the static reference mesh: basis
/// tables at volume/edge quadrature points, element affine maps, and the
/// global Lagrange-node identification used by the averaging operator.
struct DGSpace {
  DGSpace(Mesh m, int degree) : mesh(std::move(m)), basis(degree) {}

  Mesh mesh;
  PatchMap patches;
  ReferenceBasis basis;
  TriangleRule volume_rule;
  SegmentRule edge_rule;

  std::vector<AffineMap> maps;
  Eigen::MatrixXd phi_vol;
  std::array<Eigen::MatrixXd, 2> grad_vol;
  std::array<Eigen::MatrixXd, 3> hess_vol;
  Eigen::MatrixXd ref_mass;  // unit-reference-triangle mass matrix
  Eigen::LLT<Eigen::MatrixXd> ref_mass_llt;
  std::vector<std::array<EdgeSideTables, 2>> edge_tables;  // [0] left, [1] right

  // Global Lagrange nodes of the conforming layout.
  int n_nodes = 0;
  std::vector<int> node_of;  // element*m + local -> global node
  std::vector<std::vector<std::pair<int, int>>> node_members;
  std::vector<bool> node_on_dirichlet;
  std::vector<Eigen::Vector2d> node_coords;  // reference coordinates per (element, local) node

  InequalityConstants constants;  // measured C_T, C_I for this degree/shape

  int degree() const { return basis.degree(); }
  int block_size() const { return basis.size(); }
  int n_elements() const { return mesh.n_elements(); }
  int dofs() const { return n_elements() * block_size(); }
  /// Physical (reference-mesh) coordinates of a volume quadrature point.
  Eigen::Vector2d volume_point(int element, int q) const {
    return maps[element].origin + maps[element].frame * volume_rule.points.row(q).transpose();
  }
  Eigen::Vector2d edge_point(int edge, int q) const {
    const Edge& e = mesh.edges[edge];
    const Eigen::Vector2d a = mesh.vertices[e.v[0]];
    return a + edge_rule.points[q] * (mesh.vertices[e.v[1]] - a);
  }
  Eigen::Vector2d node_point(int element, int local) const {
    return node_coords[static_cast<size_t>(element) * block_size() + local];
  }
};

DGSpace make_space(Mesh mesh, int degree, int volume_exactness = -1, int edge_exactness = -1);

/// Per-element coefficient vector of a broken polynomial field.
struct DGField {
  int degree = 0;
  int block = 0;
  Eigen::VectorXd coeff;

  DGField() = default;
  DGField(const DGSpace& space)
      : degree(space.degree()), block(space.block_size()),
        coeff(Eigen::VectorXd::Zero(space.dofs())) {}

  auto elem(int e) { return coeff.segment(static_cast<Eigen::Index>(e) * block, block); }
  auto elem(int e) const { return coeff.segment(static_cast<Eigen::Index>(e) * block, block); }
};

/// Values of a field at the volume quadrature points of one element.
Eigen::VectorXd values_on_element(const DGSpace& space, const DGField& u, int element);

/// Reference-mesh gradient of the field at the volume points (2 x nq).
Eigen::Matrix2Xd gradients_on_element(const DGSpace& space, const DGField& u, int element);

/// Trace values on one side of an edge at the edge quadrature points.
Eigen::VectorXd values_on_edge(const DGSpace& space, const DGField& u, int edge, int side);

/// Reference-mesh trace gradient on one side of an edge (2 x nqe).
Eigen::Matrix2Xd gradients_on_edge(const DGSpace& space, const DGField& u, int edge, int side);

}  // namespace movedg
