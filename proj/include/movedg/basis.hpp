#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "movedg/quadrature.hpp"

namespace movedg {

/// Where a Lagrange node sits on the reference triangle. Edge k runs from
/// vertex k to vertex k+1 (mod 3); edge nodes carry their 1-based slot
/// counted from vertex k.
struct NodePlacement {
  enum Kind { vertex, edge, interior } kind;
  int index;  // vertex id, edge id, or interior ordinal
  int slot;   // for edge nodes: 1..p-1 from the edge's first vertex
};

/// Nodal Lagrange basis of total degree p on the reference triangle with
/// vertices (0,0), (1,0), (0,1) and equispaced nodes.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return size_; }
  const Eigen::MatrixX2d& nodes() const { return nodes_; }
  const std::vector<NodePlacement>& placements() const { return placements_; }

  /// phi_j at the given reference points; (npts x m).
  Eigen::MatrixXd values(const Eigen::MatrixX2d& pts) const;
  /// Reference-coordinate first derivatives, one matrix per direction.
  std::array<Eigen::MatrixXd, 2> gradients(const Eigen::MatrixX2d& pts) const;
  /// Second derivatives ordered (xx, xy, yy).
  std::array<Eigen::MatrixXd, 3> second_derivatives(const Eigen::MatrixX2d& pts) const;

 private:
  Eigen::MatrixXd monomials(const Eigen::MatrixX2d& pts, int dx, int dy) const;

  int degree_;
  int size_;
  Eigen::MatrixX2d nodes_;
  Eigen::MatrixXi powers_;   // monomial exponents, one row per basis monomial
  Eigen::MatrixXd coeff_;    // monomial-to-nodal coefficients, (m x m)
  std::vector<NodePlacement> placements_;
};

ReferenceBasis make_basis(int degree);

/// Trace and inverse inequality constants of a triangle with the given
/// vertices: the smallest C with ||v||^2_{dK} <= C/h_K ||v||^2_K and
/// ||grad v||_K <= C/h_K ||v||_K over polynomials of degree <= p.
/// Computed from the generalized eigenproblems of the boundary-mass /
/// stiffness matrices against the volume mass matrix.
struct InequalityConstants {
  double trace;    // C_T
  double inverse;  // C_I
};
InequalityConstants measure_inequality_constants(const ReferenceBasis& basis,
                                                 const std::array<Eigen::Vector2d, 3>& tri);

/// Default interior-penalty coefficient for degree p elements of the given
/// shape: max(10, 2 C_T).
double default_penalty(const ReferenceBasis& basis, const std::array<Eigen::Vector2d, 3>& tri);

}  // namespace movedg
