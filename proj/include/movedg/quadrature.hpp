#pragma once

#include <Eigen/Dense>

namespace movedg {

/// Quadrature rule on the reference triangle {x,y >= 0, x+y <= 1}.
/// Weights are strictly positive and sum to 1/2.
struct TriangleRule {
  Eigen::MatrixX2d points;  // one row per point
  Eigen::VectorXd weights;
  int exactness = 0;  // exact for all monomials of total degree <= exactness
  int size() const { return static_cast<int>(weights.size()); }
};

/// Quadrature rule on the reference segment [0,1]. Weights sum to 1.
struct SegmentRule {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
  int exactness = 0;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre nodes/weights on [0,1] for a given point count.
SegmentRule gauss_segment(int npoints);

/// Rule exact for polynomials of total degree <= exactness on the
/// reference triangle, built as a collapsed tensor-product Gauss rule.
TriangleRule make_volume_rule(int exactness);

/// Gauss rule on [0,1] exact for degree <= exactness.
SegmentRule make_edge_rule(int exactness);

/// Largest monomial-exactness defect |quadrature - exact| over all
/// monomials of total degree <= degree (relative to the exact value).
double monomial_defect(const TriangleRule& rule, int degree);
double monomial_defect(const SegmentRule& rule, int degree);

}  // namespace movedg
