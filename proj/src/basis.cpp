#include "movedg/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace movedg {

ReferenceBasis::ReferenceBasis(int degree) : degree_(degree) {
  if (degree < 1 || degree > 4)
    throw std::invalid_argument("ReferenceBasis: degree must be in [1,4]");
  size_ = (degree + 1) * (degree + 2) / 2;
  nodes_.resize(size_, 2);
  powers_.resize(size_, 2);
  placements_.resize(size_);

  const int p = degree;
  int row = 0, mono = 0, interior = 0;
  for (int total = 0; total <= p; ++total) {
    for (int a = total; a >= 0; --a) {
      powers_(mono, 0) = a;
      powers_(mono, 1) = total - a;
      ++mono;
    }
  }
  for (int i = 0; i + 0 <= p; ++i) {
    for (int j = 0; i + j <= p; ++j, ++row) {
      nodes_(row, 0) = static_cast<double>(i) / p;
      nodes_(row, 1) = static_cast<double>(j) / p;
      NodePlacement& pl = placements_[row];
      if (i == 0 && j == 0) {
        pl = {NodePlacement::vertex, 0, 0};
      } else if (i == p && j == 0) {
        pl = {NodePlacement::vertex, 1, 0};
      } else if (i == 0 && j == p) {
        pl = {NodePlacement::vertex, 2, 0};
      } else if (j == 0) {
        pl = {NodePlacement::edge, 0, i};  // vertex0 -> vertex1
      } else if (i + j == p) {
        pl = {NodePlacement::edge, 1, j};  // vertex1 -> vertex2
      } else if (i == 0) {
        pl = {NodePlacement::edge, 2, p - j};  // vertex2 -> vertex0
      } else {
        pl = {NodePlacement::interior, interior++, 0};
      }
    }
  }

  Eigen::MatrixXd vandermonde = monomials(nodes_, 0, 0);
  coeff_ = vandermonde.fullPivLu().inverse();
}

Eigen::MatrixXd ReferenceBasis::monomials(const Eigen::MatrixX2d& pts, int dx, int dy) const {
  const int npts = static_cast<int>(pts.rows());
  Eigen::MatrixXd out(npts, size_);
  for (int k = 0; k < size_; ++k) {
    const int a = powers_(k, 0), b = powers_(k, 1);
    double factor = 1.0;
    for (int d = 0; d < dx; ++d) factor *= a - d;
    for (int d = 0; d < dy; ++d) factor *= b - d;
    const int ea = std::max(a - dx, 0), eb = std::max(b - dy, 0);
    if (a - dx < 0 || b - dy < 0) factor = 0.0;
    for (int q = 0; q < npts; ++q)
      out(q, k) = factor * std::pow(pts(q, 0), ea) * std::pow(pts(q, 1), eb);
  }
  return out;
}

Eigen::MatrixXd ReferenceBasis::values(const Eigen::MatrixX2d& pts) const {
  return monomials(pts, 0, 0) * coeff_;
}

std::array<Eigen::MatrixXd, 2> ReferenceBasis::gradients(const Eigen::MatrixX2d& pts) const {
  return {monomials(pts, 1, 0) * coeff_, monomials(pts, 0, 1) * coeff_};
}

std::array<Eigen::MatrixXd, 3> ReferenceBasis::second_derivatives(const Eigen::MatrixX2d& pts) const {
  return {monomials(pts, 2, 0) * coeff_, monomials(pts, 1, 1) * coeff_,
          monomials(pts, 0, 2) * coeff_};
}

ReferenceBasis make_basis(int degree) { return ReferenceBasis(degree); }

InequalityConstants measure_inequality_constants(const ReferenceBasis& basis,
                                                 const std::array<Eigen::Vector2d, 3>& tri) {
  const int m = basis.size();
  const Eigen::Vector2d e1 = tri[1] - tri[0], e2 = tri[2] - tri[0];
  Eigen::Matrix2d frame;
  frame.col(0) = e1;
  frame.col(1) = e2;
  const double det = frame.determinant();
  if (det <= 0) throw std::invalid_argument("measure_inequality_constants: bad orientation");
  const Eigen::Matrix2d inv_t = frame.inverse().transpose();

  TriangleRule vol = make_volume_rule(2 * basis.degree() + 2);
  Eigen::MatrixXd phi = basis.values(vol.points);
  auto grad = basis.gradients(vol.points);

  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(m, m);
  for (int q = 0; q < vol.size(); ++q) {
    const double w = vol.weights[q] * det;
    mass += w * phi.row(q).transpose() * phi.row(q);
    Eigen::MatrixXd g(2, m);
    g.row(0) = grad[0].row(q);
    g.row(1) = grad[1].row(q);
    Eigen::MatrixXd gx = inv_t * g;  // physical gradients
    stiff += w * gx.transpose() * gx;
  }

  SegmentRule seg = make_edge_rule(2 * basis.degree());
  Eigen::MatrixXd bmass = Eigen::MatrixXd::Zero(m, m);
  const std::array<std::array<Eigen::Vector2d, 2>, 3> ref_edges = {{
      {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)},
      {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)},
      {Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0)},
  }};
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector2d pa = tri[e], pb = tri[(e + 1) % 3];
    const double len = (pb - pa).norm();
    Eigen::MatrixX2d pts(seg.size(), 2);
    for (int q = 0; q < seg.size(); ++q)
      pts.row(q) = ref_edges[e][0] + seg.points[q] * (ref_edges[e][1] - ref_edges[e][0]);
    Eigen::MatrixXd phie = basis.values(pts);
    for (int q = 0; q < seg.size(); ++q)
      bmass += seg.weights[q] * len * phie.row(q).transpose() * phie.row(q);
  }

  const double diam = std::max({(tri[1] - tri[0]).norm(), (tri[2] - tri[1]).norm(),
                                (tri[0] - tri[2]).norm()});
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> trace_eig(bmass, mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> inv_eig(stiff, mass);
  InequalityConstants c;
  c.trace = diam * trace_eig.eigenvalues().maxCoeff();
  c.inverse = diam * std::sqrt(inv_eig.eigenvalues().maxCoeff());
  return c;
}

double default_penalty(const ReferenceBasis& basis, const std::array<Eigen::Vector2d, 3>& tri) {
  return std::max(10.0, 2.0 * measure_inequality_constants(basis, tri).trace);
}

}  // namespace movedg
