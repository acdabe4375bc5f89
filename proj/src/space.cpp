#include "movedg/space.hpp"

#include <map>
#include <stdexcept>

namespace movedg {

DGSpace make_space(Mesh mesh, int degree, int volume_exactness, int edge_exactness) {
  DGSpace s(std::move(mesh), degree);
  s.patches = build_connectivity(s.mesh);
  if (volume_exactness < 0) volume_exactness = 2 * degree + 4;
  if (edge_exactness < 0) edge_exactness = 2 * degree + 4;
  s.volume_rule = make_volume_rule(volume_exactness);
  s.edge_rule = make_edge_rule(edge_exactness);

  const int m = s.basis.size();
  const int nel = s.mesh.n_elements();

  s.phi_vol = s.basis.values(s.volume_rule.points);
  s.grad_vol = s.basis.gradients(s.volume_rule.points);
  s.hess_vol = s.basis.second_derivatives(s.volume_rule.points);

  s.ref_mass.setZero(m, m);
  for (int q = 0; q < s.volume_rule.size(); ++q)
    s.ref_mass += s.volume_rule.weights[q] * s.phi_vol.row(q).transpose() * s.phi_vol.row(q);
  s.ref_mass_llt.compute(s.ref_mass);
  if (s.ref_mass_llt.info() != Eigen::Success)
    throw std::runtime_error("make_space: reference mass matrix not SPD");

  s.maps.resize(nel);
  for (int e = 0; e < nel; ++e) {
    const auto& el = s.mesh.elements[e];
    AffineMap& map = s.maps[e];
    map.origin = s.mesh.vertices[el[0]];
    map.frame.col(0) = s.mesh.vertices[el[1]] - map.origin;
    map.frame.col(1) = s.mesh.vertices[el[2]] - map.origin;
    map.det = map.frame.determinant();
    map.inv_frame = map.frame.inverse();
  }

  // Edge quadrature points are defined once per edge; each incident element
  // evaluates its basis at the pulled-back reference coordinates.
  const int nqe = s.edge_rule.size();
  s.edge_tables.resize(s.mesh.n_edges());
  for (int k = 0; k < s.mesh.n_edges(); ++k) {
    const Edge& edge = s.mesh.edges[k];
    const Eigen::Vector2d a = s.mesh.vertices[edge.v[0]];
    const Eigen::Vector2d b = s.mesh.vertices[edge.v[1]];
    const int sides = edge.on_boundary() ? 1 : 2;
    for (int side = 0; side < sides; ++side) {
      const int e = side == 0 ? edge.left : edge.right;
      Eigen::MatrixX2d ref(nqe, 2);
      for (int q = 0; q < nqe; ++q) {
        const Eigen::Vector2d x = a + s.edge_rule.points[q] * (b - a);
        ref.row(q) = (s.maps[e].inv_frame * (x - s.maps[e].origin)).transpose();
      }
      EdgeSideTables& tab = s.edge_tables[k][side];
      tab.phi = s.basis.values(ref);
      tab.grad_ref = s.basis.gradients(ref);
    }
  }

  // Conforming Lagrange-node identification: vertex nodes key on the mesh
  // vertex, edge nodes key on (edge, slot along the canonical direction),
  // interior nodes stay private to their element.
  const int p = degree;
  s.node_of.assign(static_cast<size_t>(nel) * m, -1);
  s.node_coords.resize(static_cast<size_t>(nel) * m);
  std::map<std::pair<int, int>, int> vertex_nodes;   // (vertex, -) -> node
  std::map<std::pair<int, int>, int> edge_nodes;     // (edge, slot) -> node
  auto new_node = [&s]() {
    s.node_members.emplace_back();
    return s.n_nodes++;
  };
  for (int e = 0; e < nel; ++e) {
    const auto& el = s.mesh.elements[e];
    for (int j = 0; j < m; ++j) {
      const NodePlacement& pl = s.basis.placements()[j];
      int gid = -1;
      if (pl.kind == NodePlacement::vertex) {
        auto [it, inserted] = vertex_nodes.try_emplace({el[pl.index], 0}, -1);
        if (inserted) it->second = new_node();
        gid = it->second;
      } else if (pl.kind == NodePlacement::edge) {
        const int edge_id = s.mesh.element_edges[e][pl.index];
        const int va = el[pl.index];
        const int vb = el[(pl.index + 1) % 3];
        const int slot = va < vb ? pl.slot : p - pl.slot;
        auto [it, inserted] = edge_nodes.try_emplace({edge_id, slot}, -1);
        if (inserted) it->second = new_node();
        gid = it->second;
      } else {
        gid = new_node();
      }
      s.node_of[static_cast<size_t>(e) * m + j] = gid;
      s.node_members[gid].emplace_back(e, j);
      s.node_coords[static_cast<size_t>(e) * m + j] =
          s.maps[e].origin + s.maps[e].frame * s.basis.nodes().row(j).transpose();
    }
  }
  s.node_on_dirichlet.assign(s.n_nodes, false);
  for (int k = 0; k < s.mesh.n_edges(); ++k) {
    if (s.mesh.edges[k].tag != BoundaryTag::dirichlet) continue;
    for (int slot = 1; slot <= p - 1; ++slot) {
      auto it = edge_nodes.find({k, slot});
      if (it != edge_nodes.end()) s.node_on_dirichlet[it->second] = true;
    }
    for (int v : s.mesh.edges[k].v) {
      auto it = vertex_nodes.find({v, 0});
      if (it != vertex_nodes.end()) s.node_on_dirichlet[it->second] = true;
    }
  }

  s.constants = measure_inequality_constants(
      s.basis, {s.mesh.vertices[s.mesh.elements[0][0]], s.mesh.vertices[s.mesh.elements[0][1]],
                s.mesh.vertices[s.mesh.elements[0][2]]});
  return s;
}

Eigen::VectorXd values_on_element(const DGSpace& space, const DGField& u, int element) {
  return space.phi_vol * u.elem(element);
}

Eigen::Matrix2Xd gradients_on_element(const DGSpace& space, const DGField& u, int element) {
  const auto c = u.elem(element);
  Eigen::Matrix2Xd g(2, space.volume_rule.size());
  g.row(0) = (space.grad_vol[0] * c).transpose();
  g.row(1) = (space.grad_vol[1] * c).transpose();
  return space.maps[element].inv_frame.transpose() * g;
}

Eigen::VectorXd values_on_edge(const DGSpace& space, const DGField& u, int edge, int side) {
  const int e = side == 0 ? space.mesh.edges[edge].left : space.mesh.edges[edge].right;
  return space.edge_tables[edge][side].phi * u.elem(e);
}

Eigen::Matrix2Xd gradients_on_edge(const DGSpace& space, const DGField& u, int edge, int side) {
  const int e = side == 0 ? space.mesh.edges[edge].left : space.mesh.edges[edge].right;
  const auto c = u.elem(e);
  Eigen::Matrix2Xd g(2, space.edge_rule.size());
  g.row(0) = (space.edge_tables[edge][side].grad_ref[0] * c).transpose();
  g.row(1) = (space.edge_tables[edge][side].grad_ref[1] * c).transpose();
  return space.maps[e].inv_frame.transpose() * g;
}

}  // namespace movedg
