#pragma once

// Textbook static-mesh interior-penalty operator with upwinding: the
// geometry factors are hard-wired to the identity (J = 1, F = I) and the
// diffusive edge flux uses the plain broken gradient. Kept independent of
// the transformed-operator path so it can serve as a regression oracle.

#include "movedg/forms.hpp"

namespace movedg::testing {

inline Eigen::VectorXd apply_static_ipg(const DGSpace& space, const DGField& u, double t,
                                        const VelocityModel& vel, const FormParams& p) {
  const int m = space.block_size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dofs());
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd vals = values_on_element(space, u, e);
    const Eigen::Matrix2Xd grads = gradients_on_element(space, u, e);
    auto acc = out.segment(static_cast<Eigen::Index>(e) * m, m);
    const Eigen::Matrix2d chain = space.maps[e].inv_frame.transpose();
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const double w = space.volume_rule.weights[q] * space.maps[e].det;
      const Eigen::Vector2d x = space.volume_point(e, q);
      const Eigen::Vector2d adv = vel.flow(t, x);  // frozen mesh: all advection remains
      const Eigen::Vector2d diff_w = chain.transpose() * (w * p.epsilon * grads.col(q));
      const double scal = w * (adv.dot(grads.col(q)) + p.gamma0 * vals[q]);
      acc += diff_w.x() * space.grad_vol[0].row(q).transpose() +
             diff_w.y() * space.grad_vol[1].row(q).transpose() +
             scal * space.phi_vol.row(q).transpose();
    }
  }
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    const int sides = edge.on_boundary() ? 1 : 2;
    const int elems[2] = {edge.left, edge.right};
    const double kappa = sides == 2 ? 0.5 : 1.0;
    const Eigen::VectorXd ul = values_on_edge(space, u, k, 0);
    const Eigen::VectorXd ur = sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
    const Eigen::Matrix2Xd gl = gradients_on_edge(space, u, k, 0);
    const Eigen::Matrix2Xd gr =
        sides == 2 ? gradients_on_edge(space, u, k, 1) : Eigen::Matrix2Xd();
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const double wq = space.edge_rule.weights[q] * edge.length;
      const Eigen::Vector2d x = space.edge_point(k, q);
      const double jump = sides == 2 ? ul[q] - ur[q] : ul[q];
      if (edge.tag != BoundaryTag::neumann) {
        Eigen::Vector2d avg = gl.col(q);
        if (sides == 2) avg = kappa * (gl.col(q) + gr.col(q));
        Eigen::Vector2d avg_n = avg;  // {{grad u}}
        for (int s = 0; s < sides; ++s) {
          const Eigen::Vector2d n_s = s == 0 ? edge.normal : Eigen::Vector2d(-edge.normal);
          auto acc = out.segment(static_cast<Eigen::Index>(elems[s]) * m, m);
          const auto phi = space.edge_tables[k][s].phi.row(q).transpose();
          acc -= (p.epsilon * wq * avg_n.dot(n_s)) * phi;
          acc += (p.alpha * p.epsilon / edge.length * wq * jump * n_s.dot(edge.normal)) * phi;
        }
        // theta-symmetrising term with the test-function flux
        for (int s = 0; s < sides; ++s) {
          const Eigen::Vector2d jump_vec = jump * edge.normal;
          auto acc = out.segment(static_cast<Eigen::Index>(elems[s]) * m, m);
          const auto& tab = space.edge_tables[k][s];
          const Eigen::Matrix2d chain = space.maps[elems[s]].inv_frame.transpose();
          for (int i = 0; i < m; ++i) {
            const Eigen::Vector2d gphi =
                chain * Eigen::Vector2d(tab.grad_ref[0](q, i), tab.grad_ref[1](q, i));
            acc[i] -= p.theta * p.epsilon * wq * kappa * gphi.dot(jump_vec);
          }
        }
      }
      const Eigen::Vector2d adv = vel.flow(t, x);
      for (int s = 0; s < sides; ++s) {
        const Eigen::Vector2d n_s = s == 0 ? edge.normal : Eigen::Vector2d(-edge.normal);
        if (adv.dot(n_s) < 0.0) {
          const auto phi = space.edge_tables[k][s].phi.row(q).transpose();
          out.segment(static_cast<Eigen::Index>(elems[s]) * m, m) -=
              (wq * adv.dot(jump * edge.normal)) * phi;
        }
      }
    }
  }
  return out;
}

inline Eigen::VectorXd static_load(const DGSpace& space, double t, const BoundaryData& data) {
  const int m = space.block_size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dofs());
  for (int e = 0; e < space.n_elements(); ++e) {
    auto acc = out.segment(static_cast<Eigen::Index>(e) * m, m);
    for (int q = 0; q < space.volume_rule.size(); ++q)
      acc += space.volume_rule.weights[q] * space.maps[e].det *
             data.source(t, space.volume_point(e, q)) * space.phi_vol.row(q).transpose();
  }
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag != BoundaryTag::neumann) continue;
    auto acc = out.segment(static_cast<Eigen::Index>(edge.left) * m, m);
    for (int q = 0; q < space.edge_rule.size(); ++q)
      acc += space.edge_rule.weights[q] * edge.length *
             data.neumann(t, space.edge_point(k, q)) *
             space.edge_tables[k][0].phi.row(q).transpose();
  }
  return out;
}

/// Static-mesh RK4 with the constant reference mass (J = 1).
inline void static_rk4_step(const DGSpace& space, DGField& u, double& t,
                            const VelocityModel& vel, const BoundaryData& data,
                            const FormParams& p, double dt) {
  MassOperator mass;
  mass.block = space.block_size();
  mass.blocks.resize(space.n_elements());
  mass.solvers.resize(space.n_elements());
  for (int e = 0; e < space.n_elements(); ++e) {
    mass.blocks[e] = space.maps[e].det * space.ref_mass;
    mass.solvers[e].compute(mass.blocks[e]);
  }
  auto rate = [&](const DGField& v, double tau) {
    return mass.solve(static_load(space, tau, data) - apply_static_ipg(space, v, tau, vel, p));
  };
  DGField tmp(space);
  const Eigen::VectorXd k1 = rate(u, t);
  tmp.coeff = u.coeff + 0.5 * dt * k1;
  const Eigen::VectorXd k2 = rate(tmp, t + 0.5 * dt);
  tmp.coeff = u.coeff + 0.5 * dt * k2;
  const Eigen::VectorXd k3 = rate(tmp, t + 0.5 * dt);
  tmp.coeff = u.coeff + dt * k3;
  const Eigen::VectorXd k4 = rate(tmp, t + dt);
  u.coeff += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  t += dt;
}

}  // namespace movedg::testing
