#include "movedg/forms.hpp"

#include <cmath>
#include <stdexcept>

namespace movedg {

BoundaryData zero_data() {
  BoundaryData d;
  d.source = [](double, const Eigen::Vector2d&) { return 0.0; };
  d.neumann = [](double, const Eigen::Vector2d&) { return 0.0; };
  return d;
}

Eigen::VectorXd MassOperator::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd out(rhs.size());
  for (size_t e = 0; e < solvers.size(); ++e)
    out.segment(e * block, block) = solvers[e].solve(rhs.segment(e * block, block));
  return out;
}

Eigen::VectorXd MassOperator::apply(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(u.size());
  for (size_t e = 0; e < blocks.size(); ++e)
    out.segment(e * block, block) = blocks[e] * u.segment(e * block, block);
  return out;
}

MassOperator assemble_mass(const DGSpace& space, const FlowState& state) {
  const int m = space.block_size(), nq = space.volume_rule.size();
  MassOperator mass;
  mass.block = m;
  mass.blocks.resize(space.n_elements());
  mass.solvers.resize(space.n_elements());
  for (int e = 0; e < space.n_elements(); ++e) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int q = 0; q < nq; ++q) {
      const double w = space.volume_rule.weights[q] * space.maps[e].det * state.at_volume(e, q).J;
      M += w * space.phi_vol.row(q).transpose() * space.phi_vol.row(q);
    }
    mass.blocks[e] = M;
    mass.solvers[e].compute(M);
    if (mass.solvers[e].info() != Eigen::Success)
      throw std::runtime_error("assemble_mass: block " + std::to_string(e) + " not SPD");
  }
  return mass;
}

DGField project_scalar(const DGSpace& space, const Eigen::MatrixXd& samples) {
  DGField out(space);
  const int nq = space.volume_rule.size();
  for (int e = 0; e < space.n_elements(); ++e) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.block_size());
    for (int q = 0; q < nq; ++q)
      b += space.volume_rule.weights[q] * samples(e, q) * space.phi_vol.row(q).transpose();
    out.elem(e) = space.ref_mass_llt.solve(b);
  }
  return out;
}

DGField project_weighted(const DGSpace& space, const FlowState& state,
                         const Eigen::MatrixXd& samples) {
  MassOperator mass = assemble_mass(space, state);
  DGField out(space);
  const int nq = space.volume_rule.size();
  for (int e = 0; e < space.n_elements(); ++e) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.block_size());
    for (int q = 0; q < nq; ++q) {
      const double w = space.volume_rule.weights[q] * space.maps[e].det * state.at_volume(e, q).J;
      b += w * samples(e, q) * space.phi_vol.row(q).transpose();
    }
    out.elem(e) = mass.solvers[e].solve(b);
  }
  return out;
}

std::array<DGField, 2> project_vector(const DGSpace& space, const Eigen::MatrixXd& sx,
                                      const Eigen::MatrixXd& sy) {
  return {project_scalar(space, sx), project_scalar(space, sy)};
}

FluxProjection project_metric_samples(const DGSpace& space, const Eigen::MatrixXd& sx,
                                      const Eigen::MatrixXd& sy) {
  FluxProjection flux{DGField(space), DGField(space)};
  const int nq = space.volume_rule.size();
  for (int e = 0; e < space.n_elements(); ++e) {
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(space.block_size());
    Eigen::VectorXd by = Eigen::VectorXd::Zero(space.block_size());
    for (int q = 0; q < nq; ++q) {
      const auto phi = space.phi_vol.row(q).transpose();
      bx += space.volume_rule.weights[q] * sx(e, q) * phi;
      by += space.volume_rule.weights[q] * sy(e, q) * phi;
    }
    flux.x.elem(e) = space.ref_mass_llt.solve(bx);
    flux.y.elem(e) = space.ref_mass_llt.solve(by);
  }
  return flux;
}

FluxProjection project_metric_flux(const DGSpace& space, const FlowState& state,
                                   const DGField& u) {
  const int nq = space.volume_rule.size();
  Eigen::MatrixXd sx(space.n_elements(), nq), sy(space.n_elements(), nq);
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::Matrix2Xd grad = gradients_on_element(space, u, e);
    for (int q = 0; q < nq; ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const Eigen::Vector2d g =
          std::sqrt(pk.J) * pk.F.inverse().transpose() * grad.col(q);
      sx(e, q) = g.x();
      sy(e, q) = g.y();
    }
  }
  return project_metric_samples(space, sx, sy);
}

namespace {

// Evaluate the projected-flux average at one edge quadrature point.
Eigen::Vector2d averaged_flux(const DGSpace& space, const FluxProjection& flux, int edge_id,
                              int q) {
  const Edge& edge = space.mesh.edges[edge_id];
  const int sides = edge.on_boundary() ? 1 : 2;
  Eigen::Vector2d avg = Eigen::Vector2d::Zero();
  for (int s = 0; s < sides; ++s) {
    const int e = s == 0 ? edge.left : edge.right;
    const auto phi = space.edge_tables[edge_id][s].phi.row(q);
    avg.x() += phi.dot(flux.x.elem(e));
    avg.y() += phi.dot(flux.y.elem(e));
  }
  return avg / sides;
}

}  // namespace

Eigen::VectorXd apply_ah(const DGSpace& space, const DGField& u, const FlowState& state,
                         const VelocityModel& vel, const FormParams& p) {
  if (u.degree != space.degree())
    throw std::invalid_argument("apply_ah: field/space degree mismatch");
  if (!(p.alpha > 0.0)) throw std::invalid_argument("apply_ah: alpha must be positive");
  const double t = state.time;
  const int m = space.block_size();
  const int nq = space.volume_rule.size();
  const int nqe = space.edge_rule.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dofs());

  const FluxProjection flux = project_metric_flux(space, state, u);

  // Volume terms: diffusion, remaining advection, reaction.
  for (int e = 0; e < space.n_elements(); ++e) {
    const AffineMap& map = space.maps[e];
    const auto ue = u.elem(e);
    const Eigen::VectorXd vals = space.phi_vol * ue;
    const Eigen::VectorXd gu0 = space.grad_vol[0] * ue;
    const Eigen::VectorXd gu1 = space.grad_vol[1] * ue;
    auto acc = out.segment(static_cast<Eigen::Index>(e) * m, m);
    for (int q = 0; q < nq; ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const Eigen::Matrix2d inv_trans = pk.F.inverse().transpose();
      const Eigen::Matrix2d chain = inv_trans * map.inv_frame.transpose();
      const Eigen::Vector2d grad_phys = chain * Eigen::Vector2d(gu0[q], gu1[q]);
      const Eigen::Vector2d adv = vel.residual(t, pk.x);
      const double w = space.volume_rule.weights[q] * map.det * pk.J;
      const Eigen::Vector2d diff_w = chain.transpose() * (w * p.epsilon * grad_phys);
      const double scal = w * (adv.dot(grad_phys) + p.gamma0 * vals[q]);
      acc += diff_w.x() * space.grad_vol[0].row(q).transpose() +
             diff_w.y() * space.grad_vol[1].row(q).transpose() +
             scal * space.phi_vol.row(q).transpose();
    }
  }

  // Edge terms. Jump/flux/penalty live on interior and Dirichlet edges;
  // upwinding of the remaining advection acts wherever the inflow indicator
  // says so, on any edge.
  Eigen::MatrixXd lift_x = Eigen::MatrixXd::Zero(m, space.n_elements());
  Eigen::MatrixXd lift_y = Eigen::MatrixXd::Zero(m, space.n_elements());
  std::vector<char> lifted(space.n_elements(), 0);
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    const bool coupled = edge.tag != BoundaryTag::neumann;  // in the E_D edge set
    const int sides = edge.on_boundary() ? 1 : 2;
    const double kappa = sides == 2 ? 0.5 : 1.0;
    const int elems[2] = {edge.left, edge.right};
    const Eigen::VectorXd trace_l = values_on_edge(space, u, k, 0);
    const Eigen::VectorXd trace_r =
        sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
    for (int q = 0; q < nqe; ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const Eigen::Matrix2d inv_trans = pk.F.inverse().transpose();
      const double wq = space.edge_rule.weights[q] * edge.length;
      const double jump_scalar = sides == 2 ? trace_l[q] - trace_r[q] : trace_l[q];
      const Eigen::Vector2d jump_vec = jump_scalar * edge.normal;
      const Eigen::Vector2d zeta = inv_trans * jump_vec;  // F^{-T} [[u]]
      const Eigen::Vector2d adv = vel.residual(t, pk.x);

      if (coupled) {
        const double sqj = std::sqrt(pk.J);
        const Eigen::Vector2d avg = averaged_flux(space, flux, k, q);
        for (int s = 0; s < sides; ++s) {
          const Eigen::Vector2d n_s = s == 0 ? edge.normal : Eigen::Vector2d(-edge.normal);
          const Eigen::Vector2d metric_n = inv_trans * n_s;
          const auto phi = space.edge_tables[k][s].phi.row(q).transpose();
          auto acc = out.segment(static_cast<Eigen::Index>(elems[s]) * m, m);
          acc -= (p.epsilon * wq * sqj * avg.dot(metric_n)) * phi;
          acc += (p.alpha * p.epsilon / edge.length * wq * pk.J * zeta.dot(metric_n)) * phi;
          lift_x.col(elems[s]) += (kappa * wq * sqj * zeta.x()) * phi;
          lift_y.col(elems[s]) += (kappa * wq * sqj * zeta.y()) * phi;
          lifted[elems[s]] = 1;
        }
      }

      // inflow part of each element boundary, decided per point
      const double upwind_scalar = pk.J * adv.dot(zeta);
      for (int s = 0; s < sides; ++s) {
        const Eigen::Vector2d n_s = s == 0 ? edge.normal : Eigen::Vector2d(-edge.normal);
        if (adv.dot(inv_trans * n_s) < 0.0) {
          const auto phi = space.edge_tables[k][s].phi.row(q).transpose();
          out.segment(static_cast<Eigen::Index>(elems[s]) * m, m) -= (wq * upwind_scalar) * phi;
        }
      }
    }
  }

  // theta-symmetrised flux term, moved onto a volume pass through the
  // self-adjointness of the elementwise projection.
  for (int e = 0; e < space.n_elements(); ++e) {
    if (!lifted[e]) continue;
    const AffineMap& map = space.maps[e];
    const Eigen::VectorXd cx = space.ref_mass_llt.solve(lift_x.col(e)) / map.det;
    const Eigen::VectorXd cy = space.ref_mass_llt.solve(lift_y.col(e)) / map.det;
    auto acc = out.segment(static_cast<Eigen::Index>(e) * m, m);
    for (int q = 0; q < nq; ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const Eigen::Matrix2d chain = pk.F.inverse().transpose() * map.inv_frame.transpose();
      const Eigen::Vector2d lift_val(space.phi_vol.row(q).dot(cx), space.phi_vol.row(q).dot(cy));
      const double w = space.volume_rule.weights[q] * map.det * std::sqrt(pk.J);
      const Eigen::Vector2d g = chain.transpose() * (p.theta * p.epsilon * w * lift_val);
      acc -= g.x() * space.grad_vol[0].row(q).transpose() +
             g.y() * space.grad_vol[1].row(q).transpose();
    }
  }

  return out;
}

double ah_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const VelocityModel& vel, const FormParams& p) {
  return v.coeff.dot(apply_ah(space, u, state, vel, p));
}

double dh_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const VelocityModel& vel, const FormParams& p) {
  const double t = state.time;
  double total = 0.0;
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd uv = values_on_element(space, u, e);
    const Eigen::VectorXd vv = values_on_element(space, v, e);
    const Eigen::Matrix2Xd gu = gradients_on_element(space, u, e);
    const Eigen::Matrix2Xd gv = gradients_on_element(space, v, e);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const Eigen::Matrix2d inv_trans = pk.F.inverse().transpose();
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      total += w * (p.epsilon * (inv_trans * gu.col(q)).dot(inv_trans * gv.col(q)) +
                    (p.gamma0 - vel.residual_divergence(t, pk.x)) * uv[q] * vv[q]);
    }
  }
  return total;
}

double fh_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const VelocityModel& vel) {
  const double t = state.time;
  double total = 0.0;
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd uv = values_on_element(space, u, e);
    const Eigen::Matrix2Xd gv = gradients_on_element(space, v, e);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      total -= w * vel.residual(t, pk.x).dot(pk.F.inverse().transpose() * gv.col(q)) * uv[q];
    }
  }
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    const int sides = edge.on_boundary() ? 1 : 2;
    const Eigen::VectorXd ul = values_on_edge(space, u, k, 0);
    const Eigen::VectorXd vl = values_on_edge(space, v, k, 0);
    const Eigen::VectorXd ur = sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
    const Eigen::VectorXd vr = sides == 2 ? values_on_edge(space, v, k, 1) : Eigen::VectorXd();
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const Eigen::Matrix2d inv_trans = pk.F.inverse().transpose();
      const double wq = space.edge_rule.weights[q] * edge.length;
      const Eigen::Vector2d adv = vel.residual(t, pk.x);
      const double vjump = sides == 2 ? vl[q] - vr[q] : vl[q];
      const double flux = pk.J * adv.dot(inv_trans * edge.normal) * vjump;
      for (int s = 0; s < sides; ++s) {
        const double sn = adv.dot(inv_trans * (s == 0 ? edge.normal : (-edge.normal).eval()));
        if (sn >= 0.0) total += wq * flux * (s == 0 ? ul[q] : ur[q]);
      }
    }
  }
  return total;
}

double jh_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                double alpha) {
  double total = 0.0;
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag == BoundaryTag::neumann) continue;
    const int sides = edge.on_boundary() ? 1 : 2;
    const Eigen::VectorXd ul = values_on_edge(space, u, k, 0);
    const Eigen::VectorXd vl = values_on_edge(space, v, k, 0);
    const Eigen::VectorXd ur = sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
    const Eigen::VectorXd vr = sides == 2 ? values_on_edge(space, v, k, 1) : Eigen::VectorXd();
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const Eigen::Matrix2d inv_trans = pk.F.inverse().transpose();
      const double wq = space.edge_rule.weights[q] * edge.length;
      const double ujump = sides == 2 ? ul[q] - ur[q] : ul[q];
      const double vjump = sides == 2 ? vl[q] - vr[q] : vl[q];
      const Eigen::Vector2d mn = inv_trans * edge.normal;
      total += alpha / edge.length * wq * pk.J * ujump * vjump * mn.squaredNorm();
    }
  }
  return total;
}

double ph_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const FormParams& p) {
  const FluxProjection fu = project_metric_flux(space, state, u);
  const FluxProjection fv = project_metric_flux(space, state, v);
  double total = 0.0;
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag == BoundaryTag::neumann) continue;
    const int sides = edge.on_boundary() ? 1 : 2;
    const Eigen::VectorXd ul = values_on_edge(space, u, k, 0);
    const Eigen::VectorXd vl = values_on_edge(space, v, k, 0);
    const Eigen::VectorXd ur = sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
    const Eigen::VectorXd vr = sides == 2 ? values_on_edge(space, v, k, 1) : Eigen::VectorXd();
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const Eigen::Matrix2d inv_trans = pk.F.inverse().transpose();
      const double wq = space.edge_rule.weights[q] * edge.length;
      const double sqj = std::sqrt(pk.J);
      const double ujump = sides == 2 ? ul[q] - ur[q] : ul[q];
      const double vjump = sides == 2 ? vl[q] - vr[q] : vl[q];
      const Eigen::Vector2d mn = inv_trans * edge.normal;
      const Eigen::Vector2d avg_u = averaged_flux(space, fu, k, q);
      const Eigen::Vector2d avg_v = averaged_flux(space, fv, k, q);
      total += wq * sqj * p.epsilon *
               (avg_u.dot(mn) * vjump + p.theta * avg_v.dot(mn) * ujump);
    }
  }
  return total;
}

Eigen::VectorXd assemble_lh(const DGSpace& space, const FlowState& state,
                            const BoundaryData& data) {
  const double t = state.time;
  const int m = space.block_size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dofs());
  for (int e = 0; e < space.n_elements(); ++e) {
    auto acc = out.segment(static_cast<Eigen::Index>(e) * m, m);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      acc += w * data.source(t, pk.x) * space.phi_vol.row(q).transpose();
    }
  }
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag != BoundaryTag::neumann) continue;
    auto acc = out.segment(static_cast<Eigen::Index>(edge.left) * m, m);
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const Eigen::Matrix2d inv_trans = pk.F.inverse().transpose();
      const double wq = space.edge_rule.weights[q] * edge.length;
      acc += wq * pk.J * data.neumann(t, pk.x) * (inv_trans * edge.normal).norm() *
             space.edge_tables[k][0].phi.row(q).transpose();
    }
  }
  return out;
}

Eigen::VectorXd semidiscrete_residual(const DGSpace& space, const DGField& u,
                                      const FlowState& state, const VelocityModel& vel,
                                      const BoundaryData& data, const FormParams& p) {
  return assemble_lh(space, state, data) - apply_ah(space, u, state, vel, p);
}

DGField averaging_operator(const DGSpace& space, const DGField& u) {
  DGField out(space);
  for (int g = 0; g < space.n_nodes; ++g) {
    double value = 0.0;
    if (!space.node_on_dirichlet[g]) {
      for (const auto& [e, j] : space.node_members[g]) value += u.elem(e)[j];
      value /= static_cast<double>(space.node_members[g].size());
    }
    for (const auto& [e, j] : space.node_members[g]) out.elem(e)[j] = value;
  }
  return out;
}

}  // namespace movedg
