#include "movedg/estimators.hpp"

#include <cmath>

namespace movedg {

namespace {

struct ElementScan {
  double j_int = 0.0, j_max = 0.0;
  double a_int = 0.0, a_max = 0.0;
  double delta_max = 0.0, m_max = 0.0;
  double beta_min = std::numeric_limits<double>::infinity();
};

PatchScalars aggregate(const std::vector<int>& members, const std::vector<ElementScan>& scans,
                       const std::vector<double>& areas, double patch_area, double h, double eps,
                       double beta_floor) {
  PatchScalars s;
  (void)areas;
  double j_int = 0.0, a_int = 0.0;
  s.j_max = 0.0;
  s.a_max = 0.0;
  s.delta_max = 0.0;
  s.m_max = 0.0;
  double beta = std::numeric_limits<double>::infinity();
  for (int e : members) {
    j_int += scans[e].j_int;
    a_int += scans[e].a_int;
    s.j_max = std::max(s.j_max, scans[e].j_max);
    s.a_max = std::max(s.a_max, scans[e].a_max);
    s.delta_max = std::max(s.delta_max, scans[e].delta_max);
    s.m_max = std::max(s.m_max, scans[e].m_max);
    beta = std::min(beta, scans[e].beta_min);
  }
  s.j_mean = j_int / patch_area;
  s.a_mean = a_int / patch_area;
  s.beta = std::max(beta, beta_floor);
  const double diffusive = s.a_max * h / std::sqrt(eps);
  s.rho = s.beta > 0.0 ? std::min(diffusive, s.m_max / s.beta) : diffusive;
  return s;
}

}  // namespace

PatchWeights compute_patch_weights(const DGSpace& space, const FlowState& state,
                                   const VelocityModel& vel, double epsilon, double beta_min) {
  const double t = state.time;
  const int nq = space.volume_rule.size();
  std::vector<ElementScan> scans(space.n_elements());
  for (int e = 0; e < space.n_elements(); ++e) {
    ElementScan& scan = scans[e];
    for (int q = 0; q < nq; ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det;
      const double a = metric_stretch(pk.F, pk.J);
      const double delta = vel.residual(t, pk.x).squaredNorm();
      scan.j_int += w * pk.J;
      scan.a_int += w * a;
      scan.j_max = std::max(scan.j_max, pk.J);
      scan.a_max = std::max(scan.a_max, a);
      scan.delta_max = std::max(scan.delta_max, delta);
      scan.m_max = std::max(scan.m_max, 1.0 / pk.J);
      scan.beta_min = std::min(scan.beta_min, vel.reaction(t, pk.x));
    }
  }
  PatchWeights w;
  w.edge.resize(space.mesh.n_edges());
  for (int k = 0; k < space.mesh.n_edges(); ++k)
    w.edge[k] = aggregate(space.patches.edge_patch[k], scans, space.mesh.area,
                          space.patches.edge_patch_area[k], space.mesh.edges[k].length, epsilon,
                          beta_min);
  w.element.resize(space.n_elements());
  for (int e = 0; e < space.n_elements(); ++e)
    w.element[e] = aggregate(space.patches.element_patch[e], scans, space.mesh.area,
                             space.patches.element_patch_area[e], space.mesh.diameter[e], epsilon,
                             beta_min);
  return w;
}

namespace {

// Edge integrals shared by the jump indicator and the space-time criteria:
// the plain squared jump, the metric-weighted squared jump, the squared
// flux jump, and the squared jump of the rate field.
struct EdgeIntegrals {
  double jump_sq = 0.0;         // int [[u]]^2
  double metric_jump_sq = 0.0;  // int J (F^{-T}[[u]])^2
  double flux_jump_sq = 0.0;    // int (eps J F^{-1}F^{-T} [[grad u]] . n)^2
  double rate_jump_sq = 0.0;    // int [[du/dt]]^2
  double neumann_sq = 0.0;      // int (u_N - eps J F^{-1}F^{-T} grad u . n)^2
};

EdgeIntegrals edge_integrals(const DGSpace& space, const FlowState& state,
                             const BoundaryData& data, const DGField& u, const DGField& rate,
                             double epsilon, int k) {
  EdgeIntegrals out;
  const Edge& edge = space.mesh.edges[k];
  const int sides = edge.on_boundary() ? 1 : 2;
  const Eigen::VectorXd ul = values_on_edge(space, u, k, 0);
  const Eigen::VectorXd ur = sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
  const Eigen::VectorXd rl = values_on_edge(space, rate, k, 0);
  const Eigen::VectorXd rr = sides == 2 ? values_on_edge(space, rate, k, 1) : Eigen::VectorXd();
  const Eigen::Matrix2Xd gl = gradients_on_edge(space, u, k, 0);
  const Eigen::Matrix2Xd gr = sides == 2 ? gradients_on_edge(space, u, k, 1) : Eigen::Matrix2Xd();
  for (int q = 0; q < space.edge_rule.size(); ++q) {
    const PointKinematics& pk = state.at_edge(k, q);
    const double wq = space.edge_rule.weights[q] * edge.length;
    const Eigen::Matrix2d inv = pk.F.inverse();
    const Eigen::Matrix2d metric = pk.J * inv * inv.transpose();
    const double ujump = sides == 2 ? ul[q] - ur[q] : ul[q];
    const double rjump = sides == 2 ? rl[q] - rr[q] : rl[q];
    out.jump_sq += wq * ujump * ujump;
    out.rate_jump_sq += wq * rjump * rjump;
    out.metric_jump_sq += wq * pk.J * (inv.transpose() * (ujump * edge.normal)).squaredNorm();
    if (sides == 2) {
      const double fj = epsilon * edge.normal.dot(metric * (gl.col(q) - gr.col(q)));
      out.flux_jump_sq += wq * fj * fj;
    } else if (edge.tag == BoundaryTag::neumann) {
      const double fn = epsilon * edge.normal.dot(metric * gl.col(q));
      const double mis = data.neumann(state.time, pk.x) - fn;
      out.neumann_sq += wq * mis * mis;
    }
  }
  return out;
}

}  // namespace

IndicatorReport element_indicators(const DGSpace& space, const FlowState& state,
                                   const VelocityModel& vel, const BoundaryData& data,
                                   const PatchWeights& weights, const DGField& u,
                                   const Eigen::VectorXd& du_dt, const FormParams& p) {
  const double t = state.time;
  const int nel = space.n_elements();
  IndicatorReport rep;
  rep.jump_sq = Eigen::VectorXd::Zero(nel);
  rep.flux_sq = Eigen::VectorXd::Zero(nel);
  rep.residual_sq = Eigen::VectorXd::Zero(nel);

  DGField rate;
  rate.degree = u.degree;
  rate.block = u.block;
  rate.coeff = du_dt;
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    const PatchScalars& ws = weights.edge[k];
    const EdgeIntegrals integ = edge_integrals(space, state, data, u, rate, p.epsilon, k);
    const bool interior = !edge.on_boundary();
    const double share = interior ? 0.5 : 1.0;

    if (edge.tag != BoundaryTag::neumann) {
      const double jump_part =
          ws.beta * edge.length * ws.j_mean * integ.jump_sq +
          (ws.delta_max / p.epsilon * edge.length * ws.j_max +
           ws.a_mean * p.epsilon * p.alpha / edge.length) *
              ws.a_max * integ.metric_jump_sq;
      rep.jump_sq[edge.left] += share * jump_part;
      if (interior) rep.jump_sq[edge.right] += share * jump_part;
    }
    if (interior) {
      const double flux_part = ws.rho * std::sqrt(ws.a_max / p.epsilon) * integ.flux_jump_sq;
      rep.flux_sq[edge.left] += share * flux_part;
      rep.flux_sq[edge.right] += share * flux_part;
    } else if (edge.tag == BoundaryTag::neumann) {
      rep.flux_sq[edge.left] += ws.rho * std::sqrt(ws.a_max / p.epsilon) * integ.neumann_sq;
    }
    (void)vel;
  }

  // strong interior residual, weighted by the regime factor rho_K
  const int nq = space.volume_rule.size();
  for (int e = 0; e < nel; ++e) {
    const AffineMap& map = space.maps[e];
    const auto ue = u.elem(e);
    const auto re = du_dt.segment(static_cast<Eigen::Index>(e) * space.block_size(),
                                  space.block_size());
    double acc = 0.0;
    for (int q = 0; q < nq; ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * map.det;
      const Eigen::Matrix2d inv = pk.F.inverse();
      const Eigen::Matrix2d inv_trans = inv.transpose();
      const Eigen::Matrix2d metric = pk.J * inv * inv_trans;

      const Eigen::Vector2d grad_ref(space.grad_vol[0].row(q).dot(ue),
                                     space.grad_vol[1].row(q).dot(ue));
      const Eigen::Vector2d grad_mesh = map.inv_frame.transpose() * grad_ref;
      Eigen::Matrix2d hess_ref;
      hess_ref << space.hess_vol[0].row(q).dot(ue), space.hess_vol[1].row(q).dot(ue),
          space.hess_vol[1].row(q).dot(ue), space.hess_vol[2].row(q).dot(ue);
      const Eigen::Matrix2d hess_mesh =
          map.inv_frame.transpose() * hess_ref * map.inv_frame;

      // d/dX_i of the metric JF^{-1}F^{-T}, from the integrated dF blocks
      double divergence = (metric * hess_mesh).trace();
      for (int i = 0; i < 2; ++i) {
        const Eigen::Matrix2d dinv = -inv * pk.dF[i] * inv;
        const double dj = pk.J * (inv * pk.dF[i]).trace();
        const Eigen::Matrix2d dmetric =
            dj * inv * inv_trans + pk.J * dinv * inv_trans + pk.J * inv * dinv.transpose();
        divergence += dmetric.row(i).dot(grad_mesh);
      }

      const double rate = space.phi_vol.row(q).dot(re);
      const double strong = pk.J * data.source(t, pk.x) - pk.J * rate +
                            p.epsilon * divergence -
                            pk.J * vel.residual(t, pk.x).dot(inv_trans * grad_mesh);
      acc += w * strong * strong;
    }
    rep.residual_sq[e] = weights.element[e].rho * weights.element[e].rho * acc;
  }

  rep.total_sq = rep.jump_sq + rep.flux_sq + rep.residual_sq;
  rep.weighted_total_sq = (1.0 + 1.0 / p.alpha) * rep.total_sq.sum();
  space_time_indicators(space, state, weights, u, du_dt, p.alpha, rep.jump_rate_sq,
                        rep.jump_size_sq);
  return rep;
}

void space_time_indicators(const DGSpace& space, const FlowState& state,
                           const PatchWeights& weights, const DGField& u,
                           const Eigen::VectorXd& du_dt, double alpha, double& jump_rate_sq,
                           double& jump_size_sq) {
  (void)alpha;
  jump_rate_sq = 0.0;
  jump_size_sq = 0.0;
  BoundaryData dummy = zero_data();
  DGField rate;
  rate.degree = u.degree;
  rate.block = u.block;
  rate.coeff = du_dt;
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag == BoundaryTag::neumann) continue;
    const EdgeIntegrals integ = edge_integrals(space, state, dummy, u, rate, 0.0, k);
    jump_rate_sq += edge.length * weights.edge[k].j_mean * integ.rate_jump_sq;
    jump_size_sq += edge.length * weights.edge[k].j_mean * integ.jump_sq;
  }
}

NormReport field_norms(const DGSpace& space, const FlowState& state, const VelocityModel& vel,
                       const DGField& u, const FormParams& p, double beta_min) {
  const double t = state.time;
  NormReport rep;
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd vals = values_on_element(space, u, e);
    const Eigen::Matrix2Xd grads = gradients_on_element(space, u, e);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      const double beta = std::max(vel.reaction(t, pk.x), beta_min);
      rep.weighted_l2_sq += w * vals[q] * vals[q];
      rep.weighted_h1_sq += w * (pk.F.inverse().transpose() * grads.col(q)).squaredNorm();
      rep.energy_sq += w * (beta * vals[q] * vals[q]);
    }
  }
  rep.jump_sq = jh_value(space, u, u, state, p.alpha);
  rep.energy_sq += p.epsilon * (rep.weighted_h1_sq + rep.jump_sq);
  return rep;
}

void SharpNormAccumulator::add(double t, double l2_sq, double energy_sq) {
  max_l2_sq_ = std::max(max_l2_sq_, l2_sq);
  if (has_prev_) integral_ += 0.5 * (t - prev_t_) * (energy_sq + prev_energy_);
  prev_t_ = t;
  prev_energy_ = energy_sq;
  has_prev_ = true;
}

void TimeIntegral::add(double t, double value) {
  if (has_prev_) integral_ += 0.5 * (t - prev_t_) * (value + prev_v_);
  prev_t_ = t;
  prev_v_ = value;
  has_prev_ = true;
}

}  // namespace movedg
