#include "movedg/flowmap.hpp"

#include <cmath>
#include <cstdio>

namespace movedg {

namespace {

// Time derivative of the full kinematic state of one point. With
// G = grad(mesh velocity) at the current position:
//   x'    = mesh velocity
//   F'    = G F
//   dFi'  = (dGi) F + G dFi            with dGi = sum_k F_ki d_xk G
//   dFij' = (dGij) F + dGi dFj + dGj dFi + G dFij
// where dGij carries both the trajectory curvature (through dF) and the
// second spatial derivatives of G.
struct Derivative {
  Eigen::Vector2d x;
  Eigen::Matrix2d F;
  std::array<Eigen::Matrix2d, 2> dF;
  std::array<Eigen::Matrix2d, 3> d2F;
  double J;
};

Derivative rhs(const PointKinematics& s, const VelocityModel& vel, double t) {
  Derivative d;
  d.x = vel.mesh(t, s.x);
  const Eigen::Matrix2d G = vel.mesh_gradient(t, s.x);
  d.F = G * s.F;
  d.J = s.J * G.trace();

  const auto Gx = vel.mesh_gradient_dx(t, s.x);
  std::array<Eigen::Matrix2d, 2> dG;
  for (int i = 0; i < 2; ++i) dG[i] = s.F(0, i) * Gx[0] + s.F(1, i) * Gx[1];
  for (int i = 0; i < 2; ++i) d.dF[i] = dG[i] * s.F + G * s.dF[i];

  const auto Gxx = vel.mesh_gradient_dxx(t, s.x);
  auto second = [&](int i, int j, const Eigen::Matrix2d& dFij) {
    // d_ij x_k = (dF_j)(k, i)
    Eigen::Matrix2d dGij = s.dF[j](0, i) * Gx[0] + s.dF[j](1, i) * Gx[1];
    dGij += s.F(0, i) * (s.F(0, j) * Gxx[0] + s.F(1, j) * Gxx[1]) +
            s.F(1, i) * (s.F(0, j) * Gxx[1] + s.F(1, j) * Gxx[2]);
    return (dGij * s.F + dG[i] * s.dF[j] + dG[j] * s.dF[i] + G * dFij).eval();
  };
  d.d2F[0] = second(0, 0, s.d2F[0]);
  d.d2F[1] = second(0, 1, s.d2F[1]);
  d.d2F[2] = second(1, 1, s.d2F[2]);
  return d;
}

PointKinematics axpy(const PointKinematics& s, double a, const Derivative& d) {
  PointKinematics out;
  out.x = s.x + a * d.x;
  out.F = s.F + a * d.F;
  for (int i = 0; i < 2; ++i) out.dF[i] = s.dF[i] + a * d.dF[i];
  for (int i = 0; i < 3; ++i) out.d2F[i] = s.d2F[i] + a * d.d2F[i];
  out.J = s.J + a * d.J;
  return out;
}

void rk4_point(PointKinematics& s, const VelocityModel& vel, double t, double dt) {
  const Derivative k1 = rhs(s, vel, t);
  const Derivative k2 = rhs(axpy(s, 0.5 * dt, k1), vel, t + 0.5 * dt);
  const Derivative k3 = rhs(axpy(s, 0.5 * dt, k2), vel, t + 0.5 * dt);
  const Derivative k4 = rhs(axpy(s, dt, k3), vel, t + dt);
  const double c = dt / 6.0;
  s.x += c * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  s.F += c * (k1.F + 2 * k2.F + 2 * k3.F + k4.F);
  for (int i = 0; i < 2; ++i) s.dF[i] += c * (k1.dF[i] + 2 * k2.dF[i] + 2 * k3.dF[i] + k4.dF[i]);
  for (int i = 0; i < 3; ++i)
    s.d2F[i] += c * (k1.d2F[i] + 2 * k2.d2F[i] + 2 * k3.d2F[i] + k4.d2F[i]);
  s.J += c * (k1.J + 2 * k2.J + 2 * k3.J + k4.J);
}

void track(std::vector<PointKinematics>& pts, const VelocityModel& vel, double t0, double dt,
           int substeps) {
  const double h = dt / substeps;
  for (PointKinematics& p : pts)
    for (int k = 0; k < substeps; ++k) rk4_point(p, vel, t0 + k * h, h);
}

}  // namespace

FlowState init_flow_state(const DGSpace& space) {
  FlowState state;
  state.time = 0.0;
  state.nq_vol = space.volume_rule.size();
  state.nq_edge = space.edge_rule.size();
  state.block = space.block_size();
  state.volume.resize(static_cast<size_t>(space.n_elements()) * state.nq_vol);
  state.edge.resize(static_cast<size_t>(space.mesh.n_edges()) * state.nq_edge);
  state.node.resize(static_cast<size_t>(space.n_elements()) * state.block);
  for (int e = 0; e < space.n_elements(); ++e) {
    for (int q = 0; q < state.nq_vol; ++q)
      state.volume[static_cast<size_t>(e) * state.nq_vol + q].x = space.volume_point(e, q);
    for (int j = 0; j < state.block; ++j)
      state.node[static_cast<size_t>(e) * state.block + j].x = space.node_point(e, j);
  }
  for (int k = 0; k < space.mesh.n_edges(); ++k)
    for (int q = 0; q < state.nq_edge; ++q)
      state.edge[static_cast<size_t>(k) * state.nq_edge + q].x = space.edge_point(k, q);
  return state;
}

void advance_flow_state(FlowState& state, const VelocityModel& vel, double dt, int substeps) {
  if (dt <= 0.0) throw std::invalid_argument("advance_flow_state: dt must be positive");
  if (substeps < 1) throw std::invalid_argument("advance_flow_state: substeps must be >= 1");
  track(state.volume, vel, state.time, dt, substeps);
  track(state.edge, vel, state.time, dt, substeps);
  track(state.node, vel, state.time, dt, substeps);
  state.time += dt;
  for (const auto* family : {&state.volume, &state.edge, &state.node})
    for (const PointKinematics& p : *family)
      if (!(p.J > 0.0) || !(p.F.determinant() > 0.0))
        throw EntanglementError(state.time, p.x);
}

void advance_flow_state_to(FlowState& state, const VelocityModel& vel, double target_time,
                           double max_step) {
  const double span = target_time - state.time;
  if (span <= 0.0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(span / max_step - 1e-12)));
  advance_flow_state(state, vel, span, n);
  state.time = target_time;  // avoid drift from repeated accumulation
}

KinematicResiduals kinematic_residuals(const FlowState& state) {
  KinematicResiduals r;
  r.min_volume_ratio = std::numeric_limits<double>::infinity();
  for (const auto* family : {&state.volume, &state.edge, &state.node}) {
    for (const PointKinematics& p : *family) {
      r.max_det_gap = std::max(r.max_det_gap, std::abs(p.J - p.F.determinant()));
      r.min_volume_ratio = std::min(r.min_volume_ratio, p.J);
      r.max_j_deviation = std::max(r.max_j_deviation, std::abs(p.J - 1.0));
      // columns of dF are second derivatives of x; mixed ones must agree
      r.max_mixed_partial_gap =
          std::max(r.max_mixed_partial_gap, (p.dF[0].col(1) - p.dF[1].col(0)).norm());
    }
  }
  return r;
}

double metric_stretch(const Eigen::Matrix2d& F, double J) {
  const Eigen::Matrix2d inv = F.inverse();
  const Eigen::Matrix2d A = J * inv * inv.transpose();
  const double half_trace = 0.5 * (A(0, 0) + A(1, 1));
  const double disc = 0.25 * (A(0, 0) - A(1, 1)) * (A(0, 0) - A(1, 1)) + A(0, 1) * A(0, 1);
  return half_trace + std::sqrt(std::max(disc, 0.0));
}

MetricFactorDerivatives::MetricFactorDerivatives(const PointKinematics& point) {
  // consistent chain rule throughout: T_i = tr(F^{-1} dF_i) is the i-th
  // reference derivative of log det F
  const double det = point.F.determinant();
  const double sqj = std::sqrt(det);
  const Eigen::Matrix2d inv = point.F.inverse();
  const Eigen::Matrix2d inv_t = inv.transpose();
  W = sqj * inv_t;
  double trace[2];
  std::array<Eigen::Matrix2d, 2> dinv_t;
  for (int i = 0; i < 2; ++i) {
    trace[i] = (inv * point.dF[i]).trace();
    dinv_t[i] = -inv_t * point.dF[i].transpose() * inv_t;
    dW[i] = 0.5 * trace[i] * W + sqj * dinv_t[i];
  }
  auto d2f = [&point](int i, int j) { return point.d2F[i + j]; };
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double dtrace =
          (-inv * point.dF[j] * inv * point.dF[i] + inv * d2f(i, j)).trace();
      const Eigen::Matrix2d dginv =
          -(dinv_t[j] * point.dF[i].transpose() * inv_t +
            inv_t * d2f(i, j).transpose() * inv_t +
            inv_t * point.dF[i].transpose() * dinv_t[j]);
      d2W[2 * i + j] = 0.5 * dtrace * W + 0.5 * trace[i] * dW[j] +
                       0.5 * sqj * trace[j] * dinv_t[i] + sqj * dginv;
    }
  }
}

GeometricFactors geometric_factors(const PointKinematics& point, const VelocityModel& vel,
                                   double t) {
  if (!(point.J > 0.0)) throw EntanglementError(t, point.x);
  GeometricFactors g;
  g.J = point.J;
  g.inv_ratio = 1.0 / point.J;
  g.inv_trans = point.F.inverse().transpose();
  g.stretch = metric_stretch(point.F, point.J);
  g.residual_sq = vel.residual(t, point.x).squaredNorm();
  if (!std::isfinite(g.stretch) || !std::isfinite(g.residual_sq))
    throw std::runtime_error("geometric_factors: non-finite entries");
  return g;
}

std::string dump_flow_state(const FlowState& state) {
  std::string out = "point,t,x,y,F00,F01,F10,F11,J\n";
  char line[320];
  int id = 0;
  for (const auto* family : {&state.volume, &state.edge, &state.node}) {
    for (const PointKinematics& p : *family) {
      const int k = std::snprintf(line, sizeof line,
                                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", id++,
                                  state.time, p.x.x(), p.x.y(), p.F(0, 0), p.F(0, 1), p.F(1, 0),
                                  p.F(1, 1), p.J);
      out.append(line, static_cast<size_t>(k));
    }
  }
  return out;
}

}  // namespace movedg
