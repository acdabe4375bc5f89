#include "movedg/time_loop.hpp"

#include <cmath>

namespace movedg {

namespace {

Eigen::VectorXd stage_rate(const DGSpace& space, const DGField& u, const FlowState& state,
                           const VelocityModel& vel, const BoundaryData& data,
                           const FormParams& p) {
  const MassOperator mass = assemble_mass(space, state);
  return mass.solve(semidiscrete_residual(space, u, state, vel, data, p));
}

DGField shifted(const DGSpace& space, const DGField& u, double a, const Eigen::VectorXd& k) {
  DGField v(space);
  v.coeff = u.coeff + a * k;
  return v;
}

StepDiagnostics diagnose(const DGSpace& space, const FlowState& state, const VelocityModel& vel,
                         int step, double dt) {
  StepDiagnostics d;
  d.step = step;
  d.t = state.time;
  d.min_volume_ratio = std::numeric_limits<double>::infinity();
  double vres = 0.0, vmesh = 0.0;
  for (const PointKinematics& p : state.volume) {
    d.min_volume_ratio = std::min(d.min_volume_ratio, p.J);
    vres = std::max(vres, vel.residual(state.time, p.x).norm());
    vmesh = std::max(vmesh, vel.mesh(state.time, p.x).norm());
  }
  const double hmin = space.mesh.min_edge_length();
  d.courant_residual = vres * dt / hmin;
  d.courant_mesh = vmesh * dt / hmin;
  return d;
}

}  // namespace

void rk4_step(const DGSpace& space, DGField& u, FlowState& state, const VelocityModel& vel,
              const BoundaryData& data, const TimeLoopConfig& cfg) {
  const double dt = cfg.dt;
  const double max_step = dt / cfg.substeps;

  const Eigen::VectorXd k1 = stage_rate(space, u, state, vel, data, cfg.params);

  FlowState half = state;
  advance_flow_state_to(half, vel, state.time + 0.5 * dt, max_step);
  const Eigen::VectorXd k2 =
      stage_rate(space, shifted(space, u, 0.5 * dt, k1), half, vel, data, cfg.params);
  const Eigen::VectorXd k3 =
      stage_rate(space, shifted(space, u, 0.5 * dt, k2), half, vel, data, cfg.params);

  FlowState full = state;
  advance_flow_state_to(full, vel, state.time + dt, max_step);
  const Eigen::VectorXd k4 =
      stage_rate(space, shifted(space, u, dt, k3), full, vel, data, cfg.params);

  u.coeff += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  state = std::move(full);
}

Trajectory run_time_loop(const DGSpace& space, const VelocityModel& vel, const BoundaryData& data,
                         const Eigen::MatrixXd& initial_samples, const TimeLoopConfig& cfg) {
  Trajectory traj;
  FlowState state = init_flow_state(space);
  DGField u = cfg.weighted_initial_projection ? project_weighted(space, state, initial_samples)
                                              : project_scalar(space, initial_samples);

  auto emit = [&](int step) {
    Snapshot snap;
    snap.step = step;
    snap.t = state.time;
    snap.u = u;
    snap.du_dt = stage_rate(space, u, state, vel, data, cfg.params);
    snap.state = state;
    if (cfg.with_indicators) {
      const PatchWeights weights =
          compute_patch_weights(space, state, vel, cfg.params.epsilon);
      snap.indicators =
          element_indicators(space, state, vel, data, weights, u, snap.du_dt, cfg.params);
      if (cfg.log)
        (*cfg.log) << "snapshot " << step << " eta1_sq " << snap.indicators.weighted_total_sq
                   << " eta2_sq " << snap.indicators.jump_rate_sq << " eta3_sq "
                   << snap.indicators.jump_size_sq << "\n";
    }
    traj.snapshots.push_back(std::move(snap));
  };

  emit(0);
  for (int step = 1; step <= cfg.steps; ++step) {
    rk4_step(space, u, state, vel, data, cfg);
    StepDiagnostics d = diagnose(space, state, vel, step, cfg.dt);
    traj.diagnostics.push_back(d);
    if (cfg.log)
      (*cfg.log) << "step " << d.step << " t " << d.t << " minJ " << d.min_volume_ratio
                 << " courant_res " << d.courant_residual << " courant_mesh " << d.courant_mesh
                 << "\n";
    const bool due = cfg.cadence > 0 && step % cfg.cadence == 0;
    if (due || step == cfg.steps) emit(step);
  }
  return traj;
}

}  // namespace movedg
