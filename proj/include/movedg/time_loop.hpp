#pragma once

#include <ostream>
#include <vector>

#include "movedg/estimators.hpp"
#include "movedg/forms.hpp"

namespace movedg {

struct TimeLoopConfig {
  double dt = 0.0;
  int steps = 0;
  int substeps = 2;  // flow-map RK4 steps per DG step
  FormParams params;
  int cadence = 1;  // snapshot every k-th step; 0 and the last step always emit
  bool weighted_initial_projection = true;
  bool with_indicators = false;  // attach an IndicatorReport to each snapshot
  std::ostream* log = nullptr;
};

struct Snapshot {
  int step = 0;
  double t = 0.0;
  DGField u;
  Eigen::VectorXd du_dt;  // M^{-1} r at this level
  FlowState state;
  IndicatorReport indicators;  // filled when the loop runs with indicators
};

struct StepDiagnostics {
  int step = 0;
  double t = 0.0;
  double min_volume_ratio = 1.0;
  double courant_residual = 0.0;  // max |V - mesh| dt / h_min
  double courant_mesh = 0.0;      // max |mesh| dt / h_min
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<StepDiagnostics> diagnostics;
};

/// One classical RK4 step of M(t) du/dt = l_h - a_h(u). Every stage
/// advances a private copy of the step-start flow state to its own time
/// (mass and forms are reassembled there) and solves the block system.
void rk4_step(const DGSpace& space, DGField& u, FlowState& state, const VelocityModel& vel,
              const BoundaryData& data, const TimeLoopConfig& cfg);

/// Run `steps` RK4 steps from the projected initial data, emitting
/// snapshots at the configured cadence.
Trajectory run_time_loop(const DGSpace& space, const VelocityModel& vel, const BoundaryData& data,
                         const Eigen::MatrixXd& initial_samples, const TimeLoopConfig& cfg);

}  // namespace movedg
