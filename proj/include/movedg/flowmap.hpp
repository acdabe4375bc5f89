#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <vector>

#include "movedg/space.hpp"
#include "movedg/velocity.hpp"

namespace movedg {

/// Raised when the flow map loses injectivity (J <= 0) at some tracked
/// point. Fatal by design: resolution is an operator decision.
class EntanglementError : public std::runtime_error {
 public:
  EntanglementError(double time, const Eigen::Vector2d& where)
      : std::runtime_error("flow map entangled (J <= 0) at t=" + std::to_string(time)),
        time(time), position(where) {}
  double time;
  Eigen::Vector2d position;
};

/// Kinematic state of one tracked point: current position, deformation
/// gradient F = dx/dX, its first and second reference derivatives, and the
/// separately integrated volume ratio J.
struct PointKinematics {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  Eigen::Matrix2d F = Eigen::Matrix2d::Identity();
  std::array<Eigen::Matrix2d, 2> dF = {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
  std::array<Eigen::Matrix2d, 3> d2F = {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(),
                                        Eigen::Matrix2d::Zero()};
  double J = 1.0;
};

/// Kinematics at every volume, edge and Lagrange-node point of a space,
/// frozen at one time level. Points never interact; advancing integrates
/// each trajectory independently.
struct FlowState {
  double time = 0.0;
  int nq_vol = 0, nq_edge = 0, block = 0;
  std::vector<PointKinematics> volume;  // element-major
  std::vector<PointKinematics> edge;    // edge-major
  std::vector<PointKinematics> node;    // element-major Lagrange nodes

  const PointKinematics& at_volume(int element, int q) const {
    return volume[static_cast<size_t>(element) * nq_vol + q];
  }
  const PointKinematics& at_edge(int edge_id, int q) const {
    return edge[static_cast<size_t>(edge_id) * nq_edge + q];
  }
  const PointKinematics& at_node(int element, int j) const {
    return node[static_cast<size_t>(element) * block + j];
  }
};

/// State at t = 0: positions at the reference quadrature/node points,
/// F = I, dF = 0, J = 1.
FlowState init_flow_state(const DGSpace& space);

/// Advance every trajectory by `substeps` classical RK4 steps of size
/// dt/substeps. Throws EntanglementError if J or det F drops to <= 0.
void advance_flow_state(FlowState& state, const VelocityModel& vel, double dt, int substeps);

/// Advance to an absolute target time with steps no longer than max_step.
void advance_flow_state_to(FlowState& state, const VelocityModel& vel, double target_time,
                           double max_step);

struct KinematicResiduals {
  double max_det_gap = 0.0;         // max |J - det F|
  double min_volume_ratio = 0.0;    // min J
  double max_mixed_partial_gap = 0.0;
  double max_j_deviation = 0.0;     // max |J - 1|
};
KinematicResiduals kinematic_residuals(const FlowState& state);

/// Pointwise weights of the transformed operator: the largest eigenvalue of
/// J F^{-1} F^{-T} (>= 1 since that matrix has unit determinant), 1/J, and
/// the squared remaining advection speed.
struct GeometricFactors {
  double stretch = 1.0;      // a
  double inv_ratio = 1.0;    // M = 1/J
  double residual_sq = 0.0;  // |V - mesh velocity|^2
  double J = 1.0;
  Eigen::Matrix2d inv_trans = Eigen::Matrix2d::Identity();  // F^{-T}
};
GeometricFactors geometric_factors(const PointKinematics& point, const VelocityModel& vel,
                                   double t);

/// Largest eigenvalue of J F^{-1} F^{-T} by the closed 2x2 symmetric form.
double metric_stretch(const Eigen::Matrix2d& F, double J);

/// W = sqrt(det F) F^{-T} and its first and second reference derivatives,
/// assembled from the integrated derivative blocks of F. Second
/// derivatives are ordered (11, 12, 21, 22).
struct MetricFactorDerivatives {
  Eigen::Matrix2d W;
  std::array<Eigen::Matrix2d, 2> dW;
  std::array<Eigen::Matrix2d, 4> d2W;

  explicit MetricFactorDerivatives(const PointKinematics& point);
};

/// CSV snapshot (point id, t, x, F entries, J) for debugging.
std::string dump_flow_state(const FlowState& state);

}  // namespace movedg
