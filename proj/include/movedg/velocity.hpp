#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

namespace movedg {

/// Analytic advection field V and mesh velocity, with the mesh-velocity
/// spatial derivatives needed by the kinematic ODEs (gradient, its first
/// and second spatial derivatives). Gradients are stored as
/// (grad)_ij = d(component i)/dx_j. Second-derivative triples are ordered
/// (xx, xy, yy).
struct VelocityModel {
  using VectorField = std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)>;
  using MatrixField = std::function<Eigen::Matrix2d(double, const Eigen::Vector2d&)>;
  using MatrixField2 = std::function<std::array<Eigen::Matrix2d, 2>(double, const Eigen::Vector2d&)>;
  using MatrixField3 = std::function<std::array<Eigen::Matrix2d, 3>(double, const Eigen::Vector2d&)>;

  VectorField flow;            // V
  MatrixField flow_gradient;   // dV
  VectorField mesh;            // mesh velocity
  MatrixField mesh_gradient;
  MatrixField2 mesh_gradient_dx;   // d/dx_k of mesh_gradient
  MatrixField3 mesh_gradient_dxx;  // second derivatives of mesh_gradient
  double gamma0 = 0.0;             // reaction shift

  Eigen::Vector2d residual(double t, const Eigen::Vector2d& x) const {
    return flow(t, x) - mesh(t, x);
  }
  double mesh_divergence(double t, const Eigen::Vector2d& x) const {
    return mesh_gradient(t, x).trace();
  }
  double residual_divergence(double t, const Eigen::Vector2d& x) const {
    return (flow_gradient(t, x) - mesh_gradient(t, x)).trace();
  }
  /// beta = gamma0 - div(V - mesh)/2, the coercivity margin of the forms.
  double reaction(double t, const Eigen::Vector2d& x) const {
    return gamma0 - 0.5 * residual_divergence(t, x);
  }
};

/// Model with V = mesh = 0.
VelocityModel zero_velocity();

/// Same advection field, mesh held still (frozen-geometry variant).
VelocityModel frozen_mesh(const VelocityModel& vel);

/// mesh = (x, 0): the one-dimensional exponential stretching used as a
/// closed-form kinematics oracle. V = mesh.
VelocityModel exponential_stretch();

/// Rigid rotation mesh velocity with angular rate omega, V = mesh.
VelocityModel rigid_rotation(double omega);

/// The vortex pair amplitude*(h(y)h'(x), -h(x)h'(y)) with h(x)=(x(1-x))^2,
/// as mesh velocity; V = drift + mesh. Not divergence-free.
VelocityModel vortex_literal(double amplitude, const Eigen::Vector2d& drift);

/// Divergence-free variant amplitude*(h(x)h'(y), -h'(x)h(y)).
VelocityModel vortex_stream(double amplitude, const Eigen::Vector2d& drift);

/// Admissibility probe: max |mesh . n| over boundary samples and min
/// reaction over interior samples at the given times.
struct VelocityCheck {
  double max_boundary_normal_mesh = 0.0;
  double min_reaction = 0.0;
};
VelocityCheck check_velocity(const VelocityModel& vel, const std::vector<double>& times,
                             int samples_per_side = 64);

}  // namespace movedg
