#pragma once

#include <cstdint>
#include <string>

#include "movedg/estimators.hpp"
#include "movedg/forms.hpp"
#include "movedg/time_loop.hpp"

namespace movedg {

/// A complete experiment definition: diffusion, velocities, boundary data
/// with the source derived from the exact solution when one is known.
struct Scenario {
  std::string name;
  double epsilon = 0.01;
  VelocityModel velocity;
  BoundaryData data;

  bool has_exact = false;
  std::function<double(double, const Eigen::Vector2d&)> exact;
  std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)> exact_gradient;
  std::function<double(double, const Eigen::Vector2d&)> exact_laplacian;
  std::function<double(double, const Eigen::Vector2d&)> exact_dt;
  std::function<double(const Eigen::Vector2d&)> initial;
};

enum class LayerVariant { literal, stream_function };

/// The boundary-layer experiment: exact solution with layers on the upper
/// and right boundaries, drift (1,1), and the amplitude-2^16 vortex as mesh
/// velocity; the source follows from the strong equation.
Scenario boundary_layer_scenario(LayerVariant variant, double epsilon = 0.01);

enum class MeshMotion { none, full, layer_field };

/// Product-of-sines solution with a divergence-free vortex advection;
/// the mesh velocity absorbs none, all, or the boundary-layer field.
Scenario smooth_scenario(MeshMotion motion, double epsilon);

/// Same scenario with the mesh held still (the full advection is left to
/// the upwind discretisation).
Scenario frozen_mesh_variant(const Scenario& s);

/// Max relative defect of f - (u_t + V.grad u - eps lap u) over random
/// space-time samples, with derivatives of the exact solution taken by
/// high-order finite differences. The space step trades truncation inside
/// layers against round-off on smooth profiles: keep it near 2e-5 for
/// eps-wide layers, widen it to ~1e-3 for globally smooth solutions.
double strong_residual_defect(const Scenario& s, int nsamples, std::uint64_t seed,
                              double space_step = 2e-5);

/// Samples of the initial datum at the reference volume points.
Eigen::MatrixXd initial_samples(const DGSpace& space, const Scenario& s);

/// Samples of the exact solution at the transported volume points.
Eigen::MatrixXd exact_samples(const DGSpace& space, const FlowState& state, const Scenario& s);

struct ErrorReport {
  double l2_sq = 0.0;      // weighted L2 (= physical-frame L2) of the error
  double energy_sq = 0.0;  // energy norm of the error
  double node_max = 0.0;   // max |error| at transported Lagrange nodes
};
ErrorReport error_norms(const DGSpace& space, const FlowState& state, const Scenario& s,
                        const DGField& u, const FormParams& p);

/// Per-element weighted L2 error squares (for locating the worst element).
Eigen::VectorXd element_error_sq(const DGSpace& space, const FlowState& state, const Scenario& s,
                                 const DGField& u);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  double linf_l2 = 0.0;        // max over emitted times of the L2 error
  double final_energy = 0.0;   // energy error at the final time
  double rate = 0.0;           // against the previous row, 0 for the first
};
struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

ConvergenceTable convergence_study(const Scenario& s, const std::vector<int>& ns, int degree,
                                   double dt, int steps, FormParams params, int substeps = 2,
                                   DiagonalPattern pattern = DiagonalPattern::fixed);

}  // namespace movedg
