#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "movedg/flowmap.hpp"
#include "movedg/space.hpp"
#include "movedg/velocity.hpp"

namespace movedg {

/// Parameters of the interior-penalty discretisation.
struct FormParams {
  double epsilon = 0.01;
  double theta = 1.0;   // +1 symmetric, -1 nonsymmetric
  double alpha = 10.0;  // jump penalty
  double gamma0 = 0.0;  // reaction shift
};

/// Problem data in the physical frame; Dirichlet values are zero by scope.
struct BoundaryData {
  std::function<double(double, const Eigen::Vector2d&)> source;   // f(t,x)
  std::function<double(double, const Eigen::Vector2d&)> neumann;  // u_N(t,x)
};
BoundaryData zero_data();

/// Block-diagonal weighted mass operator with per-element Cholesky solves.
struct MassOperator {
  int block = 0;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> solvers;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
};

/// Time-dependent mass blocks int_K J phi_i phi_j. Throws if a block loses
/// positive definiteness.
MassOperator assemble_mass(const DGSpace& space, const FlowState& state);

/// Elementwise plain L2 projection of samples given at the volume
/// quadrature points (one row per element).
DGField project_scalar(const DGSpace& space, const Eigen::MatrixXd& samples);

/// J-weighted elementwise projection (the time-dependent projection P_h).
DGField project_weighted(const DGSpace& space, const FlowState& state,
                         const Eigen::MatrixXd& samples);

/// Componentwise plain L2 projection of a vector field sampled at the
/// volume points.
std::array<DGField, 2> project_vector(const DGSpace& space, const Eigen::MatrixXd& sx,
                                      const Eigen::MatrixXd& sy);

/// Coefficients of the projected metric flux Pi_L2(J^{1/2} F^{-T} grad u),
/// the stabilised flux appearing in the edge terms.
struct FluxProjection {
  DGField x, y;
};
FluxProjection project_metric_flux(const DGSpace& space, const FlowState& state,
                                   const DGField& u);
/// Same projection for an arbitrary vector field sampled at volume points.
FluxProjection project_metric_samples(const DGSpace& space, const Eigen::MatrixXd& sx,
                                      const Eigen::MatrixXd& sy);

/// Apply the full interior-penalty form: returns r with
/// r[(e,i)] = a_h(u, phi_i^e). Volume diffusion/advection/reaction, the
/// projected-flux edge terms with theta symmetrisation, the jump penalty,
/// and pointwise upwinding of the remaining advection.
Eigen::VectorXd apply_ah(const DGSpace& space, const DGField& u, const FlowState& state,
                         const VelocityModel& vel, const FormParams& p);

/// Bilinear form values used by the algebraic identities and probes.
double ah_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const VelocityModel& vel, const FormParams& p);
double dh_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const VelocityModel& vel, const FormParams& p);
double fh_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const VelocityModel& vel);
double jh_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                double alpha);
double ph_value(const DGSpace& space, const DGField& u, const DGField& v, const FlowState& state,
                const FormParams& p);
inline double ah_tilde_value(const DGSpace& space, const DGField& u, const DGField& v,
                             const FlowState& state, const VelocityModel& vel,
                             const FormParams& p) {
  return dh_value(space, u, v, state, vel, p) + fh_value(space, u, v, state, vel) +
         p.epsilon * jh_value(space, u, v, state, p.alpha);
}

/// Right-hand side l_h: transported source plus Neumann term with the
/// metric factor |F^{-T} n|.
Eigen::VectorXd assemble_lh(const DGSpace& space, const FlowState& state,
                            const BoundaryData& data);

/// r = l_h - a_h(u, .), the right-hand side of M du/dt = r.
Eigen::VectorXd semidiscrete_residual(const DGSpace& space, const DGField& u,
                                      const FlowState& state, const VelocityModel& vel,
                                      const BoundaryData& data, const FormParams& p);

/// Nodal averaging onto the continuous subspace with zero Dirichlet trace:
/// shared Lagrange nodes take the mean of their element values, Dirichlet
/// nodes are set to zero.
DGField averaging_operator(const DGSpace& space, const DGField& u);

}  // namespace movedg
