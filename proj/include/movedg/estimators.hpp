#pragma once

#include <Eigen/Dense>
#include <vector>

#include "movedg/forms.hpp"

namespace movedg {

/// Patch-normalised flow-map weights: means and maxima of J, of the metric
/// stretch a, of the squared remaining speed and of 1/J over the patch of
/// an edge or element, plus the regime weight rho. With beta = 0 the second
/// branch of rho is +infinity and the first branch decides.
struct PatchScalars {
  double j_mean = 1.0, j_max = 1.0;
  double a_mean = 1.0, a_max = 1.0;
  double delta_max = 0.0;
  double m_max = 1.0;
  double beta = 0.0;
  double rho = 0.0;
};

struct PatchWeights {
  std::vector<PatchScalars> edge;
  std::vector<PatchScalars> element;
};

PatchWeights compute_patch_weights(const DGSpace& space, const FlowState& state,
                                   const VelocityModel& vel, double epsilon,
                                   double beta_min = 0.0);

/// Per-element steady indicators and their space-time aggregates.
struct IndicatorReport {
  Eigen::VectorXd jump_sq;      // eta_J^2 per element
  Eigen::VectorXd flux_sq;      // eta_E^2
  Eigen::VectorXd residual_sq;  // eta_R^2
  Eigen::VectorXd total_sq;     // eta_K^2 = sum of the three
  double weighted_total_sq = 0.0;  // eta_1^2 = (1 + 1/alpha) sum eta_K^2
  double jump_rate_sq = 0.0;       // eta_2^2, jumps of du/dt
  double jump_size_sq = 0.0;       // eta_3^2, jumps of u
};

IndicatorReport element_indicators(const DGSpace& space, const FlowState& state,
                                   const VelocityModel& vel, const BoundaryData& data,
                                   const PatchWeights& weights, const DGField& u,
                                   const Eigen::VectorXd& du_dt, const FormParams& p);

/// Only the three space-time aggregates (cheaper than the full report).
void space_time_indicators(const DGSpace& space, const FlowState& state,
                           const PatchWeights& weights, const DGField& u,
                           const Eigen::VectorXd& du_dt, double alpha, double& jump_rate_sq,
                           double& jump_size_sq);

/// Norms of a broken field in the deformed metric. The dual seminorm of
/// the transport term is analysis-only and reported as NaN.
struct NormReport {
  double energy_sq = 0.0;       // epsilon U + beta H + epsilon j_h
  double weighted_l2_sq = 0.0;  // sum_K ||v||^2_{H_K}
  double weighted_h1_sq = 0.0;  // sum_K |v|^2_{U_K}
  double jump_sq = 0.0;         // j_h(v, v)
  double dual = std::numeric_limits<double>::quiet_NaN();
};

NormReport field_norms(const DGSpace& space, const FlowState& state, const VelocityModel& vel,
                       const DGField& u, const FormParams& p, double beta_min = 0.0);

/// Running accumulator of the space-time norm: max-in-time of the weighted
/// L2 norm squared plus the trapezoidal time integral of the energy norm.
class SharpNormAccumulator {
 public:
  void add(double t, double l2_sq, double energy_sq);
  double value_sq() const { return max_l2_sq_ + integral_; }
  double max_l2_sq() const { return max_l2_sq_; }
  double energy_integral() const { return integral_; }

 private:
  bool has_prev_ = false;
  double prev_t_ = 0.0, prev_energy_ = 0.0;
  double max_l2_sq_ = 0.0, integral_ = 0.0;
};

/// Trapezoidal accumulator for scalar time integrals.
class TimeIntegral {
 public:
  void add(double t, double value);
  double value() const { return integral_; }

 private:
  bool has_prev_ = false;
  double prev_t_ = 0.0, prev_v_ = 0.0, integral_ = 0.0;
};

}  // namespace movedg
