#pragma once

#include <cstdint>

#include "movedg/scenario.hpp"

namespace movedg {

/// Empirical coercivity constant min a_h(u,u)/|||u|||^2 over random fields
/// on a deformed state, per (n, degree, alpha) combination.
struct CoercivityCase {
  int n = 0;
  int degree = 1;
  double alpha = 0.0;
  double theta = 1.0;
  double min_ratio = 0.0;
  int samples = 0;
};

std::vector<CoercivityCase> coercivity_probe(const std::vector<int>& ns,
                                             const std::vector<int>& degrees,
                                             const std::vector<double>& alpha_factors,
                                             double theta, int samples_per_case,
                                             std::uint64_t seed, double epsilon = 0.01,
                                             double gamma0 = 1.0, double advect_time = 0.01);

/// Dual norm (against the energy norm on V_h) of the flux-projection
/// defect functional for a given smooth solution, per mesh size.
struct InconsistencyReport {
  std::vector<int> ns;
  std::vector<double> h;
  std::vector<double> defect;
  double observed_order = 0.0;  // smallest successive log ratio
};

InconsistencyReport inconsistency_probe(const Scenario& s, const std::vector<int>& ns, int degree,
                                        double t, double alpha, int substeps = 8);

/// Defect dual norm for one space/state and an analytic solution snapshot.
double inconsistency_defect(const DGSpace& space, const FlowState& state,
                            const VelocityModel& vel, const Scenario& s, double alpha);

/// Exponential bounds on Y = J^{1/2} F^{-T} q: L2, H1 and H2 seminorms per
/// element against |K| exp(C_i(t)) with the appendix constants.
struct AppendixReport {
  int checks = 0;
  int violations = 0;
  double min_margin_l2 = 0.0;  // min over samples of bound/value
  double min_margin_h1 = 0.0;
  double min_margin_h2 = 0.0;
  bool all_hold() const { return violations == 0; }
};

AppendixReport appendix_bound_probe(const DGSpace& space, const VelocityModel& vel, double dt,
                                    int steps, int substeps, int sample_elements,
                                    std::uint64_t seed);

/// Both sides of the a priori bound with the explicit constants, evaluated
/// at every emitted time of a run with a known solution.
struct AprioriDiagnostics {
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double max_ratio = 0.0;
  bool holds() const { return max_ratio <= 1.0; }
};

AprioriDiagnostics apriori_diagnostics(const DGSpace& space, const Scenario& s,
                                       const TimeLoopConfig& cfg);

/// Averaging-operator bound ratios for one discontinuous field, plus the
/// conformity of the averaged output.
struct AveragingBounds {
  double ratio_h = 0.0;  // H-norm gap over the jump bound
  double ratio_u = 0.0;  // U-seminorm gap over the h^{-1}-weighted bound
  double max_interior_mismatch = 0.0;
  double max_dirichlet_trace = 0.0;
};

AveragingBounds averaging_bound_probe(const DGSpace& space, const FlowState& state,
                                      const DGField& u);

}  // namespace movedg
