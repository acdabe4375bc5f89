#include <cmath>
#include <random>

#include "doctest.h"
#include "movedg/probes.hpp"

using namespace movedg;

TEST_CASE("coercivity samples respect the proof constants at small scale") {
  auto nipg = coercivity_probe({4}, {1}, {2.0}, -1.0, 25, 99, 0.01, 1.0);
  REQUIRE(nipg.size() == 1);
  CHECK(nipg[0].min_ratio >= 0.45);

  auto sipg = coercivity_probe({4}, {1}, {2.0, 4.0}, 1.0, 25, 99, 0.01, 1.0);
  REQUIRE(sipg.size() == 2);
  CHECK(sipg[0].min_ratio > 0.0);
  CHECK(sipg[1].min_ratio >= 0.2);
  CHECK(sipg[1].alpha == doctest::Approx(2.0 * sipg[0].alpha));
}

TEST_CASE("inconsistency defect vanishes for polynomial fluxes and without diffusion") {
  DGSpace space = make_space(build_structured_unit_square(3), 2);
  FlowState state = init_flow_state(space);
  VelocityModel vel = zero_velocity();
  Scenario s = smooth_scenario(MeshMotion::none, 0.02);
  // affine exact solution: the metric flux at the identity state is the
  // constant gradient, which the projection reproduces exactly
  s.exact_gradient = [](double, const Eigen::Vector2d&) { return Eigen::Vector2d(0.7, -0.2); };
  CHECK(inconsistency_defect(space, state, vel, s, 10.0) < 1e-14);

  Scenario nodiff = smooth_scenario(MeshMotion::none, 0.02);
  nodiff.epsilon = 0.0;
  CHECK(inconsistency_defect(space, state, vel, nodiff, 10.0) == 0.0);
}

TEST_CASE("inconsistency defect decays under refinement") {
  Scenario s = smooth_scenario(MeshMotion::full, 0.05);
  InconsistencyReport rep = inconsistency_probe(s, {3, 6}, 1, 0.04, 10.0);
  CHECK(rep.defect[0] > rep.defect[1]);
  CHECK(rep.observed_order > 0.5);
}

TEST_CASE("appendix bounds hold trivially for a still mesh") {
  DGSpace space = make_space(build_structured_unit_square(3), 1);
  VelocityModel vel = zero_velocity();
  AppendixReport rep = appendix_bound_probe(space, vel, 0.1, 3, 2, 10, 5);
  CHECK(rep.all_hold());
  // Y is the constant unit vector: the L2 bound is tight, the H1 bound
  // carries the ln 2 headroom
  CHECK(rep.min_margin_l2 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.min_margin_h1 > 1.0);
  CHECK(rep.checks == 4 * 10);
}

TEST_CASE("appendix bounds hold on the exponential stretch with computable slack") {
  DGSpace space = make_space(build_structured_unit_square(3), 1);
  VelocityModel vel = exponential_stretch();
  AppendixReport rep = appendix_bound_probe(space, vel, 0.05, 4, 2, 12, 11);
  CHECK(rep.all_hold());
  CHECK(rep.min_margin_l2 >= 1.0);
}

TEST_CASE("averaging bounds: conforming output and stable ratios") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  for (int n : {3, 6}) {
    DGSpace space = make_space(build_structured_unit_square(n), 2);
    FlowState state = init_flow_state(space);
    VelocityModel vel = vortex_stream(25.0, Eigen::Vector2d(0.5, 0.5));
    advance_flow_state(state, vel, 0.02, 4);
    for (int trial = 0; trial < 5; ++trial) {
      DGField u(space);
      for (Eigen::Index i = 0; i < u.coeff.size(); ++i) u.coeff[i] = gauss(rng);
      AveragingBounds bounds = averaging_bound_probe(space, state, u);
      CHECK(bounds.max_interior_mismatch < 1e-12);
      CHECK(bounds.max_dirichlet_trace < 1e-12);
      CHECK(bounds.ratio_h > 0.0);
      CHECK(bounds.ratio_h < 10.0);  // modest constant for these meshes
      CHECK(bounds.ratio_u > 0.0);
      CHECK(bounds.ratio_u < 10.0);
    }
  }
}

TEST_CASE("a priori diagnostic stays below the explicit bound at desk scale") {
  Scenario s = smooth_scenario(MeshMotion::full, 0.01);
  DGSpace space = make_space(build_structured_unit_square(4), 1);
  TimeLoopConfig cfg;
  cfg.dt = 0.01;
  cfg.steps = 10;
  cfg.cadence = 2;
  cfg.params = FormParams{s.epsilon, 1.0, std::max(10.0, 2.0 * space.constants.trace), 0.0};
  AprioriDiagnostics diag = apriori_diagnostics(space, s, cfg);
  CHECK(diag.times.size() == 6 + 0u);
  CHECK(diag.holds());
  CHECK(diag.max_ratio > 0.0);
}
