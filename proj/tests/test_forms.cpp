#include <cmath>
#include <random>

#include "doctest.h"
#include "movedg/forms.hpp"
#include "support/static_ipg.hpp"

using namespace movedg;

namespace {

DGField random_field(const DGSpace& space, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  DGField u(space);
  for (Eigen::Index i = 0; i < u.coeff.size(); ++i) u.coeff[i] = gauss(rng);
  return u;
}

// nodal interpolant of an analytic function (continuous for shared nodes)
DGField interpolate(const DGSpace& space, const std::function<double(const Eigen::Vector2d&)>& f) {
  DGField u(space);
  for (int e = 0; e < space.n_elements(); ++e)
    for (int j = 0; j < space.block_size(); ++j) u.elem(e)[j] = f(space.node_point(e, j));
  return u;
}

}  // namespace

TEST_CASE("mass blocks at the identity state match the P1 reference values") {
  DGSpace space = make_space(build_structured_unit_square(3), 1);
  FlowState state = init_flow_state(space);
  MassOperator mass = assemble_mass(space, state);
  const double area = space.mesh.area[0];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expected = i == j ? area / 6.0 : area / 12.0;
      CHECK(mass.blocks[0](i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  CHECK(mass.blocks[0](0, 0) / mass.blocks[0](0, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mass blocks scale linearly in the volume ratio") {
  DGSpace space = make_space(build_structured_unit_square(2), 2);
  FlowState state = init_flow_state(space);
  MassOperator base = assemble_mass(space, state);
  for (PointKinematics& p : state.volume) p.J *= 2.0;
  MassOperator doubled = assemble_mass(space, state);
  for (int e = 0; e < space.n_elements(); ++e)
    CHECK((doubled.blocks[e] - 2.0 * base.blocks[e]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mass blocks stay constant under the divergence-free vortex") {
  DGSpace space = make_space(build_structured_unit_square(9), 1);
  FlowState state = init_flow_state(space);
  MassOperator base = assemble_mass(space, state);
  VelocityModel vel = vortex_stream(65536.0, Eigen::Vector2d(1, 1));
  const double dt = std::ldexp(1.0, -16);
  for (int s = 0; s < 12; ++s) advance_flow_state(state, vel, dt, 2);
  MassOperator after = assemble_mass(space, state);
  double gap = 0.0;
  for (int e = 0; e < space.n_elements(); ++e)
    gap = std::max(gap, (after.blocks[e] - base.blocks[e]).cwiseAbs().maxCoeff());
  CHECK(gap < 1e-6);
}

TEST_CASE("continuous zero-trace field reduces the form to the weighted stiffness") {
  for (int p : {1, 2}) {
    DGSpace space = make_space(build_structured_unit_square(4), p);
    FlowState state = init_flow_state(space);
    VelocityModel vel = zero_velocity();
    DGField u = interpolate(space, [](const Eigen::Vector2d& x) {
      return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
    });
    FormParams params{0.7, 1.0, 11.0, 0.0};
    const double value = ah_value(space, u, u, state, vel, params);
    double h1 = 0.0;
    for (int e = 0; e < space.n_elements(); ++e) {
      const Eigen::Matrix2Xd g = gradients_on_element(space, u, e);
      for (int q = 0; q < space.volume_rule.size(); ++q)
        h1 += space.volume_rule.weights[q] * space.maps[e].det * g.col(q).squaredNorm();
    }
    CHECK(value == doctest::Approx(params.epsilon * h1).epsilon(1e-10));
  }
}

TEST_CASE("piecewise constants leave only penalty, upwind and reaction") {
  DGSpace space = make_space(build_structured_unit_square(3), 1);
  FlowState state = init_flow_state(space);
  VelocityModel vel = zero_velocity();
  const Eigen::Vector2d adv(0.6, -1.1);
  vel.flow = [adv](double, const Eigen::Vector2d&) { return adv; };
  vel.gamma0 = 0.3;
  FormParams params{0.05, 1.0, 9.0, vel.gamma0};

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  DGField u(space);
  for (int e = 0; e < space.n_elements(); ++e) u.elem(e).setConstant(uni(rng));

  const double value = ah_value(space, u, u, state, vel, params);

  double expected = params.epsilon * jh_value(space, u, u, state, params.alpha);
  for (int e = 0; e < space.n_elements(); ++e)
    expected += params.gamma0 * space.mesh.area[e] * u.elem(e)[0] * u.elem(e)[0];
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    const double sn = adv.dot(edge.normal);
    const double ul = u.elem(edge.left)[0];
    const double ur = edge.on_boundary() ? 0.0 : u.elem(edge.right)[0];
    const double jump = edge.on_boundary() ? ul : ul - ur;
    // upwind term tests with the trace from the inflow side; at the
    // identity state the integrand is constant along the edge
    if (sn < 0.0) {
      expected -= edge.length * sn * jump * ul;
    } else if (sn > 0.0 && !edge.on_boundary()) {
      expected -= edge.length * sn * jump * ur;
    }
  }
  CHECK(value == doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("nonsymmetric variant annihilates the flux pairing") {
  DGSpace space = make_space(build_structured_unit_square(3), 2);
  FlowState state = init_flow_state(space);
  VelocityModel vel = vortex_stream(10.0, Eigen::Vector2d(0.5, 0.5));
  advance_flow_state(state, vel, 0.02, 4);
  DGField u = random_field(space, 3);
  FormParams params{0.1, -1.0, 12.0, 0.0};
  CHECK(std::abs(ph_value(space, u, u, state, params)) < 1e-12);
  const double direct = ah_value(space, u, u, state, vel, params);
  const double split = ah_tilde_value(space, u, u, state, vel, params);
  CHECK(direct == doctest::Approx(split).epsilon(1e-7));
}

TEST_CASE("integration by parts identity at the identity state is exact") {
  for (int p : {1, 2, 3}) {
    DGSpace space = make_space(build_structured_unit_square(3), p);
    FlowState state = init_flow_state(space);
    VelocityModel vel = zero_velocity();
    vel.flow = [](double, const Eigen::Vector2d&) { return Eigen::Vector2d(0.8, 0.35); };
    vel.gamma0 = 0.2;
    for (double theta : {1.0, -1.0}) {
      FormParams params{0.03, theta, 15.0, vel.gamma0};
      DGField u = random_field(space, 21), v = random_field(space, 22);
      const double lhs = ah_value(space, u, v, state, vel, params);
      const double rhs = ah_tilde_value(space, u, v, state, vel, params) -
                         ph_value(space, u, v, state, params);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
  }
}

TEST_CASE("integration by parts identity survives deformation to quadrature error") {
  // the residual gap is pure quadrature error: it must shrink fast when the
  // rules get richer
  double previous_gap = std::numeric_limits<double>::infinity();
  for (int extra : {0, 2, 4}) {
    DGSpace space = make_space(build_structured_unit_square(3), 1, 6 + extra, 6 + extra);
    FlowState state = init_flow_state(space);
    VelocityModel vel = vortex_stream(8.0, Eigen::Vector2d(1.0, 0.4));
    advance_flow_state(state, vel, 0.05, 8);
    FormParams params{0.02, 1.0, 10.0, 0.1};
    vel.gamma0 = params.gamma0;
    DGField u = random_field(space, 5), v = random_field(space, 6);
    const double lhs = ah_value(space, u, v, state, vel, params);
    const double rhs =
        ah_tilde_value(space, u, v, state, vel, params) - ph_value(space, u, v, state, params);
    const double gap = std::abs(lhs - rhs) / std::abs(lhs);
    CHECK(gap < 1e-5);
    CHECK(gap < 0.5 * previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("projection is idempotent on polynomial data and contracts norms") {
  DGSpace space = make_space(build_structured_unit_square(3), 2);
  const int nq = space.volume_rule.size();

  Eigen::MatrixXd samples(space.n_elements(), nq);
  for (int e = 0; e < space.n_elements(); ++e)
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d x = space.volume_point(e, q);
      samples(e, q) = 1.5 + 2.0 * x.x() - x.y() + 0.5 * x.x() * x.y();
    }
  DGField proj = project_scalar(space, samples);
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd back = values_on_element(space, proj, e);
    for (int q = 0; q < nq; ++q) CHECK(back[q] == doctest::Approx(samples(e, q)).epsilon(1e-12));
  }

  Eigen::MatrixXd rough(space.n_elements(), nq);
  for (int e = 0; e < space.n_elements(); ++e)
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d x = space.volume_point(e, q);
      rough(e, q) = std::sin(7.0 * x.x()) * std::exp(x.y());
    }
  DGField rproj = project_scalar(space, rough);
  double norm_in = 0.0, norm_out = 0.0;
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd back = values_on_element(space, rproj, e);
    for (int q = 0; q < nq; ++q) {
      const double w = space.volume_rule.weights[q] * space.maps[e].det;
      norm_in += w * rough(e, q) * rough(e, q);
      norm_out += w * back[q] * back[q];
    }
  }
  CHECK(norm_out <= norm_in * (1 + 1e-12));
}

TEST_CASE("metric flux projection error decays at order p") {
  for (int p : {1, 2}) {
    VelocityModel vel = vortex_stream(20.0, Eigen::Vector2d(0, 0));
    std::vector<double> errs, hs;
    for (int n : {3, 6, 12}) {
      DGSpace space = make_space(build_structured_unit_square(n), p);
      FlowState state = init_flow_state(space);
      advance_flow_state(state, vel, 0.05, 8);
      const int nq = space.volume_rule.size();
      Eigen::MatrixXd sx(space.n_elements(), nq), sy(space.n_elements(), nq);
      for (int e = 0; e < space.n_elements(); ++e)
        for (int q = 0; q < nq; ++q) {
          const PointKinematics& pk = state.at_volume(e, q);
          const Eigen::Vector2d g =
              std::sqrt(pk.J) *
              Eigen::Vector2d(std::cos(2 * pk.x.x()) * pk.x.y(), std::sin(1.5 * pk.x.y()));
          sx(e, q) = g.x();
          sy(e, q) = g.y();
        }
      FluxProjection proj = project_metric_samples(space, sx, sy);
      double err = 0.0;
      for (int e = 0; e < space.n_elements(); ++e) {
        const Eigen::VectorXd bx = values_on_element(space, proj.x, e);
        const Eigen::VectorXd by = values_on_element(space, proj.y, e);
        for (int q = 0; q < nq; ++q) {
          const double w = space.volume_rule.weights[q] * space.maps[e].det;
          err += w * (Eigen::Vector2d(sx(e, q), sy(e, q)) - Eigen::Vector2d(bx[q], by[q]))
                         .squaredNorm();
        }
      }
      errs.push_back(std::sqrt(err));
      hs.push_back(space.mesh.max_edge_length());
    }
    for (size_t i = 1; i < errs.size(); ++i) {
      const double order = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
      CHECK(order >= p);
    }
  }
}

TEST_CASE("weighted projection agrees with the plain one at identity and is orthogonal") {
  DGSpace space = make_space(build_structured_unit_square(3), 2);
  FlowState state = init_flow_state(space);
  const int nq = space.volume_rule.size();
  Eigen::MatrixXd samples(space.n_elements(), nq);
  for (int e = 0; e < space.n_elements(); ++e)
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d x = space.volume_point(e, q);
      samples(e, q) = std::cos(3.0 * x.x() + x.y());
    }
  DGField plain = project_scalar(space, samples);
  DGField weighted = project_weighted(space, state, samples);
  CHECK((plain.coeff - weighted.coeff).cwiseAbs().maxCoeff() < 1e-12);

  VelocityModel vel = vortex_literal(50.0, Eigen::Vector2d(0, 0));
  advance_flow_state(state, vel, 0.05, 8);
  DGField pw = project_weighted(space, state, samples);
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd back = values_on_element(space, pw, e);
    Eigen::VectorXd moment = Eigen::VectorXd::Zero(space.block_size());
    for (int q = 0; q < nq; ++q) {
      const double w =
          space.volume_rule.weights[q] * space.maps[e].det * state.at_volume(e, q).J;
      moment += w * (samples(e, q) - back[q]) * space.phi_vol.row(q).transpose();
    }
    CHECK(moment.cwiseAbs().maxCoeff() < 1e-11);
  }

  DGField member = random_field(space, 9);
  Eigen::MatrixXd member_samples(space.n_elements(), nq);
  for (int e = 0; e < space.n_elements(); ++e)
    member_samples.row(e) = values_on_element(space, member, e).transpose();
  DGField again = project_weighted(space, state, member_samples);
  CHECK((again.coeff - member.coeff).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("averaging operator conforms and averages") {
  DGSpace space = make_space(build_structured_unit_square(3), 2);

  DGField ones(space);
  ones.coeff.setOnes();
  DGField avg = averaging_operator(space, ones);
  for (int g = 0; g < space.n_nodes; ++g)
    for (auto [e, j] : space.node_members[g])
      CHECK(avg.elem(e)[j] == (space.node_on_dirichlet[g] ? 0.0 : 1.0));

  DGField smooth = interpolate(space, [](const Eigen::Vector2d& x) {
    return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
  });
  DGField fixed = averaging_operator(space, smooth);
  CHECK((fixed.coeff - smooth.coeff).cwiseAbs().maxCoeff() < 1e-13);

  DGField bump(space);
  bump.elem(7).setConstant(1.0);
  DGField mixed = averaging_operator(space, bump);
  for (int g = 0; g < space.n_nodes; ++g) {
    double expected = 0.0;
    if (!space.node_on_dirichlet[g]) {
      int hits = 0;
      for (auto [e, j] : space.node_members[g]) hits += e == 7;
      expected = static_cast<double>(hits) / space.node_members[g].size();
    }
    for (auto [e, j] : space.node_members[g])
      CHECK(mixed.elem(e)[j] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("averaging output is conforming on the alternating split too") {
  // the edge-slot orientation logic must identify shared nodes regardless
  // of which diagonal the cells use
  for (int p : {2, 3}) {
    DGSpace space =
        make_space(build_structured_unit_square(4, DiagonalPattern::alternating), p);
    DGField u = random_field(space, 1000 + p);
    DGField avg = averaging_operator(space, u);
    double mismatch = 0.0, trace = 0.0;
    for (int k = 0; k < space.mesh.n_edges(); ++k) {
      const Edge& edge = space.mesh.edges[k];
      const Eigen::VectorXd al = values_on_edge(space, avg, k, 0);
      if (!edge.on_boundary()) {
        const Eigen::VectorXd ar = values_on_edge(space, avg, k, 1);
        mismatch = std::max(mismatch, (al - ar).cwiseAbs().maxCoeff());
      } else if (edge.tag == BoundaryTag::dirichlet) {
        trace = std::max(trace, al.cwiseAbs().maxCoeff());
      }
    }
    CHECK(mismatch < 1e-12);
    CHECK(trace < 1e-12);
  }
}

TEST_CASE("load vector oracles") {
  auto classify = [](const Eigen::Vector2d& mid) {
    return mid.y() == 1.0 ? BoundaryTag::neumann : BoundaryTag::dirichlet;
  };
  DGSpace space =
      make_space(build_structured_unit_square(2, DiagonalPattern::fixed, classify), 1);
  FlowState state = init_flow_state(space);

  BoundaryData data = zero_data();
  Eigen::VectorXd zero = assemble_lh(space, state, data);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  data.source = [](double, const Eigen::Vector2d&) { return 1.0; };
  Eigen::VectorXd load = assemble_lh(space, state, data);
  for (int e = 0; e < space.n_elements(); ++e)
    for (int j = 0; j < 3; ++j)
      CHECK(load[3 * e + j] == doctest::Approx(space.mesh.area[e] / 3.0).epsilon(1e-13));

  data.source = [](double, const Eigen::Vector2d&) { return 0.0; };
  data.neumann = [](double, const Eigen::Vector2d&) { return 1.0; };
  Eigen::VectorXd neumann = assemble_lh(space, state, data);
  double total = 0.0;
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag != BoundaryTag::neumann) continue;
    const auto seg = neumann.segment(3 * edge.left, 3);
    total += seg.sum();
    CHECK(seg.sum() == doctest::Approx(edge.length).epsilon(1e-13));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("residual is zero on trivial data and affine in the field") {
  DGSpace space = make_space(build_structured_unit_square(3), 1);
  FlowState state = init_flow_state(space);
  VelocityModel vel = vortex_stream(5.0, Eigen::Vector2d(1, 1));
  BoundaryData data = zero_data();
  FormParams params{0.01, 1.0, 10.0, 0.0};

  DGField zero(space);
  CHECK(semidiscrete_residual(space, zero, state, vel, data, params).cwiseAbs().maxCoeff() ==
        0.0);

  DGField u1 = random_field(space, 31), u2 = random_field(space, 32);
  DGField sum(space);
  sum.coeff = u1.coeff + u2.coeff;
  const Eigen::VectorXd r0 = semidiscrete_residual(space, zero, state, vel, data, params);
  const Eigen::VectorXd r1 = semidiscrete_residual(space, u1, state, vel, data, params);
  const Eigen::VectorXd r2 = semidiscrete_residual(space, u2, state, vel, data, params);
  const Eigen::VectorXd rs = semidiscrete_residual(space, sum, state, vel, data, params);
  CHECK(((rs - r0) - ((r1 - r0) + (r2 - r0))).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("residual of a projected steady solution decays with the mesh") {
  // manufactured steady problem: the projected exact solution leaves only
  // the consistency error in l_h - a_h
  VelocityModel vel = zero_velocity();
  const Eigen::Vector2d adv(0.5, 0.25);
  vel.flow = [adv](double, const Eigen::Vector2d&) { return adv; };
  const double eps = 0.05;
  auto exact = [](const Eigen::Vector2d& x) {
    return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
  };
  auto exact_grad = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                           M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
  };
  BoundaryData data = zero_data();
  data.source = [&](double, const Eigen::Vector2d& x) {
    return adv.dot(exact_grad(x)) + eps * 2.0 * M_PI * M_PI * exact(x);
  };
  std::vector<double> norms, hs;
  for (int n : {3, 6, 12}) {
    DGSpace space = make_space(build_structured_unit_square(n), 1);
    FlowState state = init_flow_state(space);
    const int m = space.block_size(), nq = space.volume_rule.size();
    Eigen::MatrixXd samples(space.n_elements(), nq);
    for (int e = 0; e < space.n_elements(); ++e)
      for (int q = 0; q < nq; ++q) samples(e, q) = exact(space.volume_point(e, q));
    DGField u = project_scalar(space, samples);
    FormParams params{eps, 1.0, 12.0, 0.0};
    const Eigen::VectorXd r = semidiscrete_residual(space, u, state, vel, data, params);

    // energy-dual norm of the residual functional (dense Gram: identity
    // geometry, beta = 0, so energy = eps (H1 + penalty))
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(space.dofs(), space.dofs());
    for (int e = 0; e < space.n_elements(); ++e) {
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
      const Eigen::Matrix2d chain = space.maps[e].inv_frame.transpose();
      for (int q = 0; q < nq; ++q) {
        Eigen::MatrixXd g(2, m);
        g.row(0) = space.grad_vol[0].row(q);
        g.row(1) = space.grad_vol[1].row(q);
        const Eigen::MatrixXd gp = chain * g;
        block += space.volume_rule.weights[q] * space.maps[e].det * eps * gp.transpose() * gp;
      }
      gram.block(e * m, e * m, m, m) += block;
    }
    for (int k = 0; k < space.mesh.n_edges(); ++k) {
      const Edge& edge = space.mesh.edges[k];
      const int sides = edge.on_boundary() ? 1 : 2;
      const int elems[2] = {edge.left, edge.right};
      for (int q = 0; q < space.edge_rule.size(); ++q) {
        const double coef = eps * params.alpha / edge.length * space.edge_rule.weights[q] *
                            edge.length;
        for (int sa = 0; sa < sides; ++sa)
          for (int sb = 0; sb < sides; ++sb) {
            const double sgn = (sa == sb) ? 1.0 : -1.0;
            gram.block(elems[sa] * m, elems[sb] * m, m, m) +=
                coef * sgn * space.edge_tables[k][sa].phi.row(q).transpose() *
                space.edge_tables[k][sb].phi.row(q);
          }
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    norms.push_back(std::sqrt(std::max(0.0, r.dot(solver.solve(r)))));
    hs.push_back(space.mesh.max_edge_length());
  }
  for (size_t i = 1; i < norms.size(); ++i) {
    CHECK(norms[i] < norms[i - 1]);
    CHECK(std::log(norms[i - 1] / norms[i]) / std::log(hs[i - 1] / hs[i]) > 0.4);
  }
}

TEST_CASE("guards reject inconsistent input") {
  DGSpace space = make_space(build_structured_unit_square(2), 1);
  DGSpace other = make_space(build_structured_unit_square(2), 2);
  FlowState state = init_flow_state(space);
  VelocityModel vel = zero_velocity();
  DGField u(other);
  CHECK_THROWS(apply_ah(space, u, state, vel, FormParams{0.1, 1.0, 10.0, 0.0}));
  DGField ok(space);
  CHECK_THROWS(apply_ah(space, ok, state, vel, FormParams{0.1, 1.0, -1.0, 0.0}));
}

TEST_CASE("transformed operator with frozen mesh matches the static twin") {
  DGSpace space = make_space(build_structured_unit_square(4), 2);
  FlowState state = init_flow_state(space);
  VelocityModel vel = frozen_mesh(vortex_stream(30.0, Eigen::Vector2d(1.0, 0.5)));
  vel.gamma0 = 0.1;
  FormParams params{0.01, 1.0, 14.0, vel.gamma0};
  DGField u = random_field(space, 77);
  const Eigen::VectorXd transformed = apply_ah(space, u, state, vel, params);
  const Eigen::VectorXd twin = testing::apply_static_ipg(space, u, 0.0, vel, params);
  CHECK((transformed - twin).cwiseAbs().maxCoeff() <
        1e-12 * std::max(1.0, twin.cwiseAbs().maxCoeff()));
}
