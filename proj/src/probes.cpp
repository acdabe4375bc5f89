#include "movedg/probes.hpp"

#include <cmath>
#include <random>

namespace movedg {

namespace {

double operator_norm(const Eigen::Matrix2d& a) {
  const Eigen::Matrix2d s = a.transpose() * a;
  const double half = 0.5 * (s(0, 0) + s(1, 1));
  const double disc = 0.25 * (s(0, 0) - s(1, 1)) * (s(0, 0) - s(1, 1)) + s(0, 1) * s(1, 0);
  return std::sqrt(std::max(0.0, half + std::sqrt(std::max(disc, 0.0))));
}

}  // namespace

std::vector<CoercivityCase> coercivity_probe(const std::vector<int>& ns,
                                             const std::vector<int>& degrees,
                                             const std::vector<double>& alpha_factors,
                                             double theta, int samples_per_case,
                                             std::uint64_t seed, double epsilon, double gamma0,
                                             double advect_time) {
  std::vector<CoercivityCase> out;
  for (int n : ns) {
    for (int degree : degrees) {
      DGSpace space = make_space(build_structured_unit_square(n), degree);
      VelocityModel vel = vortex_stream(40.0, Eigen::Vector2d(1.0, 1.0));
      vel.gamma0 = gamma0;
      FlowState state = init_flow_state(space);
      if (advect_time > 0.0) advance_flow_state_to(state, vel, advect_time, advect_time / 16.0);
      for (double factor : alpha_factors) {
        CoercivityCase c;
        c.n = n;
        c.degree = degree;
        c.theta = theta;
        c.alpha = factor * space.constants.trace;
        c.samples = samples_per_case;
        c.min_ratio = std::numeric_limits<double>::infinity();
        FormParams p{epsilon, theta, c.alpha, gamma0};
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(100 * n + degree));
        std::normal_distribution<double> gauss;
        for (int k = 0; k < samples_per_case; ++k) {
          DGField u(space);
          for (Eigen::Index i = 0; i < u.coeff.size(); ++i) u.coeff[i] = gauss(rng);
          const double num = ah_value(space, u, u, state, vel, p);
          const double den = field_norms(space, state, vel, u, p).energy_sq;
          c.min_ratio = std::min(c.min_ratio, num / den);
        }
        out.push_back(c);
      }
    }
  }
  return out;
}

namespace {

// Dense Gram matrix of the energy norm on V_h.
Eigen::MatrixXd energy_gram(const DGSpace& space, const FlowState& state,
                            const VelocityModel& vel, double epsilon, double alpha) {
  const double t = state.time;
  const int m = space.block_size();
  const Eigen::Index dofs = space.dofs();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dofs, dofs);
  for (int e = 0; e < space.n_elements(); ++e) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      const Eigen::Matrix2d chain =
          pk.F.inverse().transpose() * space.maps[e].inv_frame.transpose();
      Eigen::MatrixXd g(2, m);
      g.row(0) = space.grad_vol[0].row(q);
      g.row(1) = space.grad_vol[1].row(q);
      const Eigen::MatrixXd gp = chain * g;
      const double beta = std::max(vel.reaction(t, pk.x), 0.0);
      block += w * epsilon * gp.transpose() * gp +
               w * beta * space.phi_vol.row(q).transpose() * space.phi_vol.row(q);
    }
    gram.block(static_cast<Eigen::Index>(e) * m, static_cast<Eigen::Index>(e) * m, m, m) += block;
  }
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag == BoundaryTag::neumann) continue;
    const int sides = edge.on_boundary() ? 1 : 2;
    const int elems[2] = {edge.left, edge.right};
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const double wq = space.edge_rule.weights[q] * edge.length;
      const Eigen::Vector2d mn = pk.F.inverse().transpose() * edge.normal;
      const double coef = epsilon * alpha / edge.length * wq * pk.J * mn.squaredNorm();
      for (int sa = 0; sa < sides; ++sa) {
        const double sgn_a = sa == 0 ? 1.0 : -1.0;
        const auto phi_a = space.edge_tables[k][sa].phi.row(q);
        for (int sb = 0; sb < sides; ++sb) {
          const double sgn_b = sb == 0 ? 1.0 : -1.0;
          const auto phi_b = space.edge_tables[k][sb].phi.row(q);
          gram.block(static_cast<Eigen::Index>(elems[sa]) * m,
                     static_cast<Eigen::Index>(elems[sb]) * m, m, m) +=
              coef * sgn_a * sgn_b * phi_a.transpose() * phi_b;
        }
      }
    }
  }
  return gram;
}

}  // namespace

double inconsistency_defect(const DGSpace& space, const FlowState& state,
                            const VelocityModel& vel, const Scenario& s, double alpha) {
  const double t = state.time;
  const int m = space.block_size();
  const int nq = space.volume_rule.size();
  // metric flux of the exact solution reduces to sqrt(J) grad u at the
  // transported point
  Eigen::MatrixXd sx(space.n_elements(), nq), sy(space.n_elements(), nq);
  for (int e = 0; e < space.n_elements(); ++e)
    for (int q = 0; q < nq; ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const Eigen::Vector2d g = std::sqrt(pk.J) * s.exact_gradient(t, pk.x);
      sx(e, q) = g.x();
      sy(e, q) = g.y();
    }
  const FluxProjection proj = project_metric_samples(space, sx, sy);

  Eigen::VectorXd defect = Eigen::VectorXd::Zero(space.dofs());
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag == BoundaryTag::neumann) continue;
    const int sides = edge.on_boundary() ? 1 : 2;
    const int elems[2] = {edge.left, edge.right};
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const double wq = space.edge_rule.weights[q] * edge.length;
      const double sqj = std::sqrt(pk.J);
      const Eigen::Vector2d g_exact = sqj * s.exact_gradient(t, pk.x);
      Eigen::Vector2d avg = Eigen::Vector2d::Zero();
      for (int side = 0; side < sides; ++side) {
        const auto phi = space.edge_tables[k][side].phi.row(q);
        avg.x() += phi.dot(proj.x.elem(elems[side]));
        avg.y() += phi.dot(proj.y.elem(elems[side]));
      }
      avg /= sides;
      const Eigen::Vector2d gap = g_exact - avg;
      for (int side = 0; side < sides; ++side) {
        const Eigen::Vector2d n_s = side == 0 ? edge.normal : Eigen::Vector2d(-edge.normal);
        const double factor =
            s.epsilon * wq * sqj * gap.dot(pk.F.inverse().transpose() * n_s);
        defect.segment(static_cast<Eigen::Index>(elems[side]) * m, m) +=
            factor * space.edge_tables[k][side].phi.row(q).transpose();
      }
    }
  }
  const Eigen::MatrixXd gram = energy_gram(space, state, vel, s.epsilon, alpha);
  Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  return std::sqrt(std::max(0.0, defect.dot(solver.solve(defect))));
}

InconsistencyReport inconsistency_probe(const Scenario& s, const std::vector<int>& ns, int degree,
                                        double t, double alpha, int substeps) {
  InconsistencyReport rep;
  for (int n : ns) {
    DGSpace space = make_space(build_structured_unit_square(n), degree);
    FlowState state = init_flow_state(space);
    if (t > 0.0) advance_flow_state_to(state, s.velocity, t, t / substeps);
    rep.ns.push_back(n);
    rep.h.push_back(space.mesh.max_edge_length());
    rep.defect.push_back(inconsistency_defect(space, state, s.velocity, s, alpha));
  }
  rep.observed_order = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < rep.defect.size(); ++i) {
    const double order =
        std::log(rep.defect[i - 1] / rep.defect[i]) / std::log(rep.h[i - 1] / rep.h[i]);
    rep.observed_order = std::min(rep.observed_order, order);
  }
  return rep;
}

namespace {

struct VelocityNormIntegrals {
  TimeIntegral b0, b1, b2, d_frob, dgrad_frob;

  void sample(const VelocityModel& vel, double t, int grid) {
    double b0v = 0.0, b1v = 0.0, b2v = 0.0, dv = 0.0, dgv = 0.0;
    for (int i = 0; i <= grid; ++i) {
      for (int j = 0; j <= grid; ++j) {
        const Eigen::Vector2d x(static_cast<double>(i) / grid, static_cast<double>(j) / grid);
        const Eigen::Matrix2d g = vel.mesh_gradient(t, x);
        const auto gx = vel.mesh_gradient_dx(t, x);
        const auto gxx = vel.mesh_gradient_dxx(t, x);
        const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d b = 0.5 * g.trace() * id - g.transpose();
        b0v = std::max(b0v, operator_norm(b));
        for (int k = 0; k < 2; ++k) {
          const Eigen::Matrix2d bk = 0.5 * gx[k].trace() * id - gx[k].transpose();
          b1v = std::max(b1v, operator_norm(bk));
        }
        for (int k = 0; k < 3; ++k) {
          const Eigen::Matrix2d bkk = 0.5 * gxx[k].trace() * id - gxx[k].transpose();
          b2v = std::max(b2v, operator_norm(bkk));
        }
        const Eigen::Matrix2d d = 0.5 * (g + g.transpose());
        dv = std::max(dv, d.norm());
        const Eigen::Matrix2d d1 = 0.5 * (gx[0] + gx[0].transpose());
        const Eigen::Matrix2d d2 = 0.5 * (gx[1] + gx[1].transpose());
        dgv = std::max(dgv, std::sqrt(d1.squaredNorm() + d2.squaredNorm()));
      }
    }
    b0.add(t, b0v);
    b1.add(t, b1v);
    b2.add(t, b2v);
    d_frob.add(t, dv);
    dgrad_frob.add(t, dgv);
  }

  double c0() const { return 2.0 * b0.value(); }
  double c1() const {
    return 4.0 * b0.value() + b1.value() + 2.0 * d_frob.value() + std::log(2.0);
  }
  double c2() const {
    return 6.0 * b0.value() + (5.0 + 2.0 * std::sqrt(2.0) * dgrad_frob.value()) * b1.value() +
           2.0 * std::sqrt(2.0) * b2.value() + 4.0 * std::sqrt(2.0) * d_frob.value();
  }
};

}  // namespace

AppendixReport appendix_bound_probe(const DGSpace& space, const VelocityModel& vel, double dt,
                                    int steps, int substeps, int sample_elements,
                                    std::uint64_t seed) {
  AppendixReport rep;
  rep.min_margin_l2 = rep.min_margin_h1 = rep.min_margin_h2 =
      std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, space.n_elements() - 1);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<int> elements;
  std::vector<Eigen::Vector2d> directions;
  for (int k = 0; k < sample_elements; ++k) {
    elements.push_back(pick(rng));
    const double a = angle(rng);
    directions.emplace_back(std::cos(a), std::sin(a));
  }

  FlowState state = init_flow_state(space);
  VelocityNormIntegrals integrals;
  const int norm_grid = 32;
  integrals.sample(vel, 0.0, norm_grid);

  auto check = [&](double t) {
    const double e0 = std::exp(integrals.c0());
    const double e1 = std::exp(integrals.c1());
    const double e2 = std::exp(integrals.c2());
    for (size_t k = 0; k < elements.size(); ++k) {
      const int e = elements[k];
      const Eigen::Vector2d q_dir = directions[k];
      double l2 = 0.0, h1 = 0.0, h2 = 0.0;
      for (int q = 0; q < space.volume_rule.size(); ++q) {
        const double w = space.volume_rule.weights[q] * space.maps[e].det;
        MetricFactorDerivatives md(state.at_volume(e, q));
        l2 += w * (md.W * q_dir).squaredNorm();
        for (int i = 0; i < 2; ++i) h1 += w * (md.dW[i] * q_dir).squaredNorm();
        for (int i = 0; i < 4; ++i) h2 += w * (md.d2W[i] * q_dir).squaredNorm();
      }
      const double area = space.mesh.area[e];
      rep.checks += 1;
      const double m0 = area * e0 / std::max(l2, 1e-300);
      const double m1 = area * e1 / std::max(h1, 1e-300);
      const double m2 = area * e2 / std::max(h2, 1e-300);
      rep.min_margin_l2 = std::min(rep.min_margin_l2, m0);
      rep.min_margin_h1 = std::min(rep.min_margin_h1, m1);
      rep.min_margin_h2 = std::min(rep.min_margin_h2, m2);
      if (m0 < 1.0 || m1 < 1.0 || m2 < 1.0) rep.violations += 1;
    }
    (void)t;
  };

  check(0.0);
  for (int step = 1; step <= steps; ++step) {
    const double t0 = state.time;
    advance_flow_state(state, vel, dt, substeps);
    // refresh the time integrals with sub-step resolution
    for (int j = 1; j <= substeps; ++j)
      integrals.sample(vel, t0 + dt * j / substeps, norm_grid);
    check(state.time);
  }
  return rep;
}

AprioriDiagnostics apriori_diagnostics(const DGSpace& space, const Scenario& s,
                                       const TimeLoopConfig& cfg) {
  if (!s.has_exact) throw std::invalid_argument("apriori_diagnostics: exact solution required");
  AprioriDiagnostics out;
  const bool symmetric = cfg.params.theta > 0.0;
  const double lhs_factor = symmetric ? cfg.params.epsilon / 4.0 : cfg.params.epsilon / 2.0;
  const double c_base = symmetric ? 8.0 : 1.0;
  const double c_exp = symmetric ? 12.0 : 2.0;
  const double proj_factor = symmetric ? 30.0 : 4.0;
  const double flux_factor = symmetric ? 97.0 / 8.0 : 17.0 / 8.0;
  const double trace_const = space.constants.trace;

  Trajectory traj =
      run_time_loop(space, s.velocity, s.data, initial_samples(space, s), cfg);

  double max_e_sq = 0.0, max_ep_sq = 0.0, e0_sq = -1.0;
  TimeIntegral int_n_e, int_n_ep, int_b_ep, int_resid_inf_sq, int_div_inf;
  const int grid = 48;

  for (const Snapshot& snap : traj.snapshots) {
    const double t = snap.t;
    const FlowState& state = snap.state;

    // sup-norm samples of the data terms entering the constants: the
    // componentwise sups of the remaining advection (l2 over components)
    // and the sup of div(mesh velocity)
    double div_inf = 0.0, r1 = 0.0, r2 = 0.0;
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j <= grid; ++j) {
        const Eigen::Vector2d x(static_cast<double>(i) / grid, static_cast<double>(j) / grid);
        div_inf = std::max(div_inf, std::abs(s.velocity.mesh_divergence(t, x)));
        const Eigen::Vector2d r = s.velocity.residual(t, x);
        r1 = std::max(r1, std::abs(r.x()));
        r2 = std::max(r2, std::abs(r.y()));
      }
    int_resid_inf_sq.add(t, r1 * r1 + r2 * r2);
    int_div_inf.add(t, div_inf);

    // exact-error quantities
    const Eigen::MatrixXd u_exact = exact_samples(space, state, s);
    const DGField proj = project_weighted(space, state, u_exact);

    double e_sq = 0.0, ep_sq = 0.0, ue_sq = 0.0, uep_sq = 0.0;
    for (int e = 0; e < space.n_elements(); ++e) {
      const Eigen::VectorXd uh = values_on_element(space, snap.u, e);
      const Eigen::VectorXd up = values_on_element(space, proj, e);
      const Eigen::Matrix2Xd guh = gradients_on_element(space, snap.u, e);
      const Eigen::Matrix2Xd gup = gradients_on_element(space, proj, e);
      for (int q = 0; q < space.volume_rule.size(); ++q) {
        const PointKinematics& pk = state.at_volume(e, q);
        const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
        const Eigen::Matrix2d inv_t = pk.F.inverse().transpose();
        const double uex = u_exact(e, q);
        const Eigen::Vector2d gex = s.exact_gradient(t, pk.x);
        e_sq += w * (uex - uh[q]) * (uex - uh[q]);
        ep_sq += w * (uex - up[q]) * (uex - up[q]);
        ue_sq += w * (gex - inv_t * guh.col(q)).squaredNorm();
        uep_sq += w * (gex - inv_t * gup.col(q)).squaredNorm();
      }
    }

    // jump terms of e, e_p and the flux-projection average gap
    double jh_e = 0.0, jh_ep = 0.0, b_ep = 0.0;
    {
      const int nq = space.volume_rule.size();
      Eigen::MatrixXd sx(space.n_elements(), nq), sy(space.n_elements(), nq);
      for (int e = 0; e < space.n_elements(); ++e)
        for (int q = 0; q < nq; ++q) {
          const PointKinematics& pk = state.at_volume(e, q);
          const Eigen::Vector2d g = std::sqrt(pk.J) * s.exact_gradient(t, pk.x);
          sx(e, q) = g.x();
          sy(e, q) = g.y();
        }
      const FluxProjection fp = project_metric_samples(space, sx, sy);
      for (int k = 0; k < space.mesh.n_edges(); ++k) {
        const Edge& edge = space.mesh.edges[k];
        if (edge.tag == BoundaryTag::neumann) continue;
        const int sides = edge.on_boundary() ? 1 : 2;
        const Eigen::VectorXd uhl = values_on_edge(space, snap.u, k, 0);
        const Eigen::VectorXd uhr =
            sides == 2 ? values_on_edge(space, snap.u, k, 1) : Eigen::VectorXd();
        const Eigen::VectorXd upl = values_on_edge(space, proj, k, 0);
        const Eigen::VectorXd upr =
            sides == 2 ? values_on_edge(space, proj, k, 1) : Eigen::VectorXd();
        for (int q = 0; q < space.edge_rule.size(); ++q) {
          const PointKinematics& pk = state.at_edge(k, q);
          const double wq = space.edge_rule.weights[q] * edge.length;
          const Eigen::Vector2d mn = pk.F.inverse().transpose() * edge.normal;
          const double uex = sides == 2 ? 0.0 : s.exact(t, pk.x);
          const double ejump = sides == 2 ? -(uhl[q] - uhr[q]) : uex - uhl[q];
          const double epjump = sides == 2 ? -(upl[q] - upr[q]) : uex - upl[q];
          const double coef = cfg.params.alpha / edge.length * wq * pk.J * mn.squaredNorm();
          jh_e += coef * ejump * ejump;
          jh_ep += coef * epjump * epjump;

          const double sqj = std::sqrt(pk.J);
          Eigen::Vector2d avg = Eigen::Vector2d::Zero();
          for (int side = 0; side < sides; ++side) {
            const int el = side == 0 ? edge.left : edge.right;
            const auto phi = space.edge_tables[k][side].phi.row(q);
            avg.x() += phi.dot(fp.x.elem(el));
            avg.y() += phi.dot(fp.y.elem(el));
          }
          avg /= sides;
          const Eigen::Vector2d gap = sqj * s.exact_gradient(t, pk.x) - avg;
          b_ep += edge.length * wq * gap.squaredNorm() / trace_const;
        }
      }
    }

    max_e_sq = std::max(max_e_sq, e_sq);
    max_ep_sq = std::max(max_ep_sq, ep_sq);
    if (e0_sq < 0.0) e0_sq = e_sq;
    int_n_e.add(t, ue_sq + 2.0 * jh_e);
    int_n_ep.add(t, uep_sq + 2.0 * jh_ep);
    int_b_ep.add(t, b_ep);
    const double c0 = 0.5 * int_div_inf.value();
    const double big_c =
        std::exp((c_base + c_exp * std::exp(4.0 * c0)) / cfg.params.epsilon *
                     int_resid_inf_sq.value() +
                 0.5 * int_div_inf.value());
    const double lhs = max_e_sq + lhs_factor * int_n_e.value();
    const double rhs =
        big_c * (e0_sq + 2.0 * max_ep_sq + proj_factor * cfg.params.epsilon * int_n_ep.value() +
                 flux_factor * cfg.params.epsilon * int_b_ep.value());
    out.times.push_back(t);
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs);
    if (rhs > 0.0) out.max_ratio = std::max(out.max_ratio, lhs / rhs);
  }
  return out;
}

AveragingBounds averaging_bound_probe(const DGSpace& space, const FlowState& state,
                                      const DGField& u) {
  AveragingBounds out;
  const DGField smooth = averaging_operator(space, u);
  DGField gap(space);
  gap.coeff = u.coeff - smooth.coeff;

  double h_gap = 0.0, u_gap = 0.0;
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd vals = values_on_element(space, gap, e);
    const Eigen::Matrix2Xd grads = gradients_on_element(space, gap, e);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      h_gap += w * vals[q] * vals[q];
      u_gap += w * (pk.F.inverse().transpose() * grads.col(q)).squaredNorm();
    }
  }

  // jump bounds with the patch-mean weights
  double bound_h = 0.0, bound_u = 0.0;
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag == BoundaryTag::neumann) continue;
    const int sides = edge.on_boundary() ? 1 : 2;
    const Eigen::VectorXd ul = values_on_edge(space, u, k, 0);
    const Eigen::VectorXd ur = sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
    const Eigen::VectorXd al = values_on_edge(space, smooth, k, 0);
    const Eigen::VectorXd ar = sides == 2 ? values_on_edge(space, smooth, k, 1) : Eigen::VectorXd();
    double j_int = 0.0, a_int = 0.0, area = 0.0;
    for (int e : space.patches.edge_patch[k]) {
      for (int q = 0; q < space.volume_rule.size(); ++q) {
        const PointKinematics& pk = state.at_volume(e, q);
        const double w = space.volume_rule.weights[q] * space.maps[e].det;
        j_int += w * pk.J;
        a_int += w * metric_stretch(pk.F, pk.J);
      }
      area += space.mesh.area[e];
    }
    const double j_mean = j_int / area, a_mean = a_int / area;
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const double wq = space.edge_rule.weights[q] * edge.length;
      const double jump = sides == 2 ? ul[q] - ur[q] : ul[q];
      bound_h += edge.length * j_mean * wq * jump * jump;
      bound_u += a_mean / edge.length * wq * jump * jump;
      if (sides == 2)
        out.max_interior_mismatch = std::max(out.max_interior_mismatch, std::abs(al[q] - ar[q]));
      else if (edge.tag == BoundaryTag::dirichlet)
        out.max_dirichlet_trace = std::max(out.max_dirichlet_trace, std::abs(al[q]));
    }
  }
  out.ratio_h = h_gap / bound_h;
  out.ratio_u = u_gap / bound_u;
  return out;
}

}  // namespace movedg
