#include "movedg/scenario.hpp"

#include <cmath>
#include <random>

namespace movedg {

namespace {

// One factor of the layer solution: expm1 keeps the ratio stable where the
// exponent is very negative.
struct LayerFactor {
  double eps;
  double denom;
  explicit LayerFactor(double eps) : eps(eps), denom(std::expm1(-1.0 / eps)) {}
  double value(double z) const { return std::expm1((z - 1.0) / eps) / denom + z - 1.0; }
  double d1(double z) const { return std::exp((z - 1.0) / eps) / (eps * denom) + 1.0; }
  double d2(double z) const { return std::exp((z - 1.0) / eps) / (eps * eps * denom); }
};

}  // namespace

Scenario boundary_layer_scenario(LayerVariant variant, double epsilon) {
  Scenario s;
  s.name = variant == LayerVariant::literal ? "boundary_layer" : "boundary_layer_stream";
  s.epsilon = epsilon;
  const double amplitude = 65536.0;  // 2^16
  const Eigen::Vector2d drift(1.0, 1.0);
  s.velocity = variant == LayerVariant::literal ? vortex_literal(amplitude, drift)
                                                : vortex_stream(amplitude, drift);

  LayerFactor lf(epsilon);
  auto ramp = [](double t) { return -std::expm1(-t); };
  auto ramp_dt = [](double t) { return std::exp(-t); };

  s.has_exact = true;
  s.exact = [lf, ramp](double t, const Eigen::Vector2d& x) {
    return ramp(t) * lf.value(x.x()) * lf.value(x.y());
  };
  s.exact_gradient = [lf, ramp](double t, const Eigen::Vector2d& x) {
    return Eigen::Vector2d(ramp(t) * lf.d1(x.x()) * lf.value(x.y()),
                           ramp(t) * lf.value(x.x()) * lf.d1(x.y()));
  };
  s.exact_laplacian = [lf, ramp](double t, const Eigen::Vector2d& x) {
    return ramp(t) * (lf.d2(x.x()) * lf.value(x.y()) + lf.value(x.x()) * lf.d2(x.y()));
  };
  s.exact_dt = [lf, ramp_dt](double t, const Eigen::Vector2d& x) {
    return ramp_dt(t) * lf.value(x.x()) * lf.value(x.y());
  };
  s.initial = [](const Eigen::Vector2d&) { return 0.0; };

  s.data = zero_data();
  s.data.source = [s_exact_dt = s.exact_dt, s_grad = s.exact_gradient, s_lap = s.exact_laplacian,
                   vel = s.velocity, epsilon](double t, const Eigen::Vector2d& x) {
    return s_exact_dt(t, x) + vel.flow(t, x).dot(s_grad(t, x)) - epsilon * s_lap(t, x);
  };
  return s;
}

Scenario smooth_scenario(MeshMotion motion, double epsilon) {
  Scenario s;
  s.name = "smooth";
  s.epsilon = epsilon;
  const double amplitude = 20.0;
  const Eigen::Vector2d no_drift(0.0, 0.0);
  VelocityModel vortex = vortex_stream(amplitude, no_drift);
  switch (motion) {
    case MeshMotion::none:
      s.velocity = frozen_mesh(vortex);
      break;
    case MeshMotion::full:
      s.velocity = vortex;
      break;
    case MeshMotion::layer_field: {
      // advection of the small vortex, mesh moving with the 2^16 field
      VelocityModel big = vortex_literal(65536.0, no_drift);
      s.velocity = big;
      s.velocity.flow = vortex.flow;
      s.velocity.flow_gradient = vortex.flow_gradient;
      break;
    }
  }

  auto ramp = [](double t) { return -std::expm1(-t); };
  auto ramp_dt = [](double t) { return std::exp(-t); };
  const double pi = M_PI;
  s.has_exact = true;
  s.exact = [ramp, pi](double t, const Eigen::Vector2d& x) {
    return ramp(t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  s.exact_gradient = [ramp, pi](double t, const Eigen::Vector2d& x) {
    return Eigen::Vector2d(ramp(t) * pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                           ramp(t) * pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  s.exact_laplacian = [ramp, pi](double t, const Eigen::Vector2d& x) {
    return -2.0 * pi * pi * ramp(t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  s.exact_dt = [ramp_dt, pi](double t, const Eigen::Vector2d& x) {
    return ramp_dt(t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  s.initial = [](const Eigen::Vector2d&) { return 0.0; };

  s.data = zero_data();
  s.data.source = [dt = s.exact_dt, grad = s.exact_gradient, lap = s.exact_laplacian,
                   vel = s.velocity, epsilon](double t, const Eigen::Vector2d& x) {
    return dt(t, x) + vel.flow(t, x).dot(grad(t, x)) - epsilon * lap(t, x);
  };
  return s;
}

Scenario frozen_mesh_variant(const Scenario& s) {
  Scenario out = s;
  out.name = s.name + "_static";
  out.velocity = frozen_mesh(s.velocity);
  return out;
}

double strong_residual_defect(const Scenario& s, int nsamples, std::uint64_t seed,
                              double space_step) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> in_space(0.02, 0.98);
  std::uniform_real_distribution<double> in_time(0.05, 1.0);
  const double hx = space_step, ht = 1e-5;
  double worst = 0.0;
  auto u = s.exact;
  for (int k = 0; k < nsamples; ++k) {
    const double t = in_time(rng);
    const Eigen::Vector2d x(in_space(rng), in_space(rng));
    auto ux = [&](double dx, double dy) { return u(t, x + Eigen::Vector2d(dx, dy)); };
    auto ut = [&](double dt) { return u(t + dt, x); };
    // fourth-order stencils
    const double du_dt = (-ut(2 * ht) + 8 * ut(ht) - 8 * ut(-ht) + ut(-2 * ht)) / (12 * ht);
    const double du_dx =
        (-ux(2 * hx, 0) + 8 * ux(hx, 0) - 8 * ux(-hx, 0) + ux(-2 * hx, 0)) / (12 * hx);
    const double du_dy =
        (-ux(0, 2 * hx) + 8 * ux(0, hx) - 8 * ux(0, -hx) + ux(0, -2 * hx)) / (12 * hx);
    const double uxx = (-ux(2 * hx, 0) + 16 * ux(hx, 0) - 30 * ux(0, 0) + 16 * ux(-hx, 0) -
                        ux(-2 * hx, 0)) /
                       (12 * hx * hx);
    const double uyy = (-ux(0, 2 * hx) + 16 * ux(0, hx) - 30 * ux(0, 0) + 16 * ux(0, -hx) -
                        ux(0, -2 * hx)) /
                       (12 * hx * hx);
    const Eigen::Vector2d v = s.velocity.flow(t, x);
    const double transport = v.x() * du_dx + v.y() * du_dy;
    const double residual = du_dt + transport - s.epsilon * (uxx + uyy) - s.data.source(t, x);
    const double scale = std::max(1.0, std::abs(du_dt) + std::abs(transport) +
                                           std::abs(s.epsilon * (uxx + uyy)));
    worst = std::max(worst, std::abs(residual) / scale);
  }
  return worst;
}

Eigen::MatrixXd initial_samples(const DGSpace& space, const Scenario& s) {
  Eigen::MatrixXd samples(space.n_elements(), space.volume_rule.size());
  for (int e = 0; e < space.n_elements(); ++e)
    for (int q = 0; q < space.volume_rule.size(); ++q)
      samples(e, q) = s.initial(space.volume_point(e, q));
  return samples;
}

Eigen::MatrixXd exact_samples(const DGSpace& space, const FlowState& state, const Scenario& s) {
  Eigen::MatrixXd samples(space.n_elements(), space.volume_rule.size());
  for (int e = 0; e < space.n_elements(); ++e)
    for (int q = 0; q < space.volume_rule.size(); ++q)
      samples(e, q) = s.exact(state.time, state.at_volume(e, q).x);
  return samples;
}

ErrorReport error_norms(const DGSpace& space, const FlowState& state, const Scenario& s,
                        const DGField& u, const FormParams& p) {
  if (!s.has_exact) throw std::invalid_argument("error_norms: scenario has no exact solution");
  const double t = state.time;
  ErrorReport rep;
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd vals = values_on_element(space, u, e);
    const Eigen::Matrix2Xd grads = gradients_on_element(space, u, e);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      const double err = s.exact(t, pk.x) - vals[q];
      // exact physical gradient minus transported broken gradient
      const Eigen::Vector2d gerr =
          s.exact_gradient(t, pk.x) - pk.F.inverse().transpose() * grads.col(q);
      const double beta = std::max(s.velocity.reaction(t, pk.x), 0.0);
      rep.l2_sq += w * err * err;
      rep.energy_sq += w * (p.epsilon * gerr.squaredNorm() + beta * err * err);
    }
    for (int j = 0; j < space.block_size(); ++j) {
      const PointKinematics& pk = state.at_node(e, j);
      rep.node_max = std::max(rep.node_max, std::abs(s.exact(t, pk.x) - u.elem(e)[j]));
    }
  }
  // jump penalty of the error: the exact solution is continuous with zero
  // Dirichlet trace, so the jump of the error is driven by u_h alone except
  // on Dirichlet edges where the exact trace enters (it vanishes there for
  // the scenarios of record, but evaluate it anyway).
  for (int k = 0; k < space.mesh.n_edges(); ++k) {
    const Edge& edge = space.mesh.edges[k];
    if (edge.tag == BoundaryTag::neumann) continue;
    const int sides = edge.on_boundary() ? 1 : 2;
    const Eigen::VectorXd ul = values_on_edge(space, u, k, 0);
    const Eigen::VectorXd ur = sides == 2 ? values_on_edge(space, u, k, 1) : Eigen::VectorXd();
    for (int q = 0; q < space.edge_rule.size(); ++q) {
      const PointKinematics& pk = state.at_edge(k, q);
      const double wq = space.edge_rule.weights[q] * edge.length;
      double ejump;
      if (sides == 2) {
        ejump = -(ul[q] - ur[q]);
      } else {
        ejump = s.exact(t, pk.x) - ul[q];
      }
      const Eigen::Vector2d mn = pk.F.inverse().transpose() * edge.normal;
      rep.energy_sq +=
          p.epsilon * p.alpha / edge.length * wq * pk.J * ejump * ejump * mn.squaredNorm();
    }
  }
  return rep;
}

Eigen::VectorXd element_error_sq(const DGSpace& space, const FlowState& state, const Scenario& s,
                                 const DGField& u) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.n_elements());
  for (int e = 0; e < space.n_elements(); ++e) {
    const Eigen::VectorXd vals = values_on_element(space, u, e);
    for (int q = 0; q < space.volume_rule.size(); ++q) {
      const PointKinematics& pk = state.at_volume(e, q);
      const double w = space.volume_rule.weights[q] * space.maps[e].det * pk.J;
      const double err = s.exact(state.time, pk.x) - vals[q];
      out[e] += w * err * err;
    }
  }
  return out;
}

ConvergenceTable convergence_study(const Scenario& s, const std::vector<int>& ns, int degree,
                                   double dt, int steps, FormParams params, int substeps,
                                   DiagonalPattern pattern) {
  if (ns.size() < 2) throw std::invalid_argument("convergence_study: need at least 2 mesh sizes");
  if (!s.has_exact) throw std::invalid_argument("convergence_study: exact solution required");
  ConvergenceTable table;
  for (int n : ns) {
    DGSpace space = make_space(build_structured_unit_square(n, pattern), degree);
    TimeLoopConfig cfg;
    cfg.dt = dt;
    cfg.steps = steps;
    cfg.substeps = substeps;
    cfg.params = params;
    cfg.params.epsilon = s.epsilon;
    Trajectory traj = run_time_loop(space, s.velocity, s.data, initial_samples(space, s), cfg);
    ConvergenceRow row;
    row.n = n;
    row.h = space.mesh.max_edge_length();
    for (const Snapshot& snap : traj.snapshots) {
      ErrorReport err = error_norms(space, snap.state, s, snap.u, cfg.params);
      row.linf_l2 = std::max(row.linf_l2, std::sqrt(err.l2_sq));
      if (snap.step == traj.snapshots.back().step) row.final_energy = std::sqrt(err.energy_sq);
    }
    if (!table.rows.empty()) {
      const ConvergenceRow& prev = table.rows.back();
      row.rate = std::log(prev.linf_l2 / row.linf_l2) / std::log(prev.h / row.h);
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace movedg
