// Command-line driver: solve runs one experiment and writes field,
// indicator and grid files; probe exposes the verification probes;
// converge runs a mesh-refinement sweep; compare-static-moving runs the
// same experiment with and without mesh motion and compares the errors.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "movedg/config.hpp"
#include "movedg/io.hpp"
#include "movedg/probes.hpp"

using namespace movedg;

namespace {

Scenario make_scenario(const RunConfig& cfg) {
  Scenario s;
  if (cfg.scenario == "boundary_layer") {
    s = boundary_layer_scenario(
        cfg.variant == "literal" ? LayerVariant::literal : LayerVariant::stream_function,
        cfg.epsilon);
  } else {
    MeshMotion motion = MeshMotion::full;
    if (cfg.variant == "none") motion = MeshMotion::none;
    else if (cfg.variant == "literal") motion = MeshMotion::layer_field;
    s = smooth_scenario(motion, cfg.epsilon);
  }
  s.velocity.gamma0 = cfg.gamma0;
  return s;
}

DGSpace make_space_for(const RunConfig& cfg) {
  const DiagonalPattern pattern =
      cfg.diagonal == "fixed" ? DiagonalPattern::fixed : DiagonalPattern::alternating;
  return make_space(build_structured_unit_square(cfg.n, pattern), cfg.p);
}

FormParams make_params(const RunConfig& cfg, const DGSpace& space) {
  FormParams p;
  p.epsilon = cfg.epsilon;
  p.theta = cfg.theta;
  p.alpha = cfg.alpha > 0.0 ? cfg.alpha : std::max(10.0, 2.0 * space.constants.trace);
  p.gamma0 = cfg.gamma0;
  return p;
}

TimeLoopConfig make_loop(const RunConfig& cfg, const FormParams& p) {
  TimeLoopConfig loop;
  loop.dt = cfg.dt;
  loop.steps = cfg.steps;
  loop.substeps = cfg.substeps;
  loop.params = p;
  loop.cadence = cfg.cadence;
  loop.weighted_initial_projection = cfg.initial_projection == "weighted";
  loop.log = &std::cout;
  return loop;
}

int cmd_solve(const RunConfig& cfg) {
  const Scenario scenario = make_scenario(cfg);
  DGSpace space = make_space_for(cfg);
  const FormParams params = make_params(cfg, space);
  TimeLoopConfig loop = make_loop(cfg, params);

  std::filesystem::create_directories(cfg.outdir);
  loop.with_indicators = true;
  Trajectory traj =
      run_time_loop(space, scenario.velocity, scenario.data, initial_samples(space, scenario), loop);

  std::vector<IndicatorReport> reports;
  std::vector<Eigen::VectorXd> local_errors;
  SharpNormAccumulator sharp;
  TimeIntegral int_eta1, int_eta2;
  double max_eta3 = 0.0;
  std::ostringstream report;
  report << "# run: " << describe(cfg) << "\n";
  report << "# trace constant " << format_float(space.constants.trace) << " inverse constant "
         << format_float(space.constants.inverse) << " alpha " << format_float(params.alpha)
         << "\n";
  report << "step t eta1_sq eta2_sq eta3_sq l2_error energy_error\n";
  for (const Snapshot& snap : traj.snapshots) {
    const IndicatorReport& rep = snap.indicators;
    int_eta1.add(snap.t, rep.weighted_total_sq);
    int_eta2.add(snap.t, rep.jump_rate_sq);
    max_eta3 = std::max(max_eta3, rep.jump_size_sq);
    double l2err = -1.0, energy_err = -1.0;
    if (scenario.has_exact) {
      const ErrorReport err = error_norms(space, snap.state, scenario, snap.u, params);
      l2err = std::sqrt(err.l2_sq);
      energy_err = std::sqrt(err.energy_sq);
      sharp.add(snap.t, err.l2_sq, err.energy_sq);
      local_errors.push_back(element_error_sq(space, snap.state, scenario, snap.u));
    }
    report << snap.step << " " << format_float(snap.t) << " "
           << format_float(rep.weighted_total_sq) << " " << format_float(rep.jump_rate_sq) << " "
           << format_float(rep.jump_size_sq) << " " << format_float(l2err) << " "
           << format_float(energy_err) << "\n";
    char name[64];
    std::snprintf(name, sizeof name, "/snapshot_%04d.vtk", snap.step);
    write_vtk_snapshot(cfg.outdir + name, space, snap, rep.total_sq);
    reports.push_back(rep);
  }
  write_fields_csv(cfg.outdir + "/fields.csv", space, traj.snapshots);
  write_indicators_csv(cfg.outdir + "/indicators.csv", space, traj.snapshots, reports,
                       local_errors);
  write_text(cfg.outdir + "/mesh.txt", serialize_mesh(space.mesh));
  if (scenario.has_exact) {
    const double T = traj.snapshots.back().t;
    const double s0 = [&] {
      // S_0 = exp(2 C_0(T)) with C_0 from the mesh-velocity divergence
      TimeIntegral div;
      for (const Snapshot& snap : traj.snapshots) {
        double m = 0.0;
        for (int i = 0; i <= 48; ++i)
          for (int j = 0; j <= 48; ++j)
            m = std::max(m, std::abs(scenario.velocity.mesh_divergence(
                                snap.t, Eigen::Vector2d(i / 48.0, j / 48.0))));
        div.add(snap.t, m);
      }
      return std::exp(div.value());
    }();
    const double estimator_sq =
        s0 * (int_eta1.value() + T * int_eta2.value() + max_eta3);
    report << "# sharp_norm " << format_float(std::sqrt(sharp.value_sq())) << " estimator "
           << format_float(std::sqrt(estimator_sq)) << " effectivity "
           << format_float(std::sqrt(sharp.value_sq() / estimator_sq)) << "\n";
  }
  write_text(cfg.outdir + "/report.txt", report.str());
  std::cout << "wrote " << cfg.outdir << "/{fields.csv,indicators.csv,report.txt,*.vtk}\n";
  return 0;
}

bool element_touches_boundary(const Mesh& mesh, int e) {
  for (int k : mesh.element_edges[e])
    if (mesh.edges[k].on_boundary()) return true;
  for (int v : mesh.elements[e]) {
    const Eigen::Vector2d& p = mesh.vertices[v];
    if (p.x() == 0.0 || p.x() == 1.0 || p.y() == 0.0 || p.y() == 1.0) return true;
  }
  return false;
}

int cmd_compare(const RunConfig& cfg) {
  const Scenario moving = make_scenario(cfg);
  const Scenario frozen = frozen_mesh_variant(moving);
  DGSpace space = make_space_for(cfg);
  const FormParams params = make_params(cfg, space);
  TimeLoopConfig loop = make_loop(cfg, params);
  loop.log = nullptr;

  auto final_error = [&](const Scenario& s) {
    Trajectory traj = run_time_loop(space, s.velocity, s.data, initial_samples(space, s), loop);
    const Snapshot& last = traj.snapshots.back();
    Eigen::VectorXd per_element = element_error_sq(space, last.state, s, last.u);
    int argmax = 0;
    per_element.maxCoeff(&argmax);
    return std::make_tuple(std::sqrt(per_element.sum()), argmax, per_element);
  };

  auto [err_moving, worst_moving, per_moving] = final_error(moving);
  auto [err_frozen, worst_frozen, per_frozen] = final_error(frozen);

  double band_max = 0.0;
  Eigen::VectorXd band(space.n_elements());
  for (int e = 0; e < space.n_elements(); ++e) {
    band[e] = moving.velocity.mesh(0.0, space.mesh.centroid(e)).norm();
    band_max = std::max(band_max, band[e]);
  }
  const bool moving_on_boundary = element_touches_boundary(space.mesh, worst_moving);
  const bool frozen_in_band = band[worst_frozen] >= 0.5 * band_max &&
                              !element_touches_boundary(space.mesh, worst_frozen);

  std::ostringstream report;
  report << "moving_l2_error " << format_float(err_moving) << "\n";
  report << "static_l2_error " << format_float(err_frozen) << "\n";
  report << "moving_error_smaller " << (err_moving < err_frozen ? "yes" : "no") << "\n";
  report << "moving_worst_element " << worst_moving << " boundary_adjacent "
         << (moving_on_boundary ? "yes" : "no") << "\n";
  report << "static_worst_element " << worst_frozen << " in_high_velocity_band "
         << (frozen_in_band ? "yes" : "no") << "\n";
  std::filesystem::create_directories(cfg.outdir);
  write_text(cfg.outdir + "/compare.txt", report.str());
  std::cout << report.str();
  const bool pass = err_moving < err_frozen && moving_on_boundary && frozen_in_band;
  std::cout << (pass ? "PASS" : "FAIL") << " error ordering and worst-element locations\n";
  return 0;
}

int cmd_probe(const RunConfig& cfg, const std::string& which) {
  std::filesystem::create_directories(cfg.outdir);
  std::ostringstream report;
  std::ostringstream csv;
  int failures = 0;
  if (which == "coercivity") {
    csv << "theta,n,p,alpha,min_ratio\n";
    for (double theta : {-1.0, 1.0}) {
      auto cases = coercivity_probe({4, 6}, {1, 2}, theta > 0 ? std::vector<double>{2.0, 4.0}
                                                              : std::vector<double>{2.0},
                                    theta, 200, cfg.seed, cfg.epsilon, 1.0);
      for (size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        // SIPG must be positive at 2 C_T and clearly coercive at 4 C_T;
        // NIPG carries the 1/2 constant from the identity argument
        bool ok;
        if (theta < 0) ok = c.min_ratio >= 0.45;
        else if (i % 2 == 0) ok = c.min_ratio > 0.0;
        else ok = c.min_ratio >= 0.2;
        failures += !ok;
        report << (ok ? "PASS" : "FAIL") << " coercivity theta " << theta << " n " << c.n
               << " p " << c.degree << " alpha " << format_float(c.alpha) << " min_ratio "
               << format_float(c.min_ratio) << "\n";
        csv << theta << "," << c.n << "," << c.degree << "," << format_float(c.alpha) << ","
            << format_float(c.min_ratio) << "\n";
      }
    }
  } else if (which == "inconsistency") {
    Scenario s = smooth_scenario(MeshMotion::full, cfg.epsilon);
    DGSpace probe_space = make_space(build_structured_unit_square(3), cfg.p);
    const double alpha = std::max(10.0, 2.0 * probe_space.constants.trace);
    InconsistencyReport rep = inconsistency_probe(s, {3, 6, 12}, cfg.p, 0.05, alpha);
    const bool ok = rep.observed_order >= 0.9;
    failures += !ok;
    report << (ok ? "PASS" : "FAIL") << " inconsistency decay order "
           << format_float(rep.observed_order) << " defects";
    csv << "n,h,defect\n";
    for (size_t i = 0; i < rep.defect.size(); ++i) {
      report << " " << format_float(rep.defect[i]);
      csv << rep.ns[i] << "," << format_float(rep.h[i]) << "," << format_float(rep.defect[i])
          << "\n";
    }
    report << "\n";
  } else if (which == "appendix") {
    csv << "variant,checks,violations,margin_l2,margin_h1,margin_h2\n";
    for (const char* variant : {"literal", "stream_function"}) {
      RunConfig sub = cfg;
      sub.scenario = "boundary_layer";
      sub.variant = variant;
      const Scenario s = make_scenario(sub);
      DGSpace space = make_space_for(sub);
      AppendixReport rep =
          appendix_bound_probe(space, s.velocity, cfg.dt, cfg.steps, cfg.substeps, 20, cfg.seed);
      const bool ok = rep.all_hold();
      failures += !ok;
      report << (ok ? "PASS" : "FAIL") << " appendix bounds variant " << variant << " checks "
             << rep.checks << " margins " << format_float(rep.min_margin_l2) << " "
             << format_float(rep.min_margin_h1) << " " << format_float(rep.min_margin_h2) << "\n";
      csv << variant << "," << rep.checks << "," << rep.violations << ","
          << format_float(rep.min_margin_l2) << "," << format_float(rep.min_margin_h1) << ","
          << format_float(rep.min_margin_h2) << "\n";
    }
  } else if (which == "apriori") {
    Scenario s = smooth_scenario(MeshMotion::full, cfg.epsilon);
    DGSpace space = make_space_for(cfg);
    FormParams params = make_params(cfg, space);
    TimeLoopConfig loop = make_loop(cfg, params);
    loop.log = nullptr;
    AprioriDiagnostics diag = apriori_diagnostics(space, s, loop);
    const bool ok = diag.holds();
    failures += !ok;
    report << (ok ? "PASS" : "FAIL") << " apriori bound theta " << params.theta << " max ratio "
           << format_float(diag.max_ratio) << "\n";
    csv << "t,lhs,rhs\n";
    for (size_t i = 0; i < diag.times.size(); ++i)
      csv << format_float(diag.times[i]) << "," << format_float(diag.lhs[i]) << ","
          << format_float(diag.rhs[i]) << "\n";
  } else {
    std::cerr << "unknown probe '" << which << "'\n";
    return 1;
  }
  std::cout << report.str();
  write_text(cfg.outdir + "/probe_" + which + ".txt", report.str());
  write_text(cfg.outdir + "/probe_" + which + ".csv", csv.str());
  // findings are reported in the text; nonzero exits are reserved for
  // validation and runtime failures
  (void)failures;
  return 0;
}

int cmd_converge(const RunConfig& cfg) {
  const Scenario s = make_scenario(cfg);
  DGSpace coarse = make_space(build_structured_unit_square(4), cfg.p);
  FormParams params = make_params(cfg, coarse);
  ConvergenceTable table =
      convergence_study(s, {4, 8, 16}, cfg.p, cfg.dt, cfg.steps, params, cfg.substeps);
  std::ostringstream report;
  report << "n h linf_l2 rate final_energy\n";
  for (const auto& row : table.rows)
    report << row.n << " " << format_float(row.h) << " " << format_float(row.linf_l2) << " "
           << format_float(row.rate) << " " << format_float(row.final_energy) << "\n";
  std::filesystem::create_directories(cfg.outdir);
  write_text(cfg.outdir + "/convergence.txt", report.str());
  std::cout << report.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: movedg <solve|probe|converge|compare-static-moving> [probe-name] "
                 "[config] [--key=value ...]\n";
    return 1;
  }
  std::string command = argv[1];
  int arg = 2;
  std::string probe_name;
  if (command == "probe") {
    if (argc < 3) {
      std::cerr << "probe requires a name: coercivity|inconsistency|appendix|apriori\n";
      return 1;
    }
    probe_name = argv[arg++];
  }
  RunConfig cfg;
  try {
    if (arg < argc && argv[arg][0] != '-') cfg = parse_config_file(argv[arg++]);
    for (; arg < argc; ++arg) {
      std::string token = argv[arg];
      if (token.rfind("--", 0) != 0) throw ConfigError("expected --key=value, got " + token);
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw ConfigError("expected --key=value, got " + token);
      cfg.set(token.substr(2, eq - 2), token.substr(eq + 1));
    }
    if (const char* env = std::getenv("MOVEDG_OUTDIR")) cfg.outdir = env;
    cfg.validate();
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 1;
  }
  try {
    if (command == "solve") return cmd_solve(cfg);
    if (command == "probe") return cmd_probe(cfg, probe_name);
    if (command == "converge") return cmd_converge(cfg);
    if (command == "compare-static-moving") return cmd_compare(cfg);
    std::cerr << "unknown command '" << command << "'\n";
    return 1;
  } catch (const EntanglementError& err) {
    std::cerr << "runtime failure: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "runtime failure: " << err.what() << "\n";
    return 2;
  }
}
