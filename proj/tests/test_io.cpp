#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "movedg/config.hpp"
#include "movedg/io.hpp"
#include "movedg/scenario.hpp"

using namespace movedg;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Trajectory tiny_run(const DGSpace& space, const Scenario& s, int steps) {
  TimeLoopConfig cfg;
  cfg.dt = std::ldexp(1.0, -16);
  cfg.steps = steps;
  cfg.params = FormParams{s.epsilon, 1.0, 10.0, 0.0};
  return run_time_loop(space, s.velocity, s.data, initial_samples(space, s), cfg);
}

}  // namespace

TEST_CASE("fields csv round-trips coefficients bit-exactly and deterministically") {
  const std::string dir = std::filesystem::temp_directory_path() / "movedg_io_test";
  std::filesystem::create_directories(dir);
  DGSpace space = make_space(build_structured_unit_square(3), 2);
  Scenario s = boundary_layer_scenario(LayerVariant::literal);
  Trajectory traj = tiny_run(space, s, 3);

  write_fields_csv(dir + "/fields.csv", space, traj.snapshots);
  for (const Snapshot& snap : traj.snapshots) {
    DGField back = read_fields_csv(dir + "/fields.csv", space, snap.step);
    CHECK((back.coeff - snap.u.coeff).cwiseAbs().maxCoeff() == 0.0);
  }

  write_fields_csv(dir + "/fields2.csv", space, traj.snapshots);
  CHECK(slurp(dir + "/fields.csv") == slurp(dir + "/fields2.csv"));
  CHECK_THROWS(read_fields_csv(dir + "/fields.csv", space, 99));
}

TEST_CASE("vtk snapshot has the advertised record counts") {
  const std::string dir = std::filesystem::temp_directory_path() / "movedg_io_test";
  std::filesystem::create_directories(dir);
  DGSpace space = make_space(build_structured_unit_square(2), 1);
  Scenario s = boundary_layer_scenario(LayerVariant::stream_function);
  Trajectory traj = tiny_run(space, s, 1);
  Eigen::VectorXd indicator = Eigen::VectorXd::LinSpaced(space.n_elements(), 0.0, 1.0);
  write_vtk_snapshot(dir + "/snap.vtk", space, traj.snapshots.back(), indicator);
  const std::string text = slurp(dir + "/snap.vtk");
  CHECK(text.find("# vtk DataFile Version 3.0") == 0);
  CHECK(text.find("POINTS 24 double") != std::string::npos);
  CHECK(text.find("CELLS 8 32") != std::string::npos);
  CHECK(text.find("CELL_DATA 8") != std::string::npos);
  CHECK(text.find("POINT_DATA 24") != std::string::npos);
  size_t triangles = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (line == "5") ++triangles;
  CHECK(triangles == 8);
}

TEST_CASE("indicator csv carries one row per element and step") {
  const std::string dir = std::filesystem::temp_directory_path() / "movedg_io_test";
  std::filesystem::create_directories(dir);
  DGSpace space = make_space(build_structured_unit_square(2), 1);
  Scenario s = boundary_layer_scenario(LayerVariant::literal);
  Trajectory traj = tiny_run(space, s, 2);
  std::vector<IndicatorReport> reports;
  std::vector<Eigen::VectorXd> errors;
  for (const Snapshot& snap : traj.snapshots) {
    PatchWeights weights = compute_patch_weights(space, snap.state, s.velocity, s.epsilon);
    reports.push_back(element_indicators(space, snap.state, s.velocity, s.data, weights, snap.u,
                                         snap.du_dt, FormParams{s.epsilon, 1.0, 10.0, 0.0}));
    errors.push_back(element_error_sq(space, snap.state, s, snap.u));
  }
  write_indicators_csv(dir + "/indicators.csv", space, traj.snapshots, reports, errors);
  const std::string text = slurp(dir + "/indicators.csv");
  size_t rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 1 + traj.snapshots.size() * space.n_elements());
}

TEST_CASE("config defaults reproduce the experiment of record") {
  RunConfig cfg = parse_config("");
  CHECK(cfg.scenario == "boundary_layer");
  CHECK(cfg.n == 9);
  CHECK(cfg.epsilon == 0.01);
  CHECK(cfg.dt == std::ldexp(1.0, -16));
  CHECK(cfg.steps == 12);
  CHECK(cfg.substeps == 2);
  CHECK(cfg.theta == 1.0);
  CHECK(cfg.alpha == 0.0);  // auto
  CHECK(cfg.gamma0 == 0.0);
}

TEST_CASE("config parsing: comments, exact powers, rejection with line numbers") {
  RunConfig cfg = parse_config("# comment line\nn = 6\ndt = 2^-10\nalpha = auto\n");
  CHECK(cfg.n == 6);
  CHECK(cfg.dt == std::ldexp(1.0, -10));
  CHECK(cfg.alpha == 0.0);

  CHECK_THROWS_AS(parse_config("theta=0\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("n=9\nbogus=1\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("p=9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dt=banana\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just text\n"), ConfigError);
}

TEST_CASE("overrides go through the same validation") {
  RunConfig cfg = parse_config("");
  cfg.set("epsilon", "0.25");
  CHECK(cfg.epsilon == 0.25);
  CHECK_THROWS_AS(cfg.set("unknown", "1"), ConfigError);
  cfg.set("theta", "-1");
  cfg.validate();
}
