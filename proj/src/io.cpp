#include "movedg/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace movedg {

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  return out;
}

}  // namespace

void write_fields_csv(const std::string& path, const DGSpace& space,
                      const std::vector<Snapshot>& snapshots) {
  std::ofstream out = open_or_throw(path);
  out << "step,t,element,node,x,y,value\n";
  char line[256];
  for (const Snapshot& snap : snapshots) {
    for (int e = 0; e < space.n_elements(); ++e) {
      for (int j = 0; j < space.block_size(); ++j) {
        const PointKinematics& pk = snap.state.at_node(e, j);
        std::snprintf(line, sizeof line, "%d,%.17g,%d,%d,%.17g,%.17g,%.17g\n", snap.step, snap.t,
                      e, j, pk.x.x(), pk.x.y(), snap.u.elem(e)[j]);
        out << line;
      }
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

DGField read_fields_csv(const std::string& path, const DGSpace& space, int step) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  DGField field(space);
  std::string line;
  std::getline(in, line);  // header
  int found = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    if (std::stoi(cell) != step) continue;
    std::getline(row, cell, ',');  // t
    std::getline(row, cell, ',');
    const int e = std::stoi(cell);
    std::getline(row, cell, ',');
    const int j = std::stoi(cell);
    std::getline(row, cell, ',');  // x
    std::getline(row, cell, ',');  // y
    std::getline(row, cell, ',');
    field.elem(e)[j] = std::stod(cell);
    ++found;
  }
  if (found != space.dofs())
    throw std::runtime_error("read_fields_csv: step " + std::to_string(step) + " incomplete");
  return field;
}

void write_indicators_csv(const std::string& path, const DGSpace& space,
                          const std::vector<Snapshot>& snapshots,
                          const std::vector<IndicatorReport>& reports,
                          const std::vector<Eigen::VectorXd>& local_errors) {
  std::ofstream out = open_or_throw(path);
  out << "step,t,element,cx,cy,eta_jump_sq,eta_residual_sq,eta_flux_sq,eta_total_sq,l2_error_sq\n";
  char line[320];
  for (size_t k = 0; k < snapshots.size(); ++k) {
    const Snapshot& snap = snapshots[k];
    const IndicatorReport& rep = reports[k];
    for (int e = 0; e < space.n_elements(); ++e) {
      Eigen::Vector2d c = Eigen::Vector2d::Zero();
      for (int corner = 0; corner < 3; ++corner) {
        // vertex nodes are the first entries of the placement table
        for (int j = 0; j < space.block_size(); ++j) {
          const NodePlacement& pl = space.basis.placements()[j];
          if (pl.kind == NodePlacement::vertex && pl.index == corner) {
            c += snap.state.at_node(e, j).x / 3.0;
            break;
          }
        }
      }
      const double err = local_errors.empty() ? -1.0 : local_errors[k][e];
      std::snprintf(line, sizeof line, "%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    snap.step, snap.t, e, c.x(), c.y(), rep.jump_sq[e], rep.residual_sq[e],
                    rep.flux_sq[e], rep.total_sq[e], err);
      out << line;
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_vtk_snapshot(const std::string& path, const DGSpace& space, const Snapshot& snap,
                        const Eigen::VectorXd& cell_indicator) {
  std::ofstream out = open_or_throw(path);
  const int nel = space.n_elements();
  out << "# vtk DataFile Version 3.0\n";
  out << "movedg snapshot step " << snap.step << " t " << format_float(snap.t) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 3 * nel << " double\n";
  std::array<int, 3> corner_local{};
  for (int corner = 0; corner < 3; ++corner)
    for (int j = 0; j < space.block_size(); ++j) {
      const NodePlacement& pl = space.basis.placements()[j];
      if (pl.kind == NodePlacement::vertex && pl.index == corner) corner_local[corner] = j;
    }
  for (int e = 0; e < nel; ++e)
    for (int corner = 0; corner < 3; ++corner) {
      const PointKinematics& pk = snap.state.at_node(e, corner_local[corner]);
      out << format_float(pk.x.x()) << " " << format_float(pk.x.y()) << " 0\n";
    }
  out << "CELLS " << nel << " " << 4 * nel << "\n";
  for (int e = 0; e < nel; ++e)
    out << "3 " << 3 * e << " " << 3 * e + 1 << " " << 3 * e + 2 << "\n";
  out << "CELL_TYPES " << nel << "\n";
  for (int e = 0; e < nel; ++e) out << "5\n";
  out << "POINT_DATA " << 3 * nel << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < nel; ++e)
    for (int corner = 0; corner < 3; ++corner)
      out << format_float(snap.u.elem(e)[corner_local[corner]]) << "\n";
  out << "CELL_DATA " << nel << "\nSCALARS eta_total_sq double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < nel; ++e)
    out << format_float(cell_indicator.size() == nel ? cell_indicator[e] : 0.0) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out = open_or_throw(path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace movedg
