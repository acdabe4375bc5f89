#pragma once

#include <string>
#include <vector>

#include "movedg/estimators.hpp"
#include "movedg/time_loop.hpp"

namespace movedg {

/// Nodal field dump: one row per Lagrange node per emitted step, with the
/// node position moved by the flow map. All floats use 17 significant
/// digits so binary64 values round-trip exactly.
void write_fields_csv(const std::string& path, const DGSpace& space,
                      const std::vector<Snapshot>& snapshots);

/// Re-read the coefficients of one emitted step from a fields.csv file.
DGField read_fields_csv(const std::string& path, const DGSpace& space, int step);

/// Per-element indicator dump across emitted steps, with the transported
/// element centroid and the local error when available.
void write_indicators_csv(const std::string& path, const DGSpace& space,
                          const std::vector<Snapshot>& snapshots,
                          const std::vector<IndicatorReport>& reports,
                          const std::vector<Eigen::VectorXd>& local_errors);

/// Legacy ASCII unstructured-grid snapshot: transported corner vertices,
/// triangles, the solution as point data and the indicator as cell data.
void write_vtk_snapshot(const std::string& path, const DGSpace& space, const Snapshot& snap,
                        const Eigen::VectorXd& cell_indicator);

void write_text(const std::string& path, const std::string& content);

std::string format_float(double v);  // %.17g

}  // namespace movedg
