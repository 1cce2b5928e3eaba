#pragma once

#include <map>
#include <string>

#include "hpstokes/mesh.hpp"

namespace hpstokes {

/// One per-cell data field, values listed in active-cell order.
struct CellDataField {
  std::string name;
  bool integer = false;
  std::vector<double> values;
};

/// Writes the active cells as a legacy ASCII VTK unstructured grid with the
/// given per-cell fields.  Vertex ordering follows first use over active
/// cells in ascending id order, so files diff cleanly between runs.
void write_vtk(const Mesh& mesh, const std::vector<CellDataField>& fields,
               const std::string& path, const std::string& title = "hpstokes");

struct VtkGrid {
  std::vector<Vec2> points;
  std::vector<std::array<int, 4>> cells;
  std::map<std::string, std::vector<double>> cell_data;
};

/// Minimal reader for the files produced by write_vtk.
VtkGrid read_vtk(const std::string& path);

}  // namespace hpstokes
