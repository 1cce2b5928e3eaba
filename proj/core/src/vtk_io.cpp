#include "hpstokes/vtk_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hpstokes {

void write_vtk(const Mesh& mesh, const std::vector<CellDataField>& fields,
               const std::string& path, const std::string& title) {
  const std::vector<int> active = mesh.active_cells();

  std::vector<int> point_of_vertex(mesh.n_vertices(), -1);
  std::vector<int> points;
  std::vector<std::array<int, 4>> cells;
  for (int c : active) {
    std::array<int, 4> conn;
    for (int k = 0; k < 4; ++k) {
      const int v = mesh.cell(c).v[k];
      if (point_of_vertex[v] < 0) {
        point_of_vertex[v] = static_cast<int>(points.size());
        points.push_back(v);
      }
      conn[k] = point_of_vertex[v];
    }
    cells.push_back(conn);
  }

  std::ofstream out(path, std::ios::binary);  // binary stream keeps LF endings
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << points.size() << " double\n";
  for (int v : points) out << mesh.vertex(v).x() << " " << mesh.vertex(v).y() << " 0\n";
  out << "CELLS " << cells.size() << " " << 5 * cells.size() << "\n";
  for (const auto& c : cells) out << "4 " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
  out << "CELL_TYPES " << cells.size() << "\n";
  for (size_t i = 0; i < cells.size(); ++i) out << "9\n";

  if (!fields.empty()) {
    out << "CELL_DATA " << cells.size() << "\n";
    for (const CellDataField& field : fields) {
      if (field.values.size() != active.size())
        throw std::invalid_argument("write_vtk: field size mismatch for " + field.name);
      out << "SCALARS " << field.name << (field.integer ? " int 1\n" : " double 1\n");
      out << "LOOKUP_TABLE default\n";
      for (double v : field.values) {
        if (field.integer)
          out << static_cast<long long>(std::llround(v)) << "\n";
        else
          out << v << "\n";
      }
    }
  }
  if (!out) throw std::runtime_error("write_vtk: write failed for " + path);
}

VtkGrid read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_vtk: cannot open " + path);
  VtkGrid grid;
  std::string token;
  while (in >> token) {
    if (token == "POINTS") {
      int n;
      std::string type;
      in >> n >> type;
      grid.points.resize(n);
      for (int i = 0; i < n; ++i) {
        double x, y, z;
        in >> x >> y >> z;
        grid.points[i] = Vec2(x, y);
      }
    } else if (token == "CELLS") {
      int n, total;
      in >> n >> total;
      grid.cells.resize(n);
      for (int i = 0; i < n; ++i) {
        int count;
        in >> count;
        if (count != 4) throw std::runtime_error("read_vtk: expected quad cells");
        for (int k = 0; k < 4; ++k) in >> grid.cells[i][k];
      }
    } else if (token == "SCALARS") {
      std::string name, type;
      int comps;
      in >> name >> type >> comps;
      std::string lookup, table;
      in >> lookup >> table;
      std::vector<double>& values = grid.cell_data[name];
      values.resize(grid.cells.size());
      for (size_t i = 0; i < grid.cells.size(); ++i) in >> values[i];
    }
  }
  return grid;
}

}  // namespace hpstokes
