#pragma once

// File formats: the binary MVD container for vertex functions, CSV and PLY
// exports, and the position TSV used by scattered (non-grid) data.
//
// MVD layout: one JSON header line
//   {"format":"mvd","version":1,"manifold":...,"params":{...},"shape":[...],"mask":bool}
// followed by little-endian float64 coordinates, vertex after vertex (SPD
// matrices row-major), then one mask byte per vertex when "mask" is true.

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mvg/vertex_function.hpp"

namespace mvg {

void writeMvd(std::ostream& os, const VertexFunction& f);
VertexFunction readMvd(std::istream& is);
void saveMvd(const std::string& path, const VertexFunction& f);
VertexFunction loadMvd(const std::string& path);

/// "euclidean", "circle", "sphere2" or "spd" plus the size parameter.
std::string manifoldTag(const Manifold& m);
Manifold manifoldFromTag(const std::string& tag, int param);

/// One row per vertex with the ambient coordinates, no header.
void exportCsv(const std::string& path, const VertexFunction& f);
/// Reads a CSV written by exportCsv. For Euclidean data the dimension is
/// taken from the column count when `param` is 0. An empty shape means a
/// flat list of rows.
VertexFunction importCsv(const std::string& path, const std::string& manifold, int param,
                         std::vector<int> shape = {});

/// ASCII PLY point cloud. Vertex positions come from `positions` (3 x n) or,
/// when absent, from the grid indices (column, row, 0). Values are attached
/// as extra properties: unit normals for sphere data, the six independent
/// tensor entries for SPD(3) and raw coordinates otherwise.
void exportPly(const std::string& path, const VertexFunction& f,
               const std::optional<Eigen::MatrixXd>& positions = std::nullopt);

/// "idx<TAB>x<TAB>y<TAB>z" per line.
void savePositions(const std::string& path, const Eigen::MatrixXd& positions);
Eigen::MatrixXd loadPositions(const std::string& path);

}  // namespace mvg
