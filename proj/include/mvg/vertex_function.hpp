#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <numeric>
#include <utility>
#include <string>
#include <vector>

#include "mvg/manifold.hpp"

namespace mvg {

/// Columns of tangent vectors, one per vertex, each based at f(u).
using TangentVertexField = Eigen::MatrixXd;
/// Columns of tangent vectors, one per stored edge (u, v) in graph edge order,
/// each based at f(u).
using TangentEdgeFunction = Eigen::MatrixXd;

/// Identity/pole/origin point used to initialize fresh vertex functions.
inline Coords referencePoint(const Manifold& m) {
  Coords x = m.zero();
  switch (m.kind()) {
    case ManifoldKind::Sphere2: x(2) = 1; break;
    case ManifoldKind::Spd:
      for (int i = 0; i < m.param(); ++i) x(i * m.param() + i) = 1;
      break;
    default: break;
  }
  return x;
}

/// A manifold-valued signal on the vertices of a graph.
struct VertexFunction {
  Manifold manifold;
  /// ambientDim x numVertices, column u holds f(u).
  Eigen::MatrixXd values;
  /// Grid extents, slowest index first; product equals the vertex count.
  std::vector<int> shape;
  /// Empty when every vertex is active, otherwise 1 = active, 0 = masked.
  std::vector<std::uint8_t> mask;

  VertexFunction() = default;

  VertexFunction(const Manifold& m, std::vector<int> gridShape)
      : manifold(m), shape(std::move(gridShape)) {
    const long n = std::accumulate(shape.begin(), shape.end(), 1L, std::multiplies<>());
    values = referencePoint(m).replicate(1, n);
  }

  VertexFunction(const Manifold& m, int n) : VertexFunction(m, std::vector<int>{n}) {}

  int size() const { return static_cast<int>(values.cols()); }
  bool active(int u) const { return mask.empty() || mask[u] != 0; }
  int activeCount() const {
    if (mask.empty()) return size();
    int c = 0;
    for (auto m : mask) c += m != 0;
    return c;
  }

  auto point(int u) const { return values.col(u); }
  auto point(int u) { return values.col(u); }

  /// Grid height and width; a 1-D shape is a single row.
  std::pair<int, int> gridSize() const;

  /// Throws DomainError on inconsistent shape/mask sizes or invalid points.
  void validate() const;

  bool sameDomain(const VertexFunction& other) const {
    return manifold == other.manifold && size() == other.size();
  }
};

}  // namespace mvg
