#pragma once

// Finite weighted directed graphs in compressed adjacency form, plus the
// constructors used by the experiments: local grids, epsilon-balls over
// embedded positions and patch-based k-nearest-neighbor graphs.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mvg/vertex_function.hpp"

namespace mvg {

class WeightedGraph {
 public:
  struct Edge {
    int from;
    int to;
    double weight;
  };

  WeightedGraph() = default;

  /// Builds the graph from a directed edge list. Rejects self-loops,
  /// non-positive or non-finite weights, out-of-range indices and duplicates.
  static WeightedGraph fromEdges(int numVertices, std::vector<Edge> edges);

  int numVertices() const { return n_; }
  std::size_t numEdges() const { return targets_.size(); }

  /// (u, v) stored iff (v, u) stored, with bitwise equal weights.
  bool isSymmetric() const { return symmetric_; }
  /// (u, v) stored iff (v, u) stored; weights may differ.
  bool hasSymmetricEdgeSet() const { return symmetricEdges_; }

  std::size_t edgeBegin(int u) const { return offsets_[u]; }
  std::size_t edgeEnd(int u) const { return offsets_[u + 1]; }
  int degree(int u) const { return static_cast<int>(offsets_[u + 1] - offsets_[u]); }

  int source(std::size_t e) const { return sources_[e]; }
  int target(std::size_t e) const { return targets_[e]; }
  double weight(std::size_t e) const { return weights_[e]; }
  /// Index of the edge (v, u) for e = (u, v), or -1.
  std::ptrdiff_t reverse(std::size_t e) const { return reverse_[e]; }

  std::span<const int> neighbors(int u) const {
    return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
  }

  std::ptrdiff_t findEdge(int u, int v) const;
  /// w(u, v), zero when (u, v) is not an edge.
  double weightBetween(int u, int v) const;

  std::vector<int> isolatedVertices() const;
  std::vector<Edge> edges() const;
  double meanDegree() const { return n_ ? double(numEdges()) / n_ : 0.0; }

 private:
  int n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> sources_;
  std::vector<int> targets_;
  std::vector<double> weights_;
  std::vector<std::ptrdiff_t> reverse_;
  bool symmetric_ = true;
  bool symmetricEdges_ = true;
};

/// Pixel grid with unit weights. connectivity is 4 or 8. Masked pixels (mask
/// entry 0) get no edges; an empty mask means all pixels are active.
WeightedGraph gridGraph(int height, int width, int connectivity = 4,
                        std::span<const std::uint8_t> mask = {});

enum class PositionMetric { Euclidean, Arc };
enum class WeightRule { InverseSquare, Unit };

/// Connects every pair with d(p_i, p_j) <= eps. `positions` holds one column
/// per vertex; the Arc metric expects unit vectors in R^3.
WeightedGraph epsilonBallGraph(const Eigen::MatrixXd& positions, double eps,
                               PositionMetric metric, WeightRule rule,
                               std::span<const std::uint8_t> mask = {});

/// Patch similarity PSM(i, j): square root of the summed squared distances of
/// corresponding pixels of the (2s+1)^2 patches around i and j. Patch indices
/// wrap periodically; pairs touching a masked pixel are skipped.
double patchDistance(const VertexFunction& f, int i, int j, int patchRadius);

struct KnnOptions {
  int k = 10;
  int patchRadius = 1;
  /// Half-width of the square search window; 0 searches the whole image.
  int window = 0;
  /// Lower clamp for the interpolated weights so the least similar neighbor
  /// keeps its edge.
  double weightFloor = 1e-3;
};

/// Directed k-NN graph: every active vertex points to its k most similar
/// active patches (ties to the smaller index), weights interpolated linearly
/// from 1 (most similar) to weightFloor (least similar).
WeightedGraph knnPatchNeighbors(const VertexFunction& f, const KnnOptions& opts);

/// knnPatchNeighbors followed by max-symmetrization.
WeightedGraph knnPatchGraph(const VertexFunction& f, const KnnOptions& opts);

/// Linear interpolation of sorted similarity values to weights in
/// [floor, 1]; all ones when the values are equal.
std::vector<double> interpolatedWeights(std::span<const double> sortedDistances,
                                        double floor);

/// w(u, v) <- max(w(u, v), w(v, u)) over the union of both edge sets.
WeightedGraph symmetrizeMax(const WeightedGraph& g);

// Edge-list TSV: header "# mvgraph-edges v1 n=<n> symmetric=<0|1>" followed by
// one "u<TAB>v<TAB>w" line per directed edge, 0-based.
void writeEdgeList(std::ostream& os, const WeightedGraph& g);
WeightedGraph readEdgeList(std::istream& is);
void saveEdgeList(const std::string& path, const WeightedGraph& g);
WeightedGraph loadEdgeList(const std::string& path);

}  // namespace mvg
