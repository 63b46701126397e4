#include "mvg/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "mvg/errors.hpp"

namespace mvg {

// ----------------------------------------------------------------------------
// VertexFunction helpers

std::pair<int, int> VertexFunction::gridSize() const {
  if (shape.size() == 1) return {1, shape[0]};
  if (shape.size() == 2) return {shape[0], shape[1]};
  throw DomainError("expected a 1-D or 2-D grid shape, got " +
                    std::to_string(shape.size()) + " dimensions");
}

void VertexFunction::validate() const {
  if (values.rows() != manifold.ambientDim())
    throw DomainError("value rows do not match the ambient dimension of " +
                      manifold.name());
  long n = 1;
  for (int s : shape) {
    if (s < 1) throw DomainError("grid extents must be positive");
    n *= s;
  }
  if (n != size()) throw DomainError("shape does not match the vertex count");
  if (!mask.empty() && static_cast<int>(mask.size()) != size())
    throw DomainError("mask length does not match the vertex count");
  for (int u = 0; u < size(); ++u) {
    const std::string why = manifold.checkPoint(values.col(u));
    if (!why.empty())
      throw DomainError("vertex " + std::to_string(u) + ": " + why);
  }
}

// ----------------------------------------------------------------------------
// WeightedGraph

WeightedGraph WeightedGraph::fromEdges(int numVertices, std::vector<Edge> edges) {
  if (numVertices < 0) throw DomainError("negative vertex count");
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= numVertices || e.to < 0 || e.to >= numVertices)
      throw DomainError("edge index out of range");
    if (e.from == e.to) throw DomainError("self-loops are not allowed");
    if (!(e.weight > 0) || !std::isfinite(e.weight))
      throw DomainError("edge weights must be positive and finite");
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i].from == edges[i - 1].from && edges[i].to == edges[i - 1].to)
      throw DomainError("duplicate edge (" + std::to_string(edges[i].from) + ", " +
                        std::to_string(edges[i].to) + ")");

  WeightedGraph g;
  g.n_ = numVertices;
  g.offsets_.assign(numVertices + 1, 0);
  g.sources_.reserve(edges.size());
  g.targets_.reserve(edges.size());
  g.weights_.reserve(edges.size());
  for (const Edge& e : edges) {
    ++g.offsets_[e.from + 1];
    g.sources_.push_back(e.from);
    g.targets_.push_back(e.to);
    g.weights_.push_back(e.weight);
  }
  for (int u = 0; u < numVertices; ++u) g.offsets_[u + 1] += g.offsets_[u];

  g.reverse_.resize(edges.size());
  g.symmetric_ = g.symmetricEdges_ = true;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    g.reverse_[e] = g.findEdge(g.targets_[e], g.sources_[e]);
    if (g.reverse_[e] < 0) {
      g.symmetric_ = g.symmetricEdges_ = false;
    } else if (g.weights_[g.reverse_[e]] != g.weights_[e]) {
      g.symmetric_ = false;
    }
  }
  return g;
}

std::ptrdiff_t WeightedGraph::findEdge(int u, int v) const {
  if (u < 0 || u >= n_) return -1;
  const auto first = targets_.begin() + offsets_[u];
  const auto last = targets_.begin() + offsets_[u + 1];
  const auto it = std::lower_bound(first, last, v);
  if (it == last || *it != v) return -1;
  return it - targets_.begin();
}

double WeightedGraph::weightBetween(int u, int v) const {
  const auto e = findEdge(u, v);
  return e < 0 ? 0.0 : weights_[e];
}

std::vector<int> WeightedGraph::isolatedVertices() const {
  std::vector<int> incoming(n_, 0);
  for (int t : targets_) ++incoming[t];
  std::vector<int> out;
  for (int u = 0; u < n_; ++u)
    if (degree(u) == 0 && incoming[u] == 0) out.push_back(u);
  return out;
}

std::vector<WeightedGraph::Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(numEdges());
  for (std::size_t e = 0; e < numEdges(); ++e)
    out.push_back({sources_[e], targets_[e], weights_[e]});
  return out;
}

WeightedGraph symmetrizeMax(const WeightedGraph& g) {
  std::vector<WeightedGraph::Edge> out;
  out.reserve(2 * g.numEdges());
  for (std::size_t e = 0; e < g.numEdges(); ++e) {
    const int u = g.source(e), v = g.target(e);
    const auto r = g.reverse(e);
    const double w = r < 0 ? g.weight(e) : std::max(g.weight(e), g.weight(r));
    out.push_back({u, v, w});
    if (r < 0) out.push_back({v, u, w});
  }
  return WeightedGraph::fromEdges(g.numVertices(), std::move(out));
}

// ----------------------------------------------------------------------------
// Constructors

WeightedGraph gridGraph(int height, int width, int connectivity,
                        std::span<const std::uint8_t> mask) {
  if (height < 1 || width < 1) throw DomainError("grid extents must be positive");
  if (connectivity != 4 && connectivity != 8)
    throw DomainError("grid connectivity must be 4 or 8");
  const long n = long(height) * width;
  if (!mask.empty() && static_cast<long>(mask.size()) != n)
    throw DomainError("mask length does not match the grid");
  auto active = [&](int idx) { return mask.empty() || mask[idx] != 0; };

  std::vector<std::pair<int, int>> steps = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  if (connectivity == 8) steps.insert(steps.end(), {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});

  std::vector<WeightedGraph::Edge> edges;
  edges.reserve(n * steps.size());
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int u = r * width + c;
      if (!active(u)) continue;
      for (auto [dr, dc] : steps) {
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
        const int v = rr * width + cc;
        if (active(v)) edges.push_back({u, v, 1.0});
      }
    }
  }
  return WeightedGraph::fromEdges(static_cast<int>(n), std::move(edges));
}

WeightedGraph epsilonBallGraph(const Eigen::MatrixXd& positions, double eps,
                               PositionMetric metric, WeightRule rule,
                               std::span<const std::uint8_t> mask) {
  if (!(eps > 0)) throw DomainError("epsilon must be positive");
  const int n = static_cast<int>(positions.cols());
  if (!mask.empty() && static_cast<int>(mask.size()) != n)
    throw DomainError("mask length does not match the positions");
  if (metric == PositionMetric::Arc && positions.rows() != 3)
    throw DomainError("arc-length metric needs 3-D unit positions");
  auto active = [&](int idx) { return mask.empty() || mask[idx] != 0; };

  auto distance = [&](int i, int j) {
    if (metric == PositionMetric::Euclidean)
      return (positions.col(i) - positions.col(j)).norm();
    const Eigen::Vector3d a = positions.col(i), b = positions.col(j);
    return std::atan2(a.cross(b).norm(), a.dot(b));
  };

  std::vector<WeightedGraph::Edge> edges;
  for (int i = 0; i < n; ++i) {
    if (!active(i)) continue;
    for (int j = i + 1; j < n; ++j) {
      if (!active(j)) continue;
      const double d = distance(i, j);
      if (d > eps) continue;
      double w = 1.0;
      if (rule == WeightRule::InverseSquare) {
        if (d == 0)
          throw DomainError("coincident positions " + std::to_string(i) + " and " +
                            std::to_string(j) + " give an infinite weight");
        w = 1.0 / (d * d);
      }
      edges.push_back({i, j, w});
      edges.push_back({j, i, w});
    }
  }
  return WeightedGraph::fromEdges(n, std::move(edges));
}

// ----------------------------------------------------------------------------
// Patch graphs

namespace {

inline int wrapIndex(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace

double patchDistance(const VertexFunction& f, int i, int j, int patchRadius) {
  const auto [h, w] = f.gridSize();
  if (i < 0 || j < 0 || i >= f.size() || j >= f.size())
    throw DomainError("patch center out of range");
  if (patchRadius < 0) throw DomainError("patch radius must be nonnegative");
  if (i == j) return 0.0;
  const int ri = i / w, ci = i % w, rj = j / w, cj = j % w;
  double sum = 0;
  for (int k = -patchRadius; k <= patchRadius; ++k) {
    for (int l = -patchRadius; l <= patchRadius; ++l) {
      const int a = wrapIndex(ri + k, h) * w + wrapIndex(ci + l, w);
      const int b = wrapIndex(rj + k, h) * w + wrapIndex(cj + l, w);
      if (!f.active(a) || !f.active(b)) continue;
      const double d = f.manifold.dist(f.point(a), f.point(b));
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

std::vector<double> interpolatedWeights(std::span<const double> sorted, double floor) {
  std::vector<double> w(sorted.size(), 1.0);
  if (sorted.empty()) return w;
  const double lo = sorted.front(), hi = sorted.back();
  if (!(hi > lo)) return w;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    w[i] = std::clamp((hi - sorted[i]) / (hi - lo), floor, 1.0);
  return w;
}

WeightedGraph knnPatchNeighbors(const VertexFunction& f, const KnnOptions& opts) {
  const auto [h, w] = f.gridSize();
  const int n = f.size();
  if (opts.k < 1) throw DomainError("k must be at least 1");
  if (opts.k >= f.activeCount())
    throw DomainError("k must be smaller than the number of active vertices");
  if (opts.patchRadius < 0) throw DomainError("patch radius must be nonnegative");
  if (opts.window < 0) throw DomainError("search window must be nonnegative");
  if (!(opts.weightFloor > 0 && opts.weightFloor <= 1))
    throw DomainError("weight floor must lie in (0, 1]");

  // Candidate offsets. A global search enumerates torus offsets, which visits
  // every other pixel exactly once; a windowed search enumerates the clipped
  // square around each pixel.
  std::vector<std::pair<int, int>> offsets;
  const bool global = opts.window == 0;
  if (global) {
    for (int a = 0; a < h; ++a)
      for (int b = 0; b < w; ++b)
        if (a || b) offsets.push_back({a, b});
  } else {
    for (int a = -opts.window; a <= opts.window; ++a)
      for (int b = -opts.window; b <= opts.window; ++b)
        if (a || b) offsets.push_back({a, b});
  }

  // Bounded max-heaps of (PSM^2, candidate), ordered lexicographically so that
  // ties resolve to the smaller vertex index.
  using Entry = std::pair<double, int>;
  std::vector<std::vector<Entry>> best(n);
  for (auto& b : best) b.reserve(opts.k + 1);

  const int s = opts.patchRadius;
  std::vector<double> pixel(n), rows(n);
  for (auto [a, b] : offsets) {
    // Squared distance of every pixel to its torus-shifted partner.
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int p = r * w + c;
        const int q = wrapIndex(r + a, h) * w + wrapIndex(c + b, w);
        if (!f.active(p) || !f.active(q)) {
          pixel[p] = 0;
          continue;
        }
        const double d = f.manifold.dist(f.point(p), f.point(q));
        pixel[p] = d * d;
      }
    }
    // Periodic box sums over the patch, separable.
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double acc = 0;
        for (int l = -s; l <= s; ++l) acc += pixel[r * w + wrapIndex(c + l, w)];
        rows[r * w + c] = acc;
      }
    }
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int i = r * w + c;
        if (!f.active(i)) continue;
        int j;
        if (global) {
          j = wrapIndex(r + a, h) * w + wrapIndex(c + b, w);
        } else {
          const int rr = r + a, cc = c + b;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          j = rr * w + cc;
        }
        if (!f.active(j)) continue;
        double psm2 = 0;
        for (int k = -s; k <= s; ++k) psm2 += rows[wrapIndex(r + k, h) * w + c];
        auto& heap = best[i];
        const Entry cand{psm2, j};
        if (static_cast<int>(heap.size()) < opts.k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
    }
  }

  std::vector<WeightedGraph::Edge> edges;
  edges.reserve(std::size_t(n) * opts.k);
  std::vector<double> d;
  for (int i = 0; i < n; ++i) {
    if (!f.active(i)) continue;
    auto& heap = best[i];
    if (static_cast<int>(heap.size()) < opts.k)
      throw DomainError("vertex " + std::to_string(i) + " has fewer than k candidates " +
                        "inside the search window");
    std::sort_heap(heap.begin(), heap.end());
    d.clear();
    for (const auto& [psm2, j] : heap) d.push_back(std::sqrt(psm2));
    const auto wts = interpolatedWeights(d, opts.weightFloor);
    for (std::size_t t = 0; t < heap.size(); ++t)
      edges.push_back({i, heap[t].second, wts[t]});
  }
  return WeightedGraph::fromEdges(n, std::move(edges));
}

WeightedGraph knnPatchGraph(const VertexFunction& f, const KnnOptions& opts) {
  return symmetrizeMax(knnPatchNeighbors(f, opts));
}

// ----------------------------------------------------------------------------
// Edge-list TSV

void writeEdgeList(std::ostream& os, const WeightedGraph& g) {
  os << "# mvgraph-edges v1 n=" << g.numVertices()
     << " symmetric=" << (g.isSymmetric() ? 1 : 0) << '\n';
  char buf[64];
  for (std::size_t e = 0; e < g.numEdges(); ++e) {
    auto res = std::to_chars(buf, buf + sizeof buf, g.weight(e));
    os << g.source(e) << '\t' << g.target(e) << '\t' << std::string_view(buf, res.ptr - buf)
       << '\n';
  }
}

WeightedGraph readEdgeList(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty edge list");
  int n = -1, sym = -1;
  {
    std::istringstream hs(line);
    std::string hash, tag, version, nTok, symTok;
    hs >> hash >> tag >> version >> nTok >> symTok;
    if (hash != "#" || tag != "mvgraph-edges" || version != "v1" ||
        nTok.rfind("n=", 0) != 0 || symTok.rfind("symmetric=", 0) != 0)
      throw IoError("bad edge-list header: " + line);
    try {
      n = std::stoi(nTok.substr(2));
      sym = std::stoi(symTok.substr(10));
    } catch (const std::exception&) {
      throw IoError("bad edge-list header: " + line);
    }
  }
  std::vector<WeightedGraph::Edge> edges;
  int lineNo = 1;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw IoError("edge list line " + std::to_string(lineNo) + ": expected u<TAB>v<TAB>w");
    WeightedGraph::Edge e{};
    const char* base = line.data();
    auto r1 = std::from_chars(base, base + t1, e.from);
    auto r2 = std::from_chars(base + t1 + 1, base + t2, e.to);
    auto r3 = std::from_chars(base + t2 + 1, base + line.size(), e.weight);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r3.ec != std::errc())
      throw IoError("edge list line " + std::to_string(lineNo) + ": unparsable value");
    edges.push_back(e);
  }
  WeightedGraph g = WeightedGraph::fromEdges(n, std::move(edges));
  if (sym == 1 && !g.isSymmetric())
    throw IoError("edge list claims symmetric=1 but weights are not symmetric");
  return g;
}

void saveEdgeList(const std::string& path, const WeightedGraph& g) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  writeEdgeList(os, g);
  if (!os) throw IoError("failed writing " + path);
}

WeightedGraph loadEdgeList(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return readEdgeList(is);
}

}  // namespace mvg
