#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mvg/errors.hpp"
#include "mvg/graph.hpp"
#include "mvg/synthetics.hpp"
#include "test_support.hpp"

using namespace mvg;

namespace {

constexpr double kPi = std::numbers::pi;

VertexFunction circleImage(int h, int w, std::mt19937_64& rng, double spread = 1.0) {
  VertexFunction f(Manifold::circle(), std::vector<int>{h, w});
  std::uniform_real_distribution<double> uni(-spread, spread);
  for (int u = 0; u < f.size(); ++u) f.values(0, u) = uni(rng);
  return f;
}

}  // namespace

TEST_CASE("fromEdges validates and indexes") {
  auto g = WeightedGraph::fromEdges(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 0.5}});
  CHECK(g.numVertices() == 3);
  CHECK(g.numEdges() == 3);
  CHECK_FALSE(g.isSymmetric());
  CHECK_FALSE(g.hasSymmetricEdgeSet());
  CHECK(g.weightBetween(1, 2) == 0.5);
  CHECK(g.weightBetween(2, 1) == 0.0);
  CHECK(g.reverse(g.findEdge(0, 1)) == g.findEdge(1, 0));
  CHECK(g.reverse(g.findEdge(1, 2)) == -1);

  CHECK_THROWS_AS(WeightedGraph::fromEdges(2, {{0, 0, 1.0}}), DomainError);
  CHECK_THROWS_AS(WeightedGraph::fromEdges(2, {{0, 1, 0.0}}), DomainError);
  CHECK_THROWS_AS(WeightedGraph::fromEdges(2, {{0, 1, -1.0}}), DomainError);
  CHECK_THROWS_AS(WeightedGraph::fromEdges(2, {{0, 2, 1.0}}), DomainError);
  CHECK_THROWS_AS(WeightedGraph::fromEdges(2, {{0, 1, 1.0}, {0, 1, 2.0}}), DomainError);

  auto h = WeightedGraph::fromEdges(2, {{0, 1, 1.0}, {1, 0, 2.0}});
  CHECK(h.hasSymmetricEdgeSet());
  CHECK_FALSE(h.isSymmetric());
}

TEST_CASE("grid graphs") {
  CHECK(gridGraph(1, 1).numEdges() == 0);
  CHECK(gridGraph(2, 2).numEdges() == 8);
  const auto g = gridGraph(3, 3);
  CHECK(g.numEdges() == 24);
  CHECK(g.degree(4) == 4);
  CHECK(g.degree(0) == 2);
  CHECK(g.degree(1) == 3);
  CHECK(g.isSymmetric());
  for (std::size_t e = 0; e < g.numEdges(); ++e) CHECK(g.weight(e) == 1.0);

  const auto g8 = gridGraph(3, 3, 8);
  CHECK(g8.degree(4) == 8);
  CHECK(g8.numEdges() == 40);

  std::vector<std::uint8_t> mask(9, 1);
  mask[4] = 0;
  const auto gm = gridGraph(3, 3, 4, mask);
  CHECK(gm.degree(4) == 0);
  CHECK(gm.degree(1) == 2);
  CHECK(gm.isSymmetric());
  CHECK(gm.isolatedVertices() == std::vector<int>{4});
}

TEST_CASE("epsilon-ball graphs") {
  SUBCASE("antipodal points") {
    Eigen::MatrixXd p(3, 2);
    p.col(0) << 0, 0, 1;
    p.col(1) << 0, 0, -1;
    const auto g = epsilonBallGraph(p, kPi / 12, PositionMetric::Arc, WeightRule::InverseSquare);
    CHECK(g.numEdges() == 0);
    CHECK(g.isolatedVertices().size() == 2);
  }
  SUBCASE("collinear voxels") {
    Eigen::MatrixXd p(3, 3);
    p << 0, 1, 2, 0, 0, 0, 0, 0, 0;
    const auto g = epsilonBallGraph(p, 2, PositionMetric::Euclidean, WeightRule::Unit);
    CHECK(g.numEdges() == 6);
    CHECK(g.isSymmetric());
  }
  SUBCASE("inverse-square weights and brute force membership") {
    const Eigen::MatrixXd p = fibonacciSphere(300);
    const double eps = kPi / 10;
    const auto g = epsilonBallGraph(p, eps, PositionMetric::Arc, WeightRule::InverseSquare);
    CHECK(g.isSymmetric());
    for (int i = 0; i < p.cols(); ++i) {
      for (int j = 0; j < p.cols(); ++j) {
        if (i == j) continue;
        const Eigen::Vector3d a = p.col(i), b = p.col(j);
        const double d = std::atan2(a.cross(b).norm(), a.dot(b));
        const double w = g.weightBetween(i, j);
        if (d <= eps) {
          REQUIRE(w > 0);
          CHECK(w == doctest::Approx(1 / (d * d)).epsilon(1e-12));
        } else {
          REQUIRE(w == 0);
        }
      }
    }
  }
  SUBCASE("mean degree on 480 Fibonacci points") {
    const auto g = epsilonBallGraph(fibonacciSphere(480), kPi / 12, PositionMetric::Arc,
                                    WeightRule::InverseSquare);
    MESSAGE("mean degree " << g.meanDegree());
    CHECK(g.meanDegree() >= 6.5);
    CHECK(g.meanDegree() <= 8.7);
  }
  SUBCASE("coincident points are rejected for inverse-square weights") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(epsilonBallGraph(p, 1, PositionMetric::Euclidean, WeightRule::InverseSquare),
                    DomainError);
    CHECK(epsilonBallGraph(p, 1, PositionMetric::Euclidean, WeightRule::Unit).numEdges() == 2);
  }
}

TEST_CASE("patch distance") {
  std::mt19937_64 rng(3);
  SUBCASE("examples") {
    VertexFunction f(Manifold::circle(), std::vector<int>{1, 2});
    f.values(0, 1) = kPi / 2;
    CHECK(patchDistance(f, 0, 1, 0) == doctest::Approx(kPi / 2));
    CHECK(patchDistance(f, 1, 1, 2) == 0);
    VertexFunction c(Manifold::circle(), std::vector<int>{5, 6});
    c.values.setConstant(0.7);
    CHECK(patchDistance(c, 3, 17, 2) == 0);
  }
  SUBCASE("symmetric, periodic and center included") {
    const auto f = circleImage(7, 9, rng);
    for (int t = 0; t < 50; ++t) {
      std::uniform_int_distribution<int> pick(0, f.size() - 1);
      const int i = pick(rng), j = pick(rng);
      CHECK(patchDistance(f, i, j, 2) == doctest::Approx(patchDistance(f, j, i, 2)));
    }
    // s = 0 reduces to the pixel distance.
    CHECK(patchDistance(f, 0, 10, 0) ==
          doctest::Approx(f.manifold.dist(f.point(0), f.point(10))));
    // Corner patch wraps to the opposite borders.
    double sum = 0;
    const int h = 7, w = 9;
    for (int k = -1; k <= 1; ++k)
      for (int l = -1; l <= 1; ++l) {
        const int a = ((k + h) % h) * w + (l + w) % w;
        const int b = ((3 + k + h) % h) * w + (4 + l + w) % w;
        const double d = f.manifold.dist(f.point(a), f.point(b));
        sum += d * d;
      }
    CHECK(patchDistance(f, 0, 3 * w + 4, 1) == doctest::Approx(std::sqrt(sum)));
  }
  SUBCASE("masked pixels are skipped") {
    auto f = circleImage(4, 4, rng);
    f.mask.assign(16, 1);
    f.mask[5] = 0;
    auto g = f;
    g.values(0, 5) += 0.5;
    CHECK(patchDistance(f, 0, 10, 1) == doctest::Approx(patchDistance(g, 0, 10, 1)));
  }
}

TEST_CASE("interpolated weights") {
  const std::vector<double> a{0.1, 0.3};
  CHECK(interpolatedWeights(a, 1e-3) == std::vector<double>{1.0, 1e-3});
  const std::vector<double> b{0.5, 0.5, 0.5};
  CHECK(interpolatedWeights(b, 1e-3) == std::vector<double>{1, 1, 1});
  const std::vector<double> c{0.2};
  CHECK(interpolatedWeights(c, 1e-3) == std::vector<double>{1});
  const std::vector<double> d{1, 2, 3};
  const auto w = interpolatedWeights(d, 1e-3);
  CHECK(w[1] == doctest::Approx(0.5));
}

TEST_CASE("k-NN patch graph matches brute force") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const int h = 6 + trial, w = 8;
    // Quantized values create ties that exercise the index tie-break.
    auto f = circleImage(h, w, rng);
    for (int u = 0; u < f.size(); ++u) f.values(0, u) = std::round(f.values(0, u) * 3) / 3;
    KnnOptions opts;
    opts.k = 5;
    opts.patchRadius = 1;
    const auto g = knnPatchNeighbors(f, opts);
    for (int i = 0; i < f.size(); ++i) {
      REQUIRE(g.degree(i) == opts.k);
      std::vector<std::pair<double, int>> all;
      for (int j = 0; j < f.size(); ++j)
        if (j != i) all.push_back({patchDistance(f, i, j, 1), j});
      std::sort(all.begin(), all.end(), [](auto& a, auto& b) {
        // Same ordering as the construction: squared distance, then index.
        return std::pair(a.first * a.first, a.second) < std::pair(b.first * b.first, b.second);
      });
      double worstSelected = 0;
      for (int j : g.neighbors(i)) worstSelected = std::max(worstSelected, patchDistance(f, i, j, 1));
      for (int t = 0; t < f.size() - 1; ++t) {
        const int j = all[t].second;
        if (g.findEdge(i, j) >= 0) continue;
        CHECK(all[t].first >= worstSelected - 1e-12);
      }
      // Most similar neighbor gets weight 1.
      double maxW = 0;
      for (std::size_t e = g.edgeBegin(i); e < g.edgeEnd(i); ++e) maxW = std::max(maxW, g.weight(e));
      CHECK(maxW == 1.0);
    }
    const auto s = knnPatchGraph(f, opts);
    CHECK(s.isSymmetric());
    for (int i = 0; i < f.size(); ++i) CHECK(s.degree(i) >= opts.k);
  }
}

TEST_CASE("k-NN errors and windows") {
  std::mt19937_64 rng(5);
  const auto f = circleImage(4, 4, rng);
  KnnOptions opts;
  opts.k = 16;
  CHECK_THROWS_AS(knnPatchNeighbors(f, opts), DomainError);
  opts.k = 1;
  const auto g = knnPatchNeighbors(f, opts);
  for (std::size_t e = 0; e < g.numEdges(); ++e) CHECK(g.weight(e) == 1.0);

  const auto big = circleImage(10, 10, rng);
  opts.k = 4;
  opts.window = 2;
  const auto win = knnPatchNeighbors(big, opts);
  for (std::size_t e = 0; e < win.numEdges(); ++e) {
    const int a = win.source(e), b = win.target(e);
    CHECK(std::abs(a / 10 - b / 10) <= 2);
    CHECK(std::abs(a % 10 - b % 10) <= 2);
  }
  opts.k = 30;
  opts.window = 1;
  CHECK_THROWS_AS(knnPatchNeighbors(big, opts), DomainError);
}

TEST_CASE("k-NN ignores masked vertices") {
  std::mt19937_64 rng(8);
  auto f = circleImage(6, 6, rng);
  f.mask.assign(36, 1);
  for (int u : {0, 7, 14, 35}) f.mask[u] = 0;
  KnnOptions opts;
  opts.k = 3;
  const auto g = knnPatchGraph(f, opts);
  for (int u : {0, 7, 14, 35}) CHECK(g.degree(u) == 0);
  for (std::size_t e = 0; e < g.numEdges(); ++e) {
    CHECK(f.active(g.source(e)));
    CHECK(f.active(g.target(e)));
  }
}

TEST_CASE("max symmetrization") {
  auto g = WeightedGraph::fromEdges(3, {{0, 1, 0.2}, {1, 0, 0.7}, {1, 2, 0.4}});
  const auto s = symmetrizeMax(g);
  CHECK(s.isSymmetric());
  CHECK(s.weightBetween(0, 1) == 0.7);
  CHECK(s.weightBetween(1, 0) == 0.7);
  CHECK(s.weightBetween(2, 1) == 0.4);
  CHECK(s.numEdges() == 4);
}

TEST_CASE("edge list roundtrip") {
  std::mt19937_64 rng(1);
  const auto g = testing::randomGraph(20, 40, true, rng);
  std::stringstream ss;
  writeEdgeList(ss, g);
  const std::string text = ss.str();
  CHECK(text.rfind("# mvgraph-edges v1 n=20 symmetric=1\n", 0) == 0);
  const auto back = readEdgeList(ss);
  REQUIRE(back.numEdges() == g.numEdges());
  for (std::size_t e = 0; e < g.numEdges(); ++e) {
    CHECK(back.source(e) == g.source(e));
    CHECK(back.target(e) == g.target(e));
    CHECK(back.weight(e) == g.weight(e));
  }
  std::stringstream bad("# something else\n0\t1\t1\n");
  CHECK_THROWS_AS(readEdgeList(bad), IoError);
  std::stringstream lie("# mvgraph-edges v1 n=2 symmetric=1\n0\t1\t1\n");
  CHECK_THROWS_AS(readEdgeList(lie), IoError);
}
