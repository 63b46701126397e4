#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "mvg/calculus.hpp"
#include "mvg/graph.hpp"
#include "mvg/synthetics.hpp"
#include "test_support.hpp"

using namespace mvg;
using namespace mvg::testing;

namespace {

constexpr double kPi = std::numbers::pi;

bool inWhirl(int r, int c, int h, int w) {
  const int half = whirlHalfSize(h, w);
  for (bool cw : {true, false})
    for (auto [cr, cc] : whirlCenters(h, w, cw))
      if (std::abs(r - cr) <= half && std::abs(c - cc) <= half) return true;
  return false;
}

}  // namespace

TEST_CASE("noise basics") {
  std::mt19937_64 rng(1);
  const auto f = randomFunction(Manifold::sphere2(), 50, 1.0, rng);
  CHECK(addNoise(f, {NoiseKind::RiemannianGaussian, 0.0, 3}).values == f.values);

  const NoiseSpec spec{NoiseKind::RiemannianGaussian, 0.3, 42};
  const auto a = addNoise(f, spec);
  const auto b = addNoise(f, spec);
  CHECK(a.values == b.values);
  CHECK(addNoise(f, {NoiseKind::RiemannianGaussian, 0.3, 43}).values != a.values);
  a.validate();

  // Noise at a vertex depends only on the seed, the vertex and its value.
  VertexFunction head(f.manifold, 20);
  head.values = f.values.leftCols(20);
  CHECK(addNoise(head, spec).values == a.values.leftCols(20));

  auto masked = f;
  masked.mask.assign(50, 1);
  masked.mask[3] = masked.mask[17] = 0;
  const auto m = addNoise(masked, spec);
  CHECK(m.values.col(3) == f.values.col(3));
  CHECK(m.values.col(17) == f.values.col(17));
  CHECK(m.values.col(4) == a.values.col(4));
}

TEST_CASE("wrapped Gaussian noise keeps canonical angles") {
  VertexFunction c(Manifold::circle(), 1000);
  c.values.setConstant(3.1);
  const auto n = addNoise(c, {NoiseKind::WrappedGaussian, 0.5, 7});
  CHECK(n.values.maxCoeff() <= kPi);
  CHECK(n.values.minCoeff() > -kPi);
  CHECK(n.values.minCoeff() < 0);  // some samples wrapped around
}

TEST_CASE("noise MSE approaches sigma^2 times the intrinsic dimension") {
  const int n = 100000;
  const double sigma = 0.3;
  struct Case {
    Manifold m;
    double dim;
  };
  for (const Case& c : {Case{Manifold::circle(), 1}, Case{Manifold::sphere2(), 2},
                        Case{Manifold::spd(3), 6}}) {
    std::mt19937_64 rng(5);
    VertexFunction f(c.m, n);
    for (int u = 0; u < n; u += 997) {
      const Coords x = randomPoint(c.m, rng);
      for (int v = u; v < std::min(n, u + 997); ++v) f.values.col(v) = x;
    }
    const auto noisy = addNoise(f, {NoiseKind::RiemannianGaussian, sigma, 11});
    const double want = sigma * sigma * c.dim;
    INFO(c.m.name());
    CHECK(std::abs(mse(noisy, f) - want) < 0.03 * want);
  }
}

TEST_CASE("mse") {
  VertexFunction a(Manifold::circle(), 2), b(Manifold::circle(), 2);
  b.values << kPi / 2, 0;
  CHECK(mse(a, a) == 0);
  CHECK(mse(a, b) == doctest::Approx(kPi * kPi / 8));

  std::mt19937_64 rng(3);
  const auto f = randomFunction(Manifold::spd(2), 30, 1.0, rng);
  const auto g = randomFunction(Manifold::spd(2), 30, 1.0, rng);
  CHECK(mse(f, g) == doctest::Approx(mse(g, f)));
  CHECK(mse(f, g) == doctest::Approx(std::pow(vertexDistance(f, g), 2) / 30));

  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto fp = f, gp = g;
  for (int i = 0; i < 30; ++i) {
    fp.values.col(i) = f.values.col(perm[i]);
    gp.values.col(i) = g.values.col(perm[i]);
  }
  CHECK(mse(fp, gp) == doctest::Approx(mse(f, g)));

  auto fm = f, gm = f;
  fm.mask.assign(30, 1);
  fm.mask[0] = 0;
  gm.mask = fm.mask;
  gm.values.col(0) = g.values.col(0);
  CHECK(mse(fm, gm) == 0);
}

TEST_CASE("whirl image") {
  const int h = 32, w = 32;
  const auto f = genS2Whirl(h, w);
  f.validate();
  CHECK(f.shape == std::vector<int>{h, w});
  for (int u = 0; u < f.size(); ++u) CHECK(std::abs(f.values.col(u).norm() - 1) < 1e-12);

  for (auto [r, c] : whirlCenters(h, w, true))
    CHECK(f.values.col(r * w + c) == Eigen::Vector3d(0, 0, -1));
  for (auto [r, c] : whirlCenters(h, w, false))
    CHECK(f.values.col(r * w + c) == Eigen::Vector3d(0, 0, 1));

  const auto g = gridGraph(h, w);
  const Manifold& m = f.manifold;
  double worst = 0;
  for (int u = 0; u < f.size(); ++u) {
    if (inWhirl(u / w, u % w, h, w)) continue;
    for (int v : g.neighbors(u)) {
      if (inWhirl(v / w, v % w, h, w)) continue;
      worst = std::max(worst, m.dist(f.point(u), f.point(v)));
    }
  }
  CHECK(worst < kPi / 8);

  CHECK(genS2Whirl(h, w).values == f.values);
  CHECK(genS2Whirl(9, 12).size() == 108);
}

TEST_CASE("phase image") {
  const int h = 64, w = 64;
  const auto f = genPhaseImage(h, w);
  f.validate();
  CHECK(f.values.maxCoeff() <= kPi);
  CHECK(f.values.minCoeff() > -kPi);

  const auto regions = phaseConstantRegions(h, w);
  const auto g = gridGraph(h, w);
  const auto grad = gradient(g, f);
  int interior = 0, wraps = 0;
  double worst = 0;
  for (int u = 0; u < f.size(); ++u) {
    bool allIn = regions[u] != 0;
    for (int v : g.neighbors(u)) allIn = allIn && regions[v] != 0;
    if (allIn) {
      ++interior;
      CHECK(localVariation(g, f, grad, u, 2) == 0);
    }
    if (regions[u]) continue;
    for (int v : g.neighbors(u)) {
      if (regions[v]) continue;
      worst = std::max(worst, std::abs(f.values(0, v) - f.values(0, u)) > kPi
                                  ? (++wraps, Manifold::circle().dist(f.point(u), f.point(v)))
                                  : std::abs(f.values(0, v) - f.values(0, u)));
    }
  }
  CHECK(interior > 100);
  CHECK(wraps > 0);
  // Ramp slope per pixel is at most 2 pi * 1.6 / (w - 1).
  CHECK(worst <= 2 * kPi * 1.6 / (w - 1) + 1e-12);
  CHECK(genPhaseImage(h, w).values == f.values);
}

TEST_CASE("SPD data sets") {
  const auto pts = fibonacciSphere(480);
  CHECK(pts.cols() == 480);
  for (int i = 0; i < 480; ++i) CHECK(std::abs(pts.col(i).norm() - 1) < 1e-12);

  const auto d = genSpdOnSphere(480);
  CHECK(d.positions == pts);
  d.f.validate();
  CHECK(d.f.manifold == Manifold::spd(3));
  CHECK(genSpdOnSphere(480).f.values == d.f.values);
  CHECK(genSpdOnSphere(12).f.size() == 12);

  // Some variety: both caps and the band differ.
  const Manifold& m = d.f.manifold;
  double spread = 0;
  for (int u = 1; u < 480; ++u) spread = std::max(spread, m.dist(d.f.point(0), d.f.point(u)));
  CHECK(spread > 1);

  const auto s = genSpdGrid(40, 48);
  s.validate();
  CHECK(s.shape == std::vector<int>{40, 48});
  CHECK(s.activeCount() > 0);
  CHECK(s.activeCount() < 40 * 48);
  CHECK(!s.active(0));
  CHECK(s.active(20 * 48 + 24));
  CHECK(genSpdGrid(40, 48).values == s.values);
}
