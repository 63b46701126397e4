#include "mvg/synthetics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mvg/errors.hpp"

namespace mvg {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Coords unitVector(double theta, double phi) {
  Coords x(3);
  x << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  return x;
}

Coords spdCoords(const Eigen::Matrix3d& m) {
  const Eigen::Matrix3d s = (m + m.transpose()) / 2;
  return Eigen::Map<const Eigen::VectorXd>(s.data(), 9);
}

// a * d d^T + b * (I - d d^T) for a unit direction d.
Eigen::Matrix3d axial(const Eigen::Vector3d& d, double a, double b) {
  const Eigen::Matrix3d p = d * d.transpose();
  return a * p + b * (Eigen::Matrix3d::Identity() - p);
}

double unitCoord(int i, int n) { return n > 1 ? double(i) / (n - 1) : 0.0; }

void checkGrid(int height, int width, int minSide) {
  if (height < minSide || width < minSide)
    throw DomainError("grid extents must be at least " + std::to_string(minSide));
}

}  // namespace

std::uint64_t vertexSeed(std::uint64_t seed, std::uint64_t vertex) {
  return splitmix64(seed ^ splitmix64(vertex));
}

VertexFunction addNoise(const VertexFunction& f, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0)) throw DomainError("noise sigma must be nonnegative");
  if (spec.kind == NoiseKind::WrappedGaussian && f.manifold.kind() != ManifoldKind::Circle)
    throw DomainError("wrapped Gaussian noise needs circle-valued data");
  VertexFunction out = f;
  if (spec.sigma == 0) return out;
  const Manifold& m = f.manifold;
  for (int u = 0; u < f.size(); ++u) {
    if (!f.active(u)) continue;
    std::mt19937_64 rng(vertexSeed(spec.seed, static_cast<std::uint64_t>(u)));
    const auto a = m.anchor(f.point(u));
    const Coords xi = m.randomTangent(f.point(u), spec.sigma, rng);
    out.values.col(u) = m.exp(a, xi);
  }
  return out;
}

double mse(const VertexFunction& f, const VertexFunction& g) {
  if (!f.sameDomain(g)) throw DomainError("vertex functions live on different domains");
  double sum = 0;
  int count = 0;
  for (int u = 0; u < f.size(); ++u) {
    if (!f.active(u) || !g.active(u)) continue;
    const double d = f.manifold.dist(f.point(u), g.point(u));
    sum += d * d;
    ++count;
  }
  return count ? sum / count : 0.0;
}

// ---------------------------------------------------------------------------
// Whirl image

int whirlHalfSize(int height, int width) { return std::max(2, std::min(height, width) / 8); }

std::vector<std::pair<int, int>> whirlCenters(int height, int width, bool clockwise) {
  auto at = [&](double fr, double fc) {
    return std::pair<int, int>{int(std::lround(fr * (height - 1))),
                               int(std::lround(fc * (width - 1)))};
  };
  if (clockwise) return {at(0.25, 0.25), at(0.70, 0.60)};
  return {at(0.28, 0.71), at(0.74, 0.20)};
}

VertexFunction genS2Whirl(int height, int width) {
  checkGrid(height, width, 8);
  VertexFunction f(Manifold::sphere2(), std::vector<int>{height, width});
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double theta = 0.45 + 0.5 * unitCoord(r, height);
      const double phi = -0.6 + 1.2 * unitCoord(c, width);
      f.values.col(r * width + c) = unitVector(theta, phi);
    }
  }

  const int half = whirlHalfSize(height, width);
  for (bool clockwise : {true, false}) {
    for (auto [cr, cc] : whirlCenters(height, width, clockwise)) {
      for (int dr = -half; dr <= half; ++dr) {
        for (int dc = -half; dc <= half; ++dc) {
          const int r = cr + dr, c = cc + dc;
          if (r < 0 || r >= height || c < 0 || c >= width) continue;
          const double rho = std::min(1.0, std::hypot(dr, dc) / (half + 0.5));
          const double alpha = std::atan2(-dr, dc);
          Coords x(3);
          if (rho == 0) {
            x << 0, 0, clockwise ? -1 : 1;
          } else if (clockwise) {
            x = unitVector(kPi - (kPi - 0.3) * rho, -alpha + 2 * rho);
          } else {
            x = unitVector(2.0 * rho, alpha + 2 * rho);
          }
          f.values.col(r * width + c) = x;
        }
      }
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Phase image

namespace {

// Region id of a pixel: 0 ramp, 1 ellipse, 2 and 3 squares.
int phaseRegion(double x, double y) {
  const double ex = (x - 0.32) / 0.2, ey = (y - 0.38) / 0.14;
  if (ex * ex + ey * ey <= 1) return 1;
  if (x >= 0.58 && x <= 0.86 && y >= 0.55 && y <= 0.83) return 2;
  if (x >= 0.12 && x <= 0.30 && y >= 0.70 && y <= 0.88) return 3;
  return 0;
}

}  // namespace

VertexFunction genPhaseImage(int height, int width) {
  checkGrid(height, width, 1);
  VertexFunction f(Manifold::circle(), std::vector<int>{height, width});
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double x = unitCoord(c, width), y = unitCoord(r, height);
      double v = 0;
      switch (phaseRegion(x, y)) {
        case 1: v = 2.0; break;
        case 2: v = -1.2; break;
        case 3: v = kPi; break;
        default: v = 2 * kPi * (1.6 * x + 1.1 * y) - kPi; break;
      }
      f.values(0, r * width + c) = Manifold::wrapAngle(v);
    }
  }
  return f;
}

std::vector<std::uint8_t> phaseConstantRegions(int height, int width) {
  std::vector<std::uint8_t> out(std::size_t(height) * width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      out[r * width + c] = phaseRegion(unitCoord(c, width), unitCoord(r, height)) != 0;
  return out;
}

// ---------------------------------------------------------------------------
// SPD data

Eigen::MatrixXd fibonacciSphere(int n) {
  if (n < 1) throw DomainError("need at least one point");
  Eigen::MatrixXd p(3, n);
  const double golden = kPi * (3 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1 - (2.0 * i + 1) / n;
    const double r = std::sqrt(std::max(0.0, 1 - z * z));
    const double phi = golden * i;
    p.col(i) << r * std::cos(phi), r * std::sin(phi), z;
  }
  return p;
}

SpdSphereData genSpdOnSphere(int n) {
  if (n < 12) throw DomainError("genSpdOnSphere needs at least 12 points");
  SpdSphereData out{fibonacciSphere(n), VertexFunction(Manifold::spd(3), n)};
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d p = out.positions.col(i);
    Eigen::Matrix3d m;
    if (p.z() > 0.5) {
      m = axial(p, 2.5, 0.5);
    } else if (p.z() < -0.5) {
      m = axial(p, 0.4, 1.5);
    } else {
      const double phi = std::atan2(p.y(), p.x());
      const double theta = std::acos(std::clamp(p.z(), -1.0, 1.0));
      Eigen::Matrix3d frame;
      frame.col(0) << -std::sin(phi), std::cos(phi), 0;
      frame.col(1) << std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
          -std::sin(theta);
      frame.col(2) = p;
      m = frame * Eigen::Vector3d(2.0, 0.5, 0.8).asDiagonal() * frame.transpose();
    }
    out.f.values.col(i) = spdCoords(m);
  }
  return out;
}

VertexFunction genSpdGrid(int height, int width) {
  checkGrid(height, width, 8);
  VertexFunction f(Manifold::spd(3), std::vector<int>{height, width});
  f.mask.assign(std::size_t(height) * width, 0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int u = r * width + c;
      const double x = unitCoord(c, width), y = unitCoord(r, height);
      const double ex = (x - 0.5) / 0.46, ey = (y - 0.5) / 0.42;
      if (ex * ex + ey * ey > 1) continue;
      f.mask[u] = 1;

      Eigen::Matrix3d m = Eigen::Vector3d(0.9, 0.8, 0.75).asDiagonal();
      const double arcR = std::hypot(x - 0.5, y - 1.05);
      const double rx = (x - 0.5) / arcR, ry = (y - 1.05) / arcR;
      if (std::abs(arcR - 0.55) < 0.08 && y < 0.95) {
        // In-plane tangent of the arc; x runs along columns, y along rows.
        m = axial(Eigen::Vector3d(-ry, rx, 0), 1.8, 0.35);
      } else if (x >= 0.44 && x <= 0.56 && y >= 0.12 && y <= 0.40) {
        m = axial(Eigen::Vector3d(0, 1, 0), 1.6, 0.4);
      } else if (std::hypot(x - 0.24, y - 0.6) < 0.08) {
        m = axial(Eigen::Vector3d(0, 0, 1), 1.7, 0.4);
      }
      f.values.col(u) = spdCoords(m);
    }
  }
  return f;
}

}  // namespace mvg
