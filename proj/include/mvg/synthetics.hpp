#pragma once

// Synthetic test signals, the Riemannian Gaussian noise model and the
// mean squared error used to score denoising results.

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "mvg/vertex_function.hpp"

namespace mvg {

enum class NoiseKind { WrappedGaussian, RiemannianGaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::RiemannianGaussian;
  double sigma = 0;
  std::uint64_t seed = 0;
};

/// Seed of the per-vertex generator; keeps noise independent of traversal order.
std::uint64_t vertexSeed(std::uint64_t seed, std::uint64_t vertex);

/// f0(u) = exp_{f(u)}(xi_u) with xi_u an isotropic Gaussian tangent of
/// standard deviation sigma. Masked vertices are copied unchanged.
VertexFunction addNoise(const VertexFunction& f, const NoiseSpec& spec);

/// Mean of d^2(f(u), g(u)) over active vertices.
double mse(const VertexFunction& f, const VertexFunction& g);

/// Sphere-valued image: a smooth latitude/longitude ramp with square whirls.
/// Clockwise whirls spin in the northern hemisphere and have the south pole
/// at their center pixel; anticlockwise whirls spin in the southern
/// hemisphere around a north-pole center.
VertexFunction genS2Whirl(int height, int width);

/// Half side length of the whirl squares for a given image size.
int whirlHalfSize(int height, int width);
/// Centers (row, col) of the clockwise and anticlockwise whirls.
std::vector<std::pair<int, int>> whirlCenters(int height, int width, bool clockwise);

/// Circle-valued image: a wrapped linear phase ramp with an ellipse and two
/// squares of constant phase.
VertexFunction genPhaseImage(int height, int width);
/// True where genPhaseImage(height, width) is piecewise constant.
std::vector<std::uint8_t> phaseConstantRegions(int height, int width);

/// Spherical Fibonacci points, one unit vector per column.
Eigen::MatrixXd fibonacciSphere(int n);

struct SpdSphereData {
  Eigen::MatrixXd positions;
  VertexFunction f;
};

/// SPD(3) field on Fibonacci points: a prolate cap around the north pole, an
/// oblate cap around the south pole and an anisotropic band in between that
/// follows the local (east, south, normal) frame.
SpdSphereData genSpdOnSphere(int n = 480);

/// Masked SPD(3) image resembling a diffusion-tensor slice: an elliptic
/// foreground with a curved and a straight fiber bundle over an almost
/// isotropic background; pixels outside the ellipse are masked.
VertexFunction genSpdGrid(int height, int width);

}  // namespace mvg
