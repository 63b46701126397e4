#pragma once

// Iterative minimizers for the anisotropic and isotropic denoising energies:
// an explicit (forward Euler) gradient flow and the semi-implicit Jacobi
// fixed-point iteration.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvg/calculus.hpp"
#include "mvg/graph.hpp"
#include "mvg/vertex_function.hpp"

namespace mvg {

enum class Scheme { Explicit, Jacobi };

struct SolverConfig {
  Model model = Model::Aniso;
  double p = 2;
  double lambda = 1;
  double dt = 1e-3;
  double epsSmooth = 1e-7;
  int maxIters = 1000;
  double stopTol = 0;
  Scheme scheme = Scheme::Explicit;
  bool recordEnergy = false;
  std::uint64_t rngSeed = 0;
  /// Halve dt for a sweep whose explicit update leaves the admissible set.
  bool backoff = false;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
};

enum class StopReason { Converged, MaxIters };

struct SolveReport {
  int iterations = 0;
  double finalChange = 0;
  /// Energy of the start value followed by one entry per iteration.
  std::vector<double> energyTrace;
  /// Average relative change per iteration.
  std::vector<double> changeTrace;
  double residualMaxNorm = 0;
  StopReason reason = StopReason::MaxIters;
  /// Number of sweeps that needed a smaller time step.
  int backoffs = 0;
};

/// f_{n+1}(u) = exp_{f_n(u)}(-dt (Delta_p f_n(u) - lambda log_{f_n(u)} f0(u))).
/// Throws InjectivityError (with the vertex) if the new iterate has a neighbor
/// pair outside the injectivity domain.
VertexFunction explicitStep(const WeightedGraph& g, const VertexFunction& fn,
                            const VertexFunction& f0, const SolverConfig& cfg);

/// f_{n+1}(u) = exp_{f_n(u)}((sum_v b(u,v) log f_n(v) + lambda log f0(u)) /
/// (lambda + sum_v b(u,v))), all logs based at f_n(u).
VertexFunction jacobiStep(const WeightedGraph& g, const VertexFunction& fn,
                          const VertexFunction& f0, const SolverConfig& cfg);

/// (1/|V|) sum_u d(a(u), b(u)) over active vertices.
double averageChange(const VertexFunction& a, const VertexFunction& b);

struct SolveResult {
  VertexFunction f;
  SolveReport report;
};

SolveResult solve(const WeightedGraph& g, const VertexFunction& f0, const SolverConfig& cfg,
                  const std::optional<VertexFunction>& init = std::nullopt);

/// Largest tangent norm of the residual over active vertices.
double residualMaxNorm(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
                       const SolverConfig& cfg);

std::string toString(Model m);
std::string toString(Scheme s);
std::string toString(StopReason r);
Model parseModel(const std::string& s);
Scheme parseScheme(const std::string& s);

}  // namespace mvg
