#pragma once

// First-order difference operators, p-Laplacians, energies and optimality
// residuals for manifold-valued vertex functions on weighted graphs.
//
// Conventions: tangent vertex fields are ambient x n matrices (column u is based
// at f(u)); tangent edge functions are ambient x |E| matrices in graph edge
// order (column e = (u, v) is based at f(u)). Edges touching a masked vertex are
// treated as absent.

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "mvg/graph.hpp"
#include "mvg/vertex_function.hpp"

namespace mvg {

enum class Model { Aniso, Iso };

/// Per-iterate geometry shared by the operators: one anchor per vertex, the
/// logarithm and distance along every live edge.
struct EdgeGeometry {
  std::vector<Manifold::Anchor> anchors;
  /// log_{f(u)} f(v) for e = (u, v); zero on dead edges.
  Eigen::MatrixXd logs;
  Eigen::VectorXd dists;
  /// 0 when an endpoint is masked.
  std::vector<std::uint8_t> live;
};

/// Throws InjectivityError naming the vertex whose neighbor is out of reach.
EdgeGeometry edgeGeometry(const WeightedGraph& g, const VertexFunction& f);

/// Checks the graph/function pairing (vertex count); throws DomainError.
void checkPairing(const WeightedGraph& g, const VertexFunction& f);

// ---------------------------------------------------------------------------
// First-order operators

/// sqrt(w(u, v)) log_{f(u)} f(v); zero when v is not a neighbor or u == v.
Coords directionalDerivative(const WeightedGraph& g, const VertexFunction& f, int u, int v);

TangentEdgeFunction gradient(const WeightedGraph& g, const VertexFunction& f);

/// div H(u) = 1/2 sum_{v~u} [sqrt(w(v,u)) PT_{f(v)->f(u)} H(v,u) - sqrt(w(u,v)) H(u,v)].
TangentVertexField divergence(const WeightedGraph& g, const VertexFunction& f,
                              const TangentEdgeFunction& h);

double edgeInner(const WeightedGraph& g, const VertexFunction& f,
                 const TangentEdgeFunction& h, const TangentEdgeFunction& k);

/// ((2/p) sum_u (sum_{v~u} |H(u,v)|^q)^{p/q})^{1/p}.
double edgeNormPQ(const WeightedGraph& g, const VertexFunction& f,
                  const TangentEdgeFunction& h, double p, double q);

/// (sum_{v~u} |H(u,v)|^q)^{1/q}.
double localVariation(const WeightedGraph& g, const VertexFunction& f,
                      const TangentEdgeFunction& h, int u, double q);

/// Both sides of <grad f, H> = sum_u sum_{v~u} <log_{f(u)} f(v),
/// (sqrt(w(u,v)) H(u,v) - sqrt(w(v,u)) PT_{f(v)->f(u)} H(v,u)) / 2>.
std::pair<double, double> gradDivIdentity(const WeightedGraph& g, const VertexFunction& f,
                                          const TangentEdgeFunction& h);

/// sum_u sum_{v~u} <log_{f(u)} f(v), PT_{g(u)->f(u)} log_{g(u)} g(v)>_{f(u)}.
double symmetricMap(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& h);

/// (sum_u (sum_{v~u} d^2(f(u), f(v)))^{p/2})^{1/p}.
double vertexNormP(const WeightedGraph& g, const VertexFunction& f, double p);

/// (sum_u d^2(f(u), g(u)))^{1/2} over active vertices.
double vertexDistance(const VertexFunction& f, const VertexFunction& g);

// ---------------------------------------------------------------------------
// p-Laplacians. For p < 2 the singular factors use d + eps instead of d
// (anisotropic) and sqrt(S) + eps instead of sqrt(S) (isotropic).

TangentVertexField anisoPLaplacian(const WeightedGraph& g, const VertexFunction& f, double p,
                                   double epsSmooth);
TangentVertexField isoPLaplacian(const WeightedGraph& g, const VertexFunction& f, double p,
                                 double epsSmooth);
TangentVertexField pLaplacian(const WeightedGraph& g, const VertexFunction& f, Model model,
                              double p, double epsSmooth);
TangentVertexField pLaplacian(const WeightedGraph& g, const EdgeGeometry& geo, Model model,
                              double p, double epsSmooth);

/// Per-vertex factor (sqrt(S_u) + eps)^{p-2}, S_u = sum_v w d^2 (eps only for p < 2).
Eigen::VectorXd isoFactors(const WeightedGraph& g, const EdgeGeometry& geo, double p,
                           double epsSmooth);
/// Per-edge factor w^{p/2} (d + eps)^{p-2} (eps only for p < 2).
double anisoEdgeFactor(double w, double d, double p, double epsSmooth);

// ---------------------------------------------------------------------------
// Energies, residuals, gradients

/// (lambda/2) sum_u d^2(f0(u), f(u)) + (1/p) sum_{(u,v)} (sqrt(w) d)^p. With
/// p < 2 and eps > 0 each edge term uses the smoothed potential whose
/// derivative matches the smoothed operator.
double energyAniso(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
                   double lambda, double p, double epsSmooth = 0);
/// (lambda/2) sum_u d^2(f0(u), f(u)) + (1/p) sum_u (sum_{v~u} w d^2)^{p/2}.
double energyIso(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
                 double lambda, double p, double epsSmooth = 0);
double energy(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
              Model model, double lambda, double p, double epsSmooth = 0);

/// Delta_p f(u) - lambda log_{f(u)} f0(u); zero on masked vertices.
TangentVertexField residual(const WeightedGraph& g, const VertexFunction& f,
                            const VertexFunction& f0, double lambda, double p, Model model,
                            double epsSmooth = 0);

/// Riemannian gradient of energy(...) with respect to f, including the
/// contributions of edges that end at u.
TangentVertexField energyGradient(const WeightedGraph& g, const VertexFunction& f,
                                  const VertexFunction& f0, Model model, double lambda,
                                  double p, double epsSmooth = 0);

/// Riemannian gradient of d^p(., y) at x: -p d^{p-2} log_x y; zero at x == y
/// for p < 2 (the canonical subgradient for p = 1).
Coords gradDistPow(const Manifold& m, const Coords& x, const Coords& y, double p);

}  // namespace mvg
