#include "mvg/calculus.hpp"

#include <cmath>
#include <string>

#include "mvg/errors.hpp"

namespace mvg {

namespace {

bool liveEdge(const VertexFunction& f, int u, int v) { return f.active(u) && f.active(v); }

void checkEdgeFunction(const WeightedGraph& g, const VertexFunction& f,
                       const TangentEdgeFunction& h) {
  if (h.rows() != f.manifold.ambientDim() || h.cols() != static_cast<Eigen::Index>(g.numEdges()))
    throw DomainError("edge function has the wrong shape");
}

void checkSameDomain(const VertexFunction& f, const VertexFunction& g) {
  if (!f.sameDomain(g)) throw DomainError("vertex functions live on different domains");
}

// Log with the failing vertex attached to the error.
template <typename Col>
double logAt(const Manifold& m, const Manifold::Anchor& a, int u, const Col& y, Coords& out) {
  try {
    return m.logDist(a, y, out);
  } catch (const InjectivityError& e) {
    throw InjectivityError(std::string(e.what()) + " (vertex " + std::to_string(u) + ")", u);
  }
}

// Smoothed potential phi with phi(0) = 0 and phi'(d) = p d (d + eps)^{p-2}.
double smoothedPower(double d, double p, double eps) {
  if (eps == 0 || p >= 2) return std::pow(d, p);
  if (p == 1) return d - eps * std::log1p(d / eps);
  return std::pow(d + eps, p) - std::pow(eps, p) -
         p / (p - 1) * eps * (std::pow(d + eps, p - 1) - std::pow(eps, p - 1));
}

double dataTerm(const VertexFunction& f, const VertexFunction& f0, double lambda) {
  if (lambda == 0) return 0;
  double sum = 0;
  for (int u = 0; u < f.size(); ++u) {
    if (!f.active(u)) continue;
    const double d = f.manifold.dist(f.point(u), f0.point(u));
    sum += d * d;
  }
  return 0.5 * lambda * sum;
}

}  // namespace

void checkPairing(const WeightedGraph& g, const VertexFunction& f) {
  if (g.numVertices() != f.size())
    throw DomainError("graph has " + std::to_string(g.numVertices()) +
                      " vertices but the function has " + std::to_string(f.size()));
}

EdgeGeometry edgeGeometry(const WeightedGraph& g, const VertexFunction& f) {
  checkPairing(g, f);
  const Manifold& m = f.manifold;
  EdgeGeometry geo;
  geo.anchors.reserve(f.size());
  for (int u = 0; u < f.size(); ++u) geo.anchors.push_back(m.anchor(f.point(u)));
  geo.logs.setZero(m.ambientDim(), g.numEdges());
  geo.dists.setZero(g.numEdges());
  geo.live.assign(g.numEdges(), 0);
  Coords l, back;
  for (int u = 0; u < g.numVertices(); ++u) {
    if (!f.active(u)) continue;
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) {
      const int v = g.target(e);
      if (!f.active(v)) continue;
      const std::ptrdiff_t r = g.reverse(e);
      if (r >= 0 && static_cast<std::size_t>(r) < e) continue;  // filled from the other side
      geo.live[e] = 1;
      if (r < 0) {
        geo.dists(e) = logAt(m, geo.anchors[u], u, f.point(v), l);
        geo.logs.col(e) = l;
        continue;
      }
      try {
        geo.dists(e) = geo.dists(r) = m.logPair(geo.anchors[u], f.point(v), l, back);
      } catch (const InjectivityError& err) {
        throw InjectivityError(std::string(err.what()) + " (vertex " + std::to_string(u) + ")",
                               u);
      }
      geo.logs.col(e) = l;
      geo.logs.col(r) = back;
      geo.live[r] = 1;
    }
  }
  return geo;
}

// ---------------------------------------------------------------------------

Coords directionalDerivative(const WeightedGraph& g, const VertexFunction& f, int u, int v) {
  checkPairing(g, f);
  const Manifold& m = f.manifold;
  const double w = (u == v || !liveEdge(f, u, v)) ? 0.0 : g.weightBetween(u, v);
  if (w == 0) return m.zero();
  Coords l;
  logAt(m, m.anchor(f.point(u)), u, f.point(v), l);
  return std::sqrt(w) * l;
}

TangentEdgeFunction gradient(const WeightedGraph& g, const VertexFunction& f) {
  EdgeGeometry geo = edgeGeometry(g, f);
  for (std::size_t e = 0; e < g.numEdges(); ++e) geo.logs.col(e) *= std::sqrt(g.weight(e));
  return std::move(geo.logs);
}

TangentVertexField divergence(const WeightedGraph& g, const VertexFunction& f,
                              const TangentEdgeFunction& h) {
  checkPairing(g, f);
  checkEdgeFunction(g, f, h);
  const Manifold& m = f.manifold;
  TangentVertexField out = TangentVertexField::Zero(m.ambientDim(), f.size());
  std::vector<Manifold::Anchor> anchors;
  anchors.reserve(f.size());
  for (int u = 0; u < f.size(); ++u) anchors.push_back(m.anchor(f.point(u)));
  for (int u = 0; u < g.numVertices(); ++u) {
    if (!f.active(u)) continue;
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) {
      const int v = g.target(e);
      if (!f.active(v)) continue;
      out.col(u) -= 0.5 * std::sqrt(g.weight(e)) * h.col(e);
      const auto r = g.reverse(e);
      if (r < 0) continue;
      try {
        out.col(u) += 0.5 * std::sqrt(g.weight(r)) *
                      m.transport(anchors[v], f.point(u), h.col(r));
      } catch (const InjectivityError& err) {
        throw InjectivityError(std::string(err.what()) + " (vertex " + std::to_string(u) + ")",
                               u);
      }
    }
  }
  return out;
}

double edgeInner(const WeightedGraph& g, const VertexFunction& f, const TangentEdgeFunction& h,
                 const TangentEdgeFunction& k) {
  checkPairing(g, f);
  checkEdgeFunction(g, f, h);
  checkEdgeFunction(g, f, k);
  const Manifold& m = f.manifold;
  double sum = 0;
  for (int u = 0; u < g.numVertices(); ++u) {
    if (!f.active(u) || g.degree(u) == 0) continue;
    const auto a = m.anchor(f.point(u));
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e)
      if (f.active(g.target(e))) sum += m.inner(a, h.col(e), k.col(e));
  }
  return sum;
}

double localVariation(const WeightedGraph& g, const VertexFunction& f,
                      const TangentEdgeFunction& h, int u, double q) {
  checkPairing(g, f);
  checkEdgeFunction(g, f, h);
  if (!(q > 0)) throw DomainError("q must be positive");
  if (!f.active(u)) return 0;
  const Manifold& m = f.manifold;
  const auto a = m.anchor(f.point(u));
  double sum = 0;
  for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e)
    if (f.active(g.target(e))) sum += std::pow(m.norm(a, h.col(e)), q);
  return std::pow(sum, 1 / q);
}

double edgeNormPQ(const WeightedGraph& g, const VertexFunction& f, const TangentEdgeFunction& h,
                  double p, double q) {
  if (!(p > 0)) throw DomainError("p must be positive");
  double sum = 0;
  for (int u = 0; u < g.numVertices(); ++u)
    sum += std::pow(localVariation(g, f, h, u, q), p);
  return std::pow(2 / p * sum, 1 / p);
}

std::pair<double, double> gradDivIdentity(const WeightedGraph& g, const VertexFunction& f,
                                          const TangentEdgeFunction& h) {
  checkEdgeFunction(g, f, h);
  if (!g.hasSymmetricEdgeSet())
    throw DomainError("the gradient/divergence identity needs a symmetric edge set");
  const EdgeGeometry geo = edgeGeometry(g, f);
  const Manifold& m = f.manifold;
  double lhs = 0, rhs = 0;
  for (int u = 0; u < g.numVertices(); ++u) {
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) {
      if (!geo.live[e]) continue;
      const int v = g.target(e);
      const auto r = static_cast<std::size_t>(g.reverse(e));
      const auto& a = geo.anchors[u];
      lhs += std::sqrt(g.weight(e)) * m.inner(a, geo.logs.col(e), h.col(e));
      const Coords moved = m.transport(geo.anchors[v], f.point(u), h.col(r));
      const Coords mix = 0.5 * std::sqrt(g.weight(e)) * h.col(e) -
                         0.5 * std::sqrt(g.weight(r)) * moved;
      rhs += m.inner(a, geo.logs.col(e), mix);
    }
  }
  return {lhs, rhs};
}

double symmetricMap(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& h) {
  checkSameDomain(f, h);
  const EdgeGeometry gf = edgeGeometry(g, f);
  const EdgeGeometry gh = edgeGeometry(g, h);
  const Manifold& m = f.manifold;
  double sum = 0;
  for (int u = 0; u < g.numVertices(); ++u) {
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) {
      if (!gf.live[e]) continue;
      const Coords moved = m.transport(gh.anchors[u], f.point(u), gh.logs.col(e));
      sum += m.inner(gf.anchors[u], gf.logs.col(e), moved);
    }
  }
  return sum;
}

double vertexNormP(const WeightedGraph& g, const VertexFunction& f, double p) {
  if (!(p > 0)) throw DomainError("p must be positive");
  const EdgeGeometry geo = edgeGeometry(g, f);
  double sum = 0;
  for (int u = 0; u < g.numVertices(); ++u) {
    double s = 0;
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) s += geo.dists(e) * geo.dists(e);
    sum += std::pow(s, p / 2);
  }
  return std::pow(sum, 1 / p);
}

double vertexDistance(const VertexFunction& f, const VertexFunction& g) {
  checkSameDomain(f, g);
  double sum = 0;
  for (int u = 0; u < f.size(); ++u) {
    if (!f.active(u)) continue;
    const double d = f.manifold.dist(f.point(u), g.point(u));
    sum += d * d;
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

double anisoEdgeFactor(double w, double d, double p, double eps) {
  if (p == 2) return w;
  if (p == 1) return d + eps == 0 ? 0.0 : std::sqrt(w) / (d + eps);
  const double scale = std::pow(w, p / 2);
  if (p < 2) {
    if (d + eps == 0) return 0;
    return scale * std::pow(d + eps, p - 2);
  }
  return scale * std::pow(d, p - 2);
}

Eigen::VectorXd isoFactors(const WeightedGraph& g, const EdgeGeometry& geo, double p,
                           double eps) {
  Eigen::VectorXd c(g.numVertices());
  for (int u = 0; u < g.numVertices(); ++u) {
    if (p == 2) {
      c(u) = 1;
      continue;
    }
    double s = 0;
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e)
      if (geo.live[e]) s += g.weight(e) * geo.dists(e) * geo.dists(e);
    const double root = std::sqrt(s) + (p < 2 ? eps : 0.0);
    c(u) = (p < 2 && root == 0) ? 0.0 : std::pow(root, p - 2);
  }
  return c;
}

TangentVertexField pLaplacian(const WeightedGraph& g, const EdgeGeometry& geo, Model model,
                              double p, double eps) {
  if (!(p > 0)) throw DomainError("p must be positive");
  if (!(eps >= 0)) throw DomainError("smoothing epsilon must be nonnegative");
  TangentVertexField out = TangentVertexField::Zero(geo.logs.rows(), g.numVertices());
  Eigen::VectorXd c;
  if (model == Model::Iso) c = isoFactors(g, geo, p, eps);
  for (int u = 0; u < g.numVertices(); ++u) {
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) {
      if (!geo.live[e]) continue;
      const double b = model == Model::Aniso
                           ? anisoEdgeFactor(g.weight(e), geo.dists(e), p, eps)
                           : c(u) * g.weight(e);
      out.col(u) -= b * geo.logs.col(e);
    }
  }
  return out;
}

TangentVertexField pLaplacian(const WeightedGraph& g, const VertexFunction& f, Model model,
                              double p, double eps) {
  return pLaplacian(g, edgeGeometry(g, f), model, p, eps);
}

TangentVertexField anisoPLaplacian(const WeightedGraph& g, const VertexFunction& f, double p,
                                   double eps) {
  return pLaplacian(g, f, Model::Aniso, p, eps);
}

TangentVertexField isoPLaplacian(const WeightedGraph& g, const VertexFunction& f, double p,
                                 double eps) {
  return pLaplacian(g, f, Model::Iso, p, eps);
}

// ---------------------------------------------------------------------------

double energyAniso(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
                   double lambda, double p, double eps) {
  checkSameDomain(f, f0);
  if (!(p > 0) || !(lambda >= 0)) throw DomainError("need p > 0 and lambda >= 0");
  const EdgeGeometry geo = edgeGeometry(g, f);
  double reg = 0;
  for (std::size_t e = 0; e < g.numEdges(); ++e)
    if (geo.live[e]) reg += std::pow(g.weight(e), p / 2) * smoothedPower(geo.dists(e), p, eps);
  return dataTerm(f, f0, lambda) + reg / p;
}

double energyIso(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
                 double lambda, double p, double eps) {
  checkSameDomain(f, f0);
  if (!(p > 0) || !(lambda >= 0)) throw DomainError("need p > 0 and lambda >= 0");
  const EdgeGeometry geo = edgeGeometry(g, f);
  double reg = 0;
  for (int u = 0; u < g.numVertices(); ++u) {
    double s = 0;
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e)
      if (geo.live[e]) s += g.weight(e) * geo.dists(e) * geo.dists(e);
    reg += p == 2 ? s : smoothedPower(std::sqrt(s), p, eps);
  }
  return dataTerm(f, f0, lambda) + reg / p;
}

double energy(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
              Model model, double lambda, double p, double eps) {
  return model == Model::Aniso ? energyAniso(g, f, f0, lambda, p, eps)
                               : energyIso(g, f, f0, lambda, p, eps);
}

TangentVertexField residual(const WeightedGraph& g, const VertexFunction& f,
                            const VertexFunction& f0, double lambda, double p, Model model,
                            double eps) {
  checkSameDomain(f, f0);
  const EdgeGeometry geo = edgeGeometry(g, f);
  TangentVertexField out = pLaplacian(g, geo, model, p, eps);
  if (lambda != 0) {
    Coords l;
    for (int u = 0; u < f.size(); ++u) {
      if (!f.active(u)) continue;
      logAt(f.manifold, geo.anchors[u], u, f0.point(u), l);
      out.col(u) -= lambda * l;
    }
  }
  return out;
}

TangentVertexField energyGradient(const WeightedGraph& g, const VertexFunction& f,
                                  const VertexFunction& f0, Model model, double lambda,
                                  double p, double eps) {
  checkSameDomain(f, f0);
  if (!(p > 0)) throw DomainError("p must be positive");
  const Manifold& m = f.manifold;
  const EdgeGeometry geo = edgeGeometry(g, f);
  Eigen::VectorXd c;
  if (model == Model::Iso) c = isoFactors(g, geo, p, eps);
  TangentVertexField out = TangentVertexField::Zero(m.ambientDim(), f.size());
  Coords back;
  for (int u = 0; u < g.numVertices(); ++u) {
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) {
      if (!geo.live[e]) continue;
      const int v = g.target(e);
      const double b = model == Model::Aniso
                           ? anisoEdgeFactor(g.weight(e), geo.dists(e), p, eps)
                           : c(u) * g.weight(e);
      out.col(u) -= b * geo.logs.col(e);
      const auto r = g.reverse(e);
      if (r >= 0) back = geo.logs.col(r);
      else logAt(m, geo.anchors[v], v, f.point(u), back);
      out.col(v) -= b * back;
    }
  }
  if (lambda != 0) {
    Coords l;
    for (int u = 0; u < f.size(); ++u) {
      if (!f.active(u)) continue;
      logAt(m, geo.anchors[u], u, f0.point(u), l);
      out.col(u) -= lambda * l;
    }
  }
  return out;
}

Coords gradDistPow(const Manifold& m, const Coords& x, const Coords& y, double p) {
  if (!(p > 0)) throw DomainError("p must be positive");
  Coords l;
  const double d = m.logDist(x, y, l);
  if (d == 0) return m.zero();
  return -p * std::pow(d, p - 2) * l;
}

}  // namespace mvg
