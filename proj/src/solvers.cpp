#include "mvg/solvers.hpp"

#include <cmath>
#include <limits>

#include "mvg/errors.hpp"

namespace mvg {

void SolverConfig::validate() const {
  if (!(p > 0) || !std::isfinite(p)) throw ConfigError("p must be positive");
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw ConfigError("lambda must be nonnegative");
  if (!(epsSmooth >= 0)) throw ConfigError("eps-smooth must be nonnegative");
  if (maxIters < 0) throw ConfigError("max-iters must be nonnegative");
  if (!(stopTol >= 0)) throw ConfigError("tol must be nonnegative");
  if (scheme == Scheme::Explicit && !(dt >= 0 && std::isfinite(dt)))
    throw ConfigError("the explicit scheme needs a finite dt >= 0");
  if (scheme == Scheme::Jacobi && lambda < 1e-6)
    throw ConfigError("the jacobi scheme needs lambda >= 1e-6; use the explicit scheme for "
                      "small or vanishing data fidelity");
}

namespace {

void checkInputs(const WeightedGraph& g, const VertexFunction& fn, const VertexFunction& f0) {
  checkPairing(g, fn);
  if (!fn.sameDomain(f0)) throw DomainError("iterate and data live on different domains");
  if (fn.mask != f0.mask) throw DomainError("iterate and data masks differ");
}

// Rejects iterates with a neighbor pair at or beyond the injectivity radius.
void checkAdmissible(const WeightedGraph& g, const VertexFunction& f) {
  const Manifold& m = f.manifold;
  const double limit = m.injectivityRadius() - Manifold::kInjectivityMargin;
  if (!std::isfinite(limit)) return;
  for (int u = 0; u < g.numVertices(); ++u) {
    if (!f.active(u)) continue;
    for (int v : g.neighbors(u)) {
      if (!f.active(v)) continue;
      if (m.dist(f.point(u), f.point(v)) > limit)
        throw InjectivityError("explicit step left the admissible set at vertex " +
                                   std::to_string(u) + " (neighbor " + std::to_string(v) +
                                   "); try a smaller dt",
                               u);
    }
  }
}

VertexFunction explicitUpdate(const WeightedGraph& g, const VertexFunction& fn, double dt,
                              const EdgeGeometry& geo, const TangentVertexField& res) {
  VertexFunction next = fn;
  if (dt == 0) return next;
  for (int u = 0; u < fn.size(); ++u) {
    if (!fn.active(u)) continue;
    next.values.col(u) = fn.manifold.exp(geo.anchors[u], -dt * res.col(u));
  }
  checkAdmissible(g, next);
  return next;
}

TangentVertexField residualFrom(const WeightedGraph& g, const EdgeGeometry& geo,
                                const VertexFunction& f, const VertexFunction& f0,
                                const SolverConfig& cfg) {
  TangentVertexField res = pLaplacian(g, geo, cfg.model, cfg.p, cfg.epsSmooth);
  if (cfg.lambda != 0) {
    Coords l;
    for (int u = 0; u < f.size(); ++u) {
      if (!f.active(u)) continue;
      try {
        f.manifold.logDist(geo.anchors[u], f0.point(u), l);
      } catch (const InjectivityError& e) {
        throw InjectivityError(std::string(e.what()) + " (vertex " + std::to_string(u) + ")", u);
      }
      res.col(u) -= cfg.lambda * l;
    }
  }
  return res;
}

VertexFunction explicitStepCounted(const WeightedGraph& g, const VertexFunction& fn,
                                   const VertexFunction& f0, const SolverConfig& cfg,
                                   int* backoffs) {
  checkInputs(g, fn, f0);
  const EdgeGeometry geo = edgeGeometry(g, fn);
  const TangentVertexField res = residualFrom(g, geo, fn, f0, cfg);
  double dt = cfg.dt;
  for (int attempt = 0;; ++attempt) {
    try {
      return explicitUpdate(g, fn, dt, geo, res);
    } catch (const InjectivityError&) {
      if (!cfg.backoff || attempt >= 40) throw;
      dt /= 2;
      if (backoffs && attempt == 0) ++*backoffs;
    }
  }
}

}  // namespace

VertexFunction explicitStep(const WeightedGraph& g, const VertexFunction& fn,
                            const VertexFunction& f0, const SolverConfig& cfg) {
  return explicitStepCounted(g, fn, f0, cfg, nullptr);
}

VertexFunction jacobiStep(const WeightedGraph& g, const VertexFunction& fn,
                          const VertexFunction& f0, const SolverConfig& cfg) {
  checkInputs(g, fn, f0);
  if (cfg.lambda < 1e-6)
    throw ConfigError("the jacobi scheme needs lambda >= 1e-6");
  const Manifold& m = fn.manifold;
  const EdgeGeometry geo = edgeGeometry(g, fn);
  Eigen::VectorXd c;
  if (cfg.model == Model::Iso) c = isoFactors(g, geo, cfg.p, cfg.epsSmooth);

  VertexFunction next = fn;
  Coords num, l;
  for (int u = 0; u < fn.size(); ++u) {
    if (!fn.active(u)) continue;
    try {
      m.logDist(geo.anchors[u], f0.point(u), l);
    } catch (const InjectivityError& e) {
      throw InjectivityError(std::string(e.what()) + " (vertex " + std::to_string(u) + ")", u);
    }
    num = cfg.lambda * l;
    double den = cfg.lambda;
    for (std::size_t e = g.edgeBegin(u); e < g.edgeEnd(u); ++e) {
      if (!geo.live[e]) continue;
      const double b = cfg.model == Model::Aniso
                           ? anisoEdgeFactor(g.weight(e), geo.dists(e), cfg.p, cfg.epsSmooth)
                           : c(u) * g.weight(e);
      num += b * geo.logs.col(e);
      den += b;
    }
    next.values.col(u) = m.exp(geo.anchors[u], num / den);
  }
  return next;
}

double averageChange(const VertexFunction& a, const VertexFunction& b) {
  if (!a.sameDomain(b)) throw DomainError("vertex functions live on different domains");
  double sum = 0;
  int count = 0;
  for (int u = 0; u < a.size(); ++u) {
    if (!a.active(u)) continue;
    sum += a.manifold.dist(a.point(u), b.point(u));
    ++count;
  }
  return count ? sum / count : 0.0;
}

double residualMaxNorm(const WeightedGraph& g, const VertexFunction& f, const VertexFunction& f0,
                       const SolverConfig& cfg) {
  const EdgeGeometry geo = edgeGeometry(g, f);
  const TangentVertexField res = residualFrom(g, geo, f, f0, cfg);
  double best = 0;
  for (int u = 0; u < f.size(); ++u)
    if (f.active(u)) best = std::max(best, f.manifold.norm(geo.anchors[u], res.col(u)));
  return best;
}

SolveResult solve(const WeightedGraph& g, const VertexFunction& f0, const SolverConfig& cfg,
                  const std::optional<VertexFunction>& init) {
  cfg.validate();
  checkPairing(g, f0);
  SolveResult out{init ? *init : f0, {}};
  checkInputs(g, out.f, f0);
  SolveReport& rep = out.report;
  auto energyNow = [&](const VertexFunction& f) {
    return energy(g, f, f0, cfg.model, cfg.lambda, cfg.p, cfg.epsSmooth);
  };
  if (cfg.recordEnergy) rep.energyTrace.push_back(energyNow(out.f));

  for (int it = 0; it < cfg.maxIters; ++it) {
    VertexFunction next = cfg.scheme == Scheme::Explicit
                              ? explicitStepCounted(g, out.f, f0, cfg, &rep.backoffs)
                              : jacobiStep(g, out.f, f0, cfg);
    rep.finalChange = averageChange(out.f, next);
    out.f = std::move(next);
    rep.iterations = it + 1;
    rep.changeTrace.push_back(rep.finalChange);
    if (cfg.recordEnergy) rep.energyTrace.push_back(energyNow(out.f));
    if (rep.finalChange < cfg.stopTol) {
      rep.reason = StopReason::Converged;
      break;
    }
  }
  rep.residualMaxNorm = residualMaxNorm(g, out.f, f0, cfg);
  return out;
}

std::string toString(Model m) { return m == Model::Aniso ? "aniso" : "iso"; }
std::string toString(Scheme s) { return s == Scheme::Explicit ? "explicit" : "jacobi"; }
std::string toString(StopReason r) {
  return r == StopReason::Converged ? "converged" : "max_iters";
}

Model parseModel(const std::string& s) {
  if (s == "aniso") return Model::Aniso;
  if (s == "iso") return Model::Iso;
  throw ConfigError("unknown model '" + s + "' (expected aniso or iso)");
}

Scheme parseScheme(const std::string& s) {
  if (s == "explicit") return Scheme::Explicit;
  if (s == "jacobi") return Scheme::Jacobi;
  throw ConfigError("unknown scheme '" + s + "' (expected explicit or jacobi)");
}

}  // namespace mvg
