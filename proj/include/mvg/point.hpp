#pragma once

// Checked point/tangent value types on top of the raw kernels in manifold.hpp.
// The kernels trust their inputs; these wrappers carry the manifold and base
// point along and reject mixed inputs.

#include <cstdint>
#include <random>

#include "mvg/manifold.hpp"

namespace mvg {

struct ManifoldPoint {
  Manifold manifold;
  Coords coords;

  /// Validates the coordinates against the manifold invariants.
  static ManifoldPoint make(const Manifold& m, const Eigen::Ref<const Eigen::VectorXd>& c) {
    const std::string why = m.checkPoint(c);
    if (!why.empty()) throw DomainError("invalid point on " + m.name() + ": " + why);
    return {m, c};
  }

  friend bool operator==(const ManifoldPoint& a, const ManifoldPoint& b) {
    return a.manifold == b.manifold && a.coords == b.coords;
  }
};

struct TangentVector {
  ManifoldPoint base;
  Coords coords;

  static TangentVector zero(const ManifoldPoint& base) {
    return {base, base.manifold.zero()};
  }
};

namespace detail {
inline void requireSameManifold(const ManifoldPoint& x, const ManifoldPoint& y) {
  if (!(x.manifold == y.manifold))
    throw DomainError("manifold mismatch: " + x.manifold.name() + " vs " +
                      y.manifold.name());
}
inline void requireBase(const ManifoldPoint& x, const TangentVector& v) {
  if (!(v.base == x)) throw DomainError("tangent vector is not based at the given point");
}
}  // namespace detail

inline double dist(const ManifoldPoint& x, const ManifoldPoint& y) {
  detail::requireSameManifold(x, y);
  return x.manifold.dist(x.coords, y.coords);
}

inline ManifoldPoint exp(const ManifoldPoint& x, const TangentVector& xi) {
  detail::requireBase(x, xi);
  return {x.manifold, x.manifold.exp(x.coords, xi.coords)};
}

inline TangentVector log(const ManifoldPoint& x, const ManifoldPoint& y) {
  detail::requireSameManifold(x, y);
  return {x, x.manifold.log(x.coords, y.coords)};
}

inline TangentVector parallelTransport(const ManifoldPoint& x, const ManifoldPoint& y,
                                       const TangentVector& v) {
  detail::requireSameManifold(x, y);
  detail::requireBase(x, v);
  return {y, x.manifold.transport(x.coords, y.coords, v.coords)};
}

inline double inner(const TangentVector& u, const TangentVector& v) {
  if (!(u.base == v.base)) throw DomainError("inner product of vectors at different bases");
  return u.base.manifold.inner(u.base.coords, u.coords, v.coords);
}

inline double tnorm(const TangentVector& u) {
  return u.base.manifold.norm(u.base.coords, u.coords);
}

inline TangentVector randomTangent(const ManifoldPoint& x, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {x, x.manifold.randomTangent(x.coords, sigma, rng)};
}

}  // namespace mvg
