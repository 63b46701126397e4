#pragma once

// Closed-form Riemannian kernels for the manifold families used throughout the
// library: Euclidean space R^m, the circle S^1, the 2-sphere S^2 and the
// symmetric positive definite matrices P(n) with the affine-invariant metric.
//
// Points and tangent vectors are stored in ambient coordinates:
//   Euclidean(m)  m coordinates
//   Circle        one angle in (-pi, pi]
//   Sphere2       unit vector in R^3, tangents orthogonal to the base point
//   Spd(n)        n*n matrix entries (symmetric, so storage order is moot)

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "mvg/errors.hpp"

namespace mvg {

inline constexpr int kMaxAmbient = 16;
inline constexpr int kMaxSpdSize = 4;

enum class ManifoldKind { Euclidean, Circle, Sphere2, Spd };

template <typename Scalar>
class BasicManifold {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0,
                               kMaxSpdSize, kMaxSpdSize>;
  using ConstRef = Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

  /// Margin below the injectivity radius at which log refuses to answer.
  static constexpr Scalar kInjectivityMargin = Scalar(1e-8);
  /// Eigenvalue floor applied before matrix logarithms and square roots.
  static constexpr Scalar kEigenFloor = Scalar(1e-14);

  /// A base point with whatever per-point factorization the kernels need
  /// (the SPD square root and its inverse). Reusing an anchor saves the
  /// eigendecomposition when many maps share the same base point.
  struct Anchor {
    Vector x;
    Matrix sqrt;
    Matrix invSqrt;
  };

  BasicManifold() = default;

  Anchor anchor(ConstRef x) const {
    Anchor a;
    a.x = x;
    if (kind_ == ManifoldKind::Spd) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(asMatrix(x)));
      const auto& q = es.eigenvectors();
      const Vector s = es.eigenvalues().cwiseMax(kEigenFloor).cwiseSqrt();
      a.sqrt = q * s.asDiagonal() * q.transpose();
      a.invSqrt = q * s.cwiseInverse().asDiagonal() * q.transpose();
    }
    return a;
  }

  static BasicManifold euclidean(int m) {
    if (m < 1 || m > kMaxAmbient)
      throw DomainError("euclidean dimension must be in [1, " +
                        std::to_string(kMaxAmbient) + "]");
    return BasicManifold(ManifoldKind::Euclidean, m);
  }
  static BasicManifold circle() { return BasicManifold(ManifoldKind::Circle, 1); }
  static BasicManifold sphere2() { return BasicManifold(ManifoldKind::Sphere2, 2); }
  static BasicManifold spd(int n) {
    if (n < 1 || n > kMaxSpdSize)
      throw DomainError("spd size must be in [1, " + std::to_string(kMaxSpdSize) +
                        "]");
    return BasicManifold(ManifoldKind::Spd, n);
  }

  ManifoldKind kind() const { return kind_; }
  /// m for Euclidean(m), n for Spd(n), 1 for the circle, 2 for the sphere.
  int param() const { return param_; }

  int intrinsicDim() const {
    switch (kind_) {
      case ManifoldKind::Euclidean: return param_;
      case ManifoldKind::Circle: return 1;
      case ManifoldKind::Sphere2: return 2;
      case ManifoldKind::Spd: return param_ * (param_ + 1) / 2;
    }
    return 0;
  }

  int ambientDim() const {
    switch (kind_) {
      case ManifoldKind::Euclidean: return param_;
      case ManifoldKind::Circle: return 1;
      case ManifoldKind::Sphere2: return 3;
      case ManifoldKind::Spd: return param_ * param_;
    }
    return 0;
  }

  Scalar injectivityRadius() const {
    if (kind_ == ManifoldKind::Circle || kind_ == ManifoldKind::Sphere2)
      return std::numbers::pi_v<Scalar>;
    return std::numeric_limits<Scalar>::infinity();
  }

  std::string name() const {
    switch (kind_) {
      case ManifoldKind::Euclidean: return "euclidean(" + std::to_string(param_) + ")";
      case ManifoldKind::Circle: return "circle";
      case ManifoldKind::Sphere2: return "sphere2";
      case ManifoldKind::Spd: return "spd(" + std::to_string(param_) + ")";
    }
    return {};
  }

  friend bool operator==(const BasicManifold&, const BasicManifold&) = default;

  Vector zero() const { return Vector::Zero(ambientDim()); }

  /// Wraps an angle to the canonical interval (-pi, pi].
  static Scalar wrapAngle(Scalar a) {
    const Scalar twoPi = 2 * std::numbers::pi_v<Scalar>;
    Scalar r = std::remainder(a, twoPi);
    if (r <= -std::numbers::pi_v<Scalar>) r += twoPi;
    return r;
  }

  // --------------------------------------------------------------------------
  // Distance, log, exp

  Scalar dist(ConstRef x, ConstRef y) const {
    if (x == y) return 0;
    if (kind_ == ManifoldKind::Spd) return dist(anchor(x), y);
    switch (kind_) {
      case ManifoldKind::Euclidean: return (y - x).norm();
      case ManifoldKind::Circle: return std::abs(wrapAngle(y(0) - x(0)));
      case ManifoldKind::Sphere2: return sphereAngle(x, y);
      default: return 0;
    }
  }

  Scalar dist(const Anchor& a, ConstRef y) const {
    if (kind_ != ManifoldKind::Spd || a.x == y) return dist(a.x, y);
    const Matrix m = symmetrize(a.invSqrt * asMatrix(y) * a.invSqrt);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()
        .cwiseMax(kEigenFloor)
        .unaryExpr([](Scalar s) { return std::log(s); })
        .norm();
  }

  /// log_x(y) written to `out`; returns d(x, y). Throws InjectivityError when y
  /// is (numerically) at or beyond the cut locus of x.
  Scalar logDist(ConstRef x, ConstRef y, Vector& out) const {
    if (kind_ == ManifoldKind::Spd) return logDist(anchor(x), y, out);
    Anchor a;
    a.x = x;
    return logDist(a, y, out);
  }

  Scalar logDist(const Anchor& a, ConstRef y, Vector& out) const {
    const auto& x = a.x;
    // Identical points: exact zero, so constant data stays exactly constant.
    if (x == y) {
      out = Vector::Zero(x.size());
      return 0;
    }
    switch (kind_) {
      case ManifoldKind::Euclidean:
        out = y - x;
        return out.norm();
      case ManifoldKind::Circle: {
        const Scalar d = wrapAngle(y(0) - x(0));
        checkInjective(std::abs(d));
        out.resize(1);
        out(0) = d;
        return std::abs(d);
      }
      case ManifoldKind::Sphere2: {
        const Scalar d = sphereAngle(x, y);
        checkInjective(d);
        out = y - x.dot(y) * x;
        const Scalar n = out.norm();
        if (n > 0) out *= d / n;
        else out.setZero();
        return d;
      }
      case ManifoldKind::Spd: {
        const Matrix m = symmetrize(a.invSqrt * asMatrix(y) * a.invSqrt);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        const auto& q = es.eigenvectors();
        const Vector l = es.eigenvalues().cwiseMax(kEigenFloor).unaryExpr(
            [](Scalar s) { return std::log(s); });
        out = asVector(symmetrize(a.sqrt * (q * l.asDiagonal() * q.transpose()) * a.sqrt));
        return l.norm();
      }
    }
    return 0;
  }

  /// log_x(y) and log_y(x) together; returns d(x, y). On SPD both come from
  /// one eigendecomposition: with M = x^{-1/2} y x^{-1/2} = Q diag(l) Q^T,
  /// log_y(x) = -x^{1/2} Q diag(l log l) Q^T x^{1/2}.
  Scalar logPair(const Anchor& a, ConstRef y, Vector& xy, Vector& yx) const {
    if (kind_ != ManifoldKind::Spd || a.x == y) {
      const Scalar d = logDist(a, y, xy);
      Anchor b;
      b.x = y;
      if (kind_ == ManifoldKind::Spd) {
        yx = Vector::Zero(y.size());
        return d;
      }
      logDist(b, a.x, yx);
      return d;
    }
    const Matrix m = symmetrize(a.invSqrt * asMatrix(y) * a.invSqrt);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const auto& q = es.eigenvectors();
    const Vector l = es.eigenvalues().cwiseMax(kEigenFloor);
    const Vector ll = l.unaryExpr([](Scalar s) { return std::log(s); });
    xy = asVector(symmetrize(a.sqrt * (q * ll.asDiagonal() * q.transpose()) * a.sqrt));
    const Vector lll = l.cwiseProduct(ll);
    yx = asVector(symmetrize(-(a.sqrt * (q * lll.asDiagonal() * q.transpose()) * a.sqrt)));
    return ll.norm();
  }

  Vector log(ConstRef x, ConstRef y) const {
    Vector out;
    logDist(x, y, out);
    return out;
  }

  Vector log(const Anchor& a, ConstRef y) const {
    Vector out;
    logDist(a, y, out);
    return out;
  }

  Vector exp(ConstRef x, ConstRef xi) const {
    if (xi.isZero(0)) return x;
    if (kind_ == ManifoldKind::Spd) return exp(anchor(x), xi);
    Anchor a;
    a.x = x;
    return exp(a, xi);
  }

  Vector exp(const Anchor& a, ConstRef xi) const {
    const auto& x = a.x;
    if (xi.isZero(0)) return x;
    switch (kind_) {
      case ManifoldKind::Euclidean: return x + xi;
      case ManifoldKind::Circle: {
        Vector out(1);
        out(0) = wrapAngle(x(0) + xi(0));
        return out;
      }
      case ManifoldKind::Sphere2: {
        const Scalar t = xi.norm();
        if (t == 0) return x;
        Vector out = std::cos(t) * x + (std::sin(t) / t) * xi;
        out.normalize();
        return out;
      }
      case ManifoldKind::Spd: {
        const Matrix m = symmetrize(a.invSqrt * asMatrix(xi) * a.invSqrt);
        const Matrix e = spectral(m, [](Scalar s) { return std::exp(s); });
        return asVector(symmetrize(a.sqrt * e * a.sqrt));
      }
    }
    return x;
  }

  /// Parallel transport of v in T_x along the minimizing geodesic to y.
  Vector transport(ConstRef x, ConstRef y, ConstRef v) const {
    if (kind_ == ManifoldKind::Spd) return transport(anchor(x), y, v);
    Anchor a;
    a.x = x;
    return transport(a, y, v);
  }

  Vector transport(const Anchor& a, ConstRef y, ConstRef v) const {
    switch (kind_) {
      case ManifoldKind::Euclidean:
      case ManifoldKind::Circle:
        return v;
      case ManifoldKind::Sphere2: {
        Vector dir;
        const Scalar d = logDist(a, y, dir);
        if (d == 0) return v;
        dir /= d;
        const Scalar c = dir.dot(v);
        return v + (std::cos(d) - 1) * c * dir - std::sin(d) * c * a.x;
      }
      case ManifoldKind::Spd: {
        const Matrix m = symmetrize(a.invSqrt * asMatrix(y) * a.invSqrt);
        const Matrix root = spectral(m, [](Scalar s) {
          return std::sqrt(std::max(s, kEigenFloor));
        });
        const Matrix e = a.sqrt * root * a.invSqrt;
        return asVector(symmetrize(e * asMatrix(v) * e.transpose()));
      }
    }
    return v;
  }

  Scalar inner(ConstRef x, ConstRef u, ConstRef v) const {
    if (kind_ != ManifoldKind::Spd) return u.dot(v);
    return inner(anchor(x), u, v);
  }

  Scalar inner(const Anchor& a, ConstRef u, ConstRef v) const {
    if (kind_ != ManifoldKind::Spd) return u.dot(v);
    const Matrix l = a.invSqrt * asMatrix(u) * a.invSqrt;
    const Matrix r = a.invSqrt * asMatrix(v) * a.invSqrt;
    return l.cwiseProduct(r).sum();
  }

  Scalar norm(ConstRef x, ConstRef u) const {
    return std::sqrt(std::max(Scalar(0), inner(x, u, u)));
  }

  Scalar norm(const Anchor& a, ConstRef u) const {
    return std::sqrt(std::max(Scalar(0), inner(a, u, u)));
  }

  /// Isotropic Gaussian with standard deviation sigma per coordinate of an
  /// orthonormal basis of T_x; E|xi|^2 = sigma^2 * intrinsicDim().
  template <typename Rng>
  Vector randomTangent(ConstRef x, Scalar sigma, Rng& rng) const {
    Vector out = zero();
    if (sigma == 0) return out;
    std::normal_distribution<Scalar> normal(Scalar(0), sigma);
    switch (kind_) {
      case ManifoldKind::Euclidean:
      case ManifoldKind::Circle:
        for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = normal(rng);
        return out;
      case ManifoldKind::Sphere2: {
        for (Eigen::Index i = 0; i < 3; ++i) out(i) = normal(rng);
        out -= x.dot(out) * x;
        return out;
      }
      case ManifoldKind::Spd: {
        const int n = param_;
        Matrix s(n, n);
        const Scalar offScale = 1 / std::sqrt(Scalar(2));
        for (int i = 0; i < n; ++i) {
          s(i, i) = normal(rng);
          for (int j = i + 1; j < n; ++j) s(i, j) = s(j, i) = offScale * normal(rng);
        }
        const Anchor a = anchor(x);
        return asVector(symmetrize(a.sqrt * s * a.sqrt));
      }
    }
    return out;
  }

  // --------------------------------------------------------------------------
  // Representation hygiene

  /// Nearest canonical representative: wrapped angle, unit vector or
  /// symmetrized matrix.
  Vector canonicalize(ConstRef x) const {
    switch (kind_) {
      case ManifoldKind::Circle: {
        Vector out(1);
        out(0) = wrapAngle(x(0));
        return out;
      }
      case ManifoldKind::Sphere2: return x.normalized();
      case ManifoldKind::Spd: return asVector(symmetrize(asMatrix(x)));
      case ManifoldKind::Euclidean: return x;
    }
    return x;
  }

  /// Empty string when x is a valid point, otherwise the violated invariant.
  std::string checkPoint(ConstRef x) const {
    if (x.size() != ambientDim()) return "wrong number of coordinates";
    if (!x.allFinite()) return "non-finite coordinate";
    switch (kind_) {
      case ManifoldKind::Euclidean: return {};
      case ManifoldKind::Circle:
        if (x(0) <= -std::numbers::pi_v<Scalar> || x(0) > std::numbers::pi_v<Scalar>)
          return "angle outside (-pi, pi]";
        return {};
      case ManifoldKind::Sphere2:
        if (std::abs(x.norm() - 1) > Scalar(1e-10)) return "not a unit vector";
        return {};
      case ManifoldKind::Spd: {
        const Matrix a = asMatrix(x);
        const Scalar scale = std::max(Scalar(1), a.cwiseAbs().maxCoeff());
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
          return "matrix not symmetric";
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues().minCoeff() > 0)) return "matrix not positive definite";
        return {};
      }
    }
    return {};
  }

  bool isPoint(ConstRef x) const { return checkPoint(x).empty(); }

 private:
  BasicManifold(ManifoldKind kind, int param) : kind_(kind), param_(param) {}

  void checkInjective(Scalar d) const {
    if (d > injectivityRadius() - kInjectivityMargin)
      throw InjectivityError("log undefined: points are (nearly) antipodal on " +
                             name());
  }

  static Scalar sphereAngle(ConstRef x, ConstRef y) {
    const Eigen::Matrix<Scalar, 3, 1> a = x.template head<3>();
    const Eigen::Matrix<Scalar, 3, 1> b = y.template head<3>();
    return std::atan2(a.cross(b).norm(), a.dot(b));
  }

  Matrix asMatrix(ConstRef v) const {
    return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(
        v.data(), param_, param_);
  }

  Vector asVector(const Matrix& m) const {
    Vector out(param_ * param_);
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(
        out.data(), param_, param_) = m;
    return out;
  }

  static Matrix symmetrize(const Matrix& a) { return (a + a.transpose()) / 2; }

  template <typename Fn>
  static Matrix spectral(const Matrix& a, Fn fn) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    const auto& q = es.eigenvectors();
    const Vector s = es.eigenvalues().unaryExpr(fn);
    return q * s.asDiagonal() * q.transpose();
  }

  ManifoldKind kind_ = ManifoldKind::Euclidean;
  int param_ = 1;
};

using Manifold = BasicManifold<double>;
using Coords = Manifold::Vector;

}  // namespace mvg
