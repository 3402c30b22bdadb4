#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace revip {

enum class SpaceKind {
  PositiveReal,
  UnitInterval,
  RealLine,
  Integers,
  NonNegIntegers,
  ThreePointSet,      // {-1, 0, 1}
  BernoulliCrossUnit, // {0,1} x (0,1)
  Spd,                // symmetric positive definite d x d
};

struct Space {
  SpaceKind kind;
  int dim = 1;
};

inline std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::PositiveReal: return "PositiveReal";
    case SpaceKind::UnitInterval: return "UnitInterval";
    case SpaceKind::RealLine: return "RealLine";
    case SpaceKind::Integers: return "Integers";
    case SpaceKind::NonNegIntegers: return "NonNegIntegers";
    case SpaceKind::ThreePointSet: return "ThreePointSet";
    case SpaceKind::BernoulliCrossUnit: return "BernoulliCrossUnit";
    case SpaceKind::Spd: return "SPD";
  }
  return "?";
}

inline SpaceKind space_kind_from_string(const std::string& s) {
  for (auto k : {SpaceKind::PositiveReal, SpaceKind::UnitInterval, SpaceKind::RealLine,
                 SpaceKind::Integers, SpaceKind::NonNegIntegers, SpaceKind::ThreePointSet,
                 SpaceKind::BernoulliCrossUnit, SpaceKind::Spd}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown space kind '" + s + "'");
}

/// Point of {0,1} x (0,1): the noise of the beta walk.
struct BernoulliUnit {
  int coin = 0;
  double unit = 0.5;
  friend bool operator==(const BernoulliUnit&, const BernoulliUnit&) = default;
};

template <int D>
using SpdMatrix = Eigen::Matrix<double, D, D>;

/// Thrown when a map is evaluated outside its declared spaces or leaves them.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

inline bool contains(const Space& s, double x) {
  if (!std::isfinite(x)) return false;
  switch (s.kind) {
    case SpaceKind::PositiveReal: return x > 0.0;
    case SpaceKind::UnitInterval: return x > 0.0 && x < 1.0;
    case SpaceKind::RealLine: return true;
    default: return false;
  }
}

inline bool contains(const Space& s, std::int64_t x) {
  switch (s.kind) {
    case SpaceKind::Integers: return true;
    case SpaceKind::NonNegIntegers: return x >= 0;
    case SpaceKind::ThreePointSet: return x >= -1 && x <= 1;
    default: return false;
  }
}

inline bool contains(const Space& s, const BernoulliUnit& x) {
  return s.kind == SpaceKind::BernoulliCrossUnit && (x.coin == 0 || x.coin == 1) && x.unit > 0.0 &&
         x.unit < 1.0;
}

/// Symmetric with smallest eigenvalue above -1e-10 (relative to the norm).
template <int D>
bool contains(const Space& s, const SpdMatrix<D>& x) {
  if (s.kind != SpaceKind::Spd || s.dim != D) return false;
  if (!x.allFinite()) return false;
  const double scale = std::max(1.0, x.norm());
  if ((x - x.transpose()).norm() > 1e-10 * scale) return false;
  Eigen::SelfAdjointEigenSolver<SpdMatrix<D>> es(x, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > -1e-10 * scale;
}

// ---------------------------------------------------------------------------
// Distances used by round-trip and reconstruction checks
// ---------------------------------------------------------------------------

inline double deviation(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline double deviation(std::int64_t a, std::int64_t b) {
  return static_cast<double>(a > b ? a - b : b - a);
}

inline double deviation(const BernoulliUnit& a, const BernoulliUnit& b) {
  if (a.coin != b.coin) return 1.0;
  return deviation(a.unit, b.unit);
}

/// Frobenius distance relative to max(1, |b|_F).
template <int D>
double deviation(const SpdMatrix<D>& a, const SpdMatrix<D>& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// Point equality used for "y = x" decisions: exact on integers, 1e-9 relative otherwise.
template <class T>
bool same_point(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, std::int64_t>) {
    return a == b;
  } else {
    return deviation(a, b) <= 1e-9;
  }
}

}  // namespace revip
