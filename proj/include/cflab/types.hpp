#pragma once

#include <eigen3/Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cflab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Per-coordinate angular mask. True entries live on R/Z.
using AngularMask = std::vector<char>;

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotPeriodicError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TimeoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotImplementedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Step-size underflow. Carries the last state the controller accepted.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double t, Vec y)
      : std::runtime_error(what), time(t), last_state(std::move(y)) {}
  double time;
  Vec last_state;
};

// ---------------------------------------------------------------------------
// Angular coordinate helpers
// ---------------------------------------------------------------------------

inline double wrap_unit(double x) {
  double y = x - std::floor(x);
  return y >= 1.0 ? 0.0 : y;
}

/// Min-image distance on R/Z.
inline double circle_dist(double a, double b) {
  double d = wrap_unit(a - b);
  return d > 0.5 ? 1.0 - d : d;
}

inline Vec wrap_angles(Vec x, const AngularMask& angular) {
  for (int i = 0; i < x.size(); ++i)
    if (angular[static_cast<size_t>(i)]) x[i] = wrap_unit(x[i]);
  return x;
}

/// Euclidean distance with min-image metric on the angular coordinates.
inline double chart_distance(const Vec& a, const Vec& b, const AngularMask& angular) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double d = angular[static_cast<size_t>(i)] ? circle_dist(a[i], b[i]) : a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// A point of a model manifold in its global chart.
struct ChartPoint {
  Vec coords;
  AngularMask periodic_mask;

  ChartPoint() = default;
  ChartPoint(Vec c, AngularMask m) : coords(std::move(c)), periodic_mask(std::move(m)) {
    if (coords.size() != static_cast<Eigen::Index>(periodic_mask.size()))
      throw ConfigError("ChartPoint: coords and periodic mask length mismatch");
  }

  void normalize() { coords = wrap_angles(coords, periodic_mask); }
  ChartPoint normalized() const {
    ChartPoint p = *this;
    p.normalize();
    return p;
  }
  double distance_to(const ChartPoint& other) const {
    return chart_distance(coords, other.coords, periodic_mask);
  }
};

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64). Same stream on every platform; the seed is
// recorded in every report that consumed randomness.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double m = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = m * std::sin(a);
    have_spare_ = true;
    return m * std::cos(a);
  }

  /// Uniform point on S^{n-1} as an ambient unit vector.
  Vec unit_vector(int n) {
    Vec v(n);
    double norm = 0.0;
    do {
      for (int i = 0; i < n; ++i) v[i] = normal();
      norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a, used to fingerprint configs in output manifests.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace cflab
