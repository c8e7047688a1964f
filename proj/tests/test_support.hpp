#pragma once

// Shared helpers for the test suites. Oracles used to freeze expected values
// live here or inline in the tests; they must stay independent of the library
// code paths they check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "anglekit/geometry.hpp"
#include "anglekit/rng.hpp"

namespace testutil {

using anglekit::PointSet;
using anglekit::Vec2;

inline PointSet unit_square() {
  return PointSet{{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}};
}

inline PointSet equilateral_triangle() {
  return PointSet{{Vec2(0, 0), Vec2(1, 0), Vec2(0.5, std::sqrt(3.0) / 2.0)}};
}

/// Applies p -> scale * R(angle) * (reflect ? F * p : p) + t.
inline PointSet similarity_transform(const PointSet& p, double angle, double scale, Vec2 shift,
                                     bool reflect = false) {
  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  PointSet out;
  out.points.reserve(p.points.size());
  for (const auto& q : p.points) {
    Vec2 v = q;
    if (reflect) v.y() = -v.y();
    out.points.push_back(scale * (rot * v) + shift);
  }
  return out;
}

/// True when b equals a up to cyclic rotation (and reversal when allowed).
inline bool cyclic_equal(const std::vector<int>& a, const std::vector<int>& b,
                         bool allow_reverse) {
  if (a.size() != b.size()) return false;
  const auto matches = [&](const std::vector<int>& c) {
    for (std::size_t s = 0; s < c.size(); ++s) {
      bool ok = true;
      for (std::size_t t = 0; t < c.size(); ++t) {
        if (a[t] != c[(s + t) % c.size()]) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    return false;
  };
  if (matches(b)) return true;
  if (allow_reverse) {
    std::vector<int> r(b.rbegin(), b.rend());
    return matches(r);
  }
  return false;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testutil
