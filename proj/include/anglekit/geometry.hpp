#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "anglekit/errors.hpp"
#include "anglekit/rng.hpp"

namespace anglekit {

inline constexpr double kPi = std::numbers::pi;

/// Degeneracy filter: every inner angle must lie in [min_angle, pi - min_angle].
inline constexpr double kDefaultMinAngle = 1e-3;

using Vec2 = Eigen::Vector2d;

/// An ordered set of N planar points. The embedding dimension is fixed to 2.
/// Validity (distinctness, non-degenerate angles) is checked by the operations
/// that need it, not at construction, so intermediate results (e.g. noisy
/// reconstructions) can be represented.
struct PointSet {
  static constexpr int kDim = 2;

  std::vector<Vec2> points;

  PointSet() = default;
  explicit PointSet(std::vector<Vec2> pts) : points(std::move(pts)) {}

  int size() const { return static_cast<int>(points.size()); }
  Vec2& operator[](int i) { return points[static_cast<std::size_t>(i)]; }
  const Vec2& operator[](int i) const { return points[static_cast<std::size_t>(i)]; }

  /// N x 2 coordinate matrix, one point per row.
  Eigen::MatrixXd as_matrix() const {
    Eigen::MatrixXd m(size(), 2);
    for (int i = 0; i < size(); ++i) m.row(i) = points[static_cast<std::size_t>(i)].transpose();
    return m;
  }

  static PointSet from_matrix(const Eigen::MatrixXd& m) {
    if (m.cols() != 2) throw InvalidSizeError("PointSet::from_matrix: expected 2 columns");
    PointSet p;
    p.points.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) p.points.emplace_back(m(i, 0), m(i, 1));
    return p;
  }
};

/// Number of angle triplets for N points: M = N(N-1)(N-2)/2.
inline std::int64_t triplet_count(int n_points) {
  if (n_points < 3)
    throw InvalidSizeError("triplet_count: need at least 3 points, got " + std::to_string(n_points));
  const std::int64_t n = n_points;
  return n * (n - 1) * (n - 2) / 2;
}

/// Free parameters of an N-point set in dimension d modulo rotation,
/// translation, reflection and scale: N*d - d(d+1)/2 - 1.
inline int dof(int n_points, int dim) {
  if (n_points < 3) throw InvalidSizeError("dof: need at least 3 points");
  if (dim < 2) throw InvalidSizeError("dof: dimension must be at least 2");
  return n_points * dim - dim * (dim + 1) / 2 - 1;
}

struct Triplet {
  int vertex;  ///< i, where the angle is measured
  int first;   ///< j
  int second;  ///< k, with first < second

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Canonical bijection between angle triplets (i, {j, k}) and positions
/// 0..M-1: ascending in the vertex i, then lexicographic in (j, k) with j < k.
class TripletIndexer {
 public:
  explicit TripletIndexer(int n_points) : n_(n_points) {
    if (n_ < 3)
      throw InvalidSizeError("TripletIndexer: need at least 3 points, got " + std::to_string(n_));
    block_ = (n_ - 1) * (n_ - 2) / 2;  // angles per vertex
  }

  int n_points() const { return n_; }
  int count() const { return n_ * block_; }  // M

  int index_of(int i, int j, int k) const {
    validate_triplet(i, j, k);
    if (j > k) std::swap(j, k);
    // Relabel j, k in {0..n-2} with i removed; order is preserved.
    const int u = j > i ? j - 1 : j;
    const int v = k > i ? k - 1 : k;
    const int w = n_ - 1;
    const int pair_rank = u * w - u * (u + 1) / 2 + (v - u - 1);
    return i * block_ + pair_rank;
  }

  Triplet triplet_of(int m) const {
    if (m < 0 || m >= count())
      throw IndexError("TripletIndexer: angle index " + std::to_string(m) + " out of range");
    const int i = m / block_;
    int r = m % block_;
    const int w = n_ - 1;
    int u = 0;
    while (r >= w - 1 - u) {
      r -= w - 1 - u;
      ++u;
    }
    const int v = u + 1 + r;
    const auto restore = [i](int x) { return x >= i ? x + 1 : x; };
    return Triplet{i, restore(u), restore(v)};
  }

  friend bool operator==(const TripletIndexer& a, const TripletIndexer& b) {
    return a.n_ == b.n_;
  }

 private:
  void validate_triplet(int i, int j, int k) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || k < 0 || k >= n_)
      throw IndexError("TripletIndexer: node index out of range");
    if (i == j || i == k || j == k)
      throw IndexError("TripletIndexer: triplet indices must be distinct");
  }

  int n_;
  int block_;
};

/// All M inner angles of a point set, stacked in canonical triplet order.
struct AngleVector {
  TripletIndexer indexer;
  Eigen::VectorXd values;

  explicit AngleVector(int n_points)
      : indexer(n_points), values(Eigen::VectorXd::Zero(indexer.count())) {}

  AngleVector(TripletIndexer idx, Eigen::VectorXd vals)
      : indexer(idx), values(std::move(vals)) {
    if (values.size() != indexer.count())
      throw InvalidSizeError("AngleVector: expected " + std::to_string(indexer.count()) +
                             " angles, got " + std::to_string(values.size()));
  }

  int n_points() const { return indexer.n_points(); }
  int size() const { return static_cast<int>(values.size()); }

  double at(int i, int j, int k) const { return values[indexer.index_of(i, j, k)]; }
  double& at(int i, int j, int k) { return values[indexer.index_of(i, j, k)]; }
};

/// Undirected inner angle at `at` between the rays toward `toward_a` and
/// `toward_b`, in [0, pi]. The cosine is clamped to [-1, 1] before acos.
inline double inner_angle(const Vec2& at, const Vec2& toward_a, const Vec2& toward_b) {
  const Vec2 u = toward_a - at;
  const Vec2 v = toward_b - at;
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0)
    throw DegenerateGeometryError("inner_angle: coincident points");
  const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  return std::acos(c);
}

/// Extracts all M angles without any degeneracy check. Used on reconstructed
/// point sets that may sit close to a degenerate configuration.
inline AngleVector extract_angles_unchecked(const PointSet& p) {
  AngleVector out(p.size());
  const int m = out.size();
  for (int a = 0; a < m; ++a) {
    const Triplet t = out.indexer.triplet_of(a);
    out.values[a] = inner_angle(p[t.vertex], p[t.first], p[t.second]);
  }
  return out;
}

/// True when some angle of `p` leaves [min_angle, pi - min_angle] or two
/// points coincide.
inline bool point_set_is_degenerate(const PointSet& p, double min_angle = kDefaultMinAngle) {
  if (p.size() < 3) return true;
  const TripletIndexer idx(p.size());
  for (int a = 0; a < idx.count(); ++a) {
    const Triplet t = idx.triplet_of(a);
    const Vec2 u = p[t.first] - p[t.vertex];
    const Vec2 v = p[t.second] - p[t.vertex];
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return true;
    const double ang = std::acos(std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0));
    if (ang < min_angle || ang > kPi - min_angle) return true;
  }
  return false;
}

/// Extracts all M angles of a non-degenerate point set, in canonical order.
/// Invariant under similarity transforms of `p`.
inline AngleVector extract_angles(const PointSet& p, double min_angle = kDefaultMinAngle) {
  if (p.size() < 3) throw InvalidSizeError("extract_angles: need at least 3 points");
  if (point_set_is_degenerate(p, min_angle))
    throw DegenerateGeometryError("extract_angles: angle outside [min_angle, pi - min_angle]");
  return extract_angles_unchecked(p);
}

/// Per-node circular order of edges toward the other nodes. Two point sets
/// share a class iff every node sees the others in the same circular sequence.
/// Stored canonically: each cycle rotated so its smallest entry comes first,
/// and the orientation (all cycles jointly reversed or not) chosen to make the
/// whole representation lexicographically smallest. Inner angles cannot
/// distinguish a point set from its mirror image, so reflected sets map to the
/// same canonical form.
struct EquivalencyClass {
  std::vector<std::vector<int>> cycles;

  /// Witness embedding the class was computed from. Constraint construction
  /// evaluates branch choices on it. Not part of the class identity.
  PointSet representative;

  /// Per node, the adjacent edge pairs whose empty arc exceeds pi (at most
  /// one per node). A class splits into connected chambers; the cycles alone
  /// do not fix which node sits inside the hull of the others, but the
  /// linear constraint branches depend on exactly that. Not part of class
  /// identity; see same_chamber().
  std::vector<std::vector<std::pair<int, int>>> reflex_pairs;

  int n_points() const { return static_cast<int>(cycles.size()); }

  friend bool operator==(const EquivalencyClass& a, const EquivalencyClass& b) {
    return a.cycles == b.cycles;
  }
};

/// True when both classes agree including the reflex-gap structure, i.e. the
/// embeddings live in the same connected chamber and therefore satisfy the
/// same linear constraint matrix.
inline bool same_chamber(const EquivalencyClass& a, const EquivalencyClass& b) {
  return a.cycles == b.cycles && a.reflex_pairs == b.reflex_pairs;
}

namespace detail {

inline std::vector<int> rotate_min_first(std::vector<int> cycle) {
  const auto it = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), it, cycle.end());
  return cycle;
}

inline std::vector<std::vector<int>> canonical_cycles(const std::vector<std::vector<int>>& raw) {
  std::vector<std::vector<int>> fwd;
  std::vector<std::vector<int>> rev;
  fwd.reserve(raw.size());
  rev.reserve(raw.size());
  for (const auto& c : raw) {
    fwd.push_back(rotate_min_first(c));
    std::vector<int> r(c.rbegin(), c.rend());
    rev.push_back(rotate_min_first(std::move(r)));
  }
  return std::min(fwd, rev);
}

}  // namespace detail

/// Computes the equivalency class of `p`: at every node, the other nodes in
/// circular clockwise bearing order, canonicalized as described above.
inline EquivalencyClass equivalency_class(const PointSet& p) {
  const int n = p.size();
  if (n < 3) throw InvalidSizeError("equivalency_class: need at least 3 points");

  constexpr double kBearingTieTol = 1e-12;
  std::vector<std::vector<int>> raw(static_cast<std::size_t>(n));
  std::vector<std::vector<std::pair<int, int>>> reflex(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> order;
    order.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec2 e = p[j] - p[i];
      if (e.norm() == 0.0)
        throw DegenerateGeometryError("equivalency_class: coincident points " +
                                      std::to_string(i) + ", " + std::to_string(j));
      order.emplace_back(std::atan2(e.y(), e.x()), j);
    }
    // Clockwise = descending bearing.
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t t = 0; t < order.size(); ++t) {
      const std::size_t s = (t + 1) % order.size();
      double gap = order[t].first - order[s].first;
      if (s == 0) gap += 2.0 * kPi;  // wrap-around gap
      if (gap < kBearingTieTol)
        throw DegenerateGeometryError("equivalency_class: tied bearings at node " +
                                      std::to_string(i));
      if (gap > kPi)
        reflex[static_cast<std::size_t>(i)].push_back(
            {std::min(order[t].second, order[s].second),
             std::max(order[t].second, order[s].second)});
    }
    std::sort(reflex[static_cast<std::size_t>(i)].begin(), reflex[static_cast<std::size_t>(i)].end());
    raw[static_cast<std::size_t>(i)].reserve(order.size());
    for (const auto& [bearing, j] : order) raw[static_cast<std::size_t>(i)].push_back(j);
  }

  EquivalencyClass cls;
  cls.cycles = detail::canonical_cycles(raw);
  cls.representative = p;
  cls.reflex_pairs = std::move(reflex);
  return cls;
}

/// Samples N points i.i.d. uniform on [0, side_length]^2, rejecting whole
/// sets that fail the min-angle filter. Deterministic for a fixed seed.
inline PointSet random_point_set(int n_points, double side_length, std::uint64_t seed,
                                 double min_angle = kDefaultMinAngle) {
  if (n_points < 3) throw InvalidSizeError("random_point_set: need at least 3 points");
  if (side_length <= 0.0) throw InvalidArgumentError("random_point_set: side_length must be positive");

  constexpr int kBudget = 10000;
  Rng rng(seed);
  for (int attempt = 0; attempt < kBudget; ++attempt) {
    PointSet p;
    p.points.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i)
      p.points.emplace_back(rng.uniform(0.0, side_length), rng.uniform(0.0, side_length));
    if (!point_set_is_degenerate(p, min_angle)) return p;
  }
  throw SamplingFailureError("random_point_set: no non-degenerate sample within " +
                             std::to_string(kBudget) + " attempts");
}

/// Measurement counts of the sequential build-up reconstruction.
struct MeasurementCount {
  /// Closed-form count N(d+1) - d(d+1)/2 + d.
  std::int64_t closed_form;
  /// Angles the build-up routine actually reads: 2 + 3(N-3) for d = 2.
  /// The closed form overcounts the sequential procedure by 2(d+1).
  std::int64_t consumed;
};

inline MeasurementCount min_measurement_count(int n_points, int dim = 2) {
  if (dim < 2) throw InvalidSizeError("min_measurement_count: dimension must be at least 2");
  if (n_points < dim + 1)
    throw InvalidSizeError("min_measurement_count: need at least d+1 points");
  const std::int64_t n = n_points;
  const std::int64_t d = dim;
  MeasurementCount out{};
  out.closed_form = n * (d + 1) - d * (d + 1) / 2 + d;
  out.consumed = (d * (d + 1) / 2 - 1) + (n - d - 1) * (d + 1);
  return out;
}

}  // namespace anglekit
