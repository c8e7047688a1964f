#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "anglekit/errors.hpp"
#include "anglekit/geometry.hpp"

namespace anglekit {

/// Provenance of one constraint row.
struct RowTag {
  enum class Kind { Single, Triangle, Learned };

  Kind kind = Kind::Single;
  int node = -1;    // Single: node whose cycle the run lives on
  int start = -1;   // Single: first gap of the run in the canonical cycle
  int length = -1;  // Single: number of gaps in the run
  int i = -1, j = -1, k = -1;  // Triangle corners
  int index = -1;              // Learned row index

  static RowTag single(int node, int start, int length) {
    RowTag t;
    t.kind = Kind::Single;
    t.node = node;
    t.start = start;
    t.length = length;
    return t;
  }
  static RowTag triangle(int i, int j, int k) {
    RowTag t;
    t.kind = Kind::Triangle;
    t.i = i;
    t.j = j;
    t.k = k;
    return t;
  }
  static RowTag learned(int index) {
    RowTag t;
    t.kind = Kind::Learned;
    t.index = index;
    return t;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Single:
        return "single(" + std::to_string(node) + "," + std::to_string(start) + "," +
               std::to_string(length) + ")";
      case Kind::Triangle:
        return "triangle(" + std::to_string(i) + "," + std::to_string(j) + "," +
               std::to_string(k) + ")";
      case Kind::Learned:
        return "learned(" + std::to_string(index) + ")";
    }
    return "unknown";
  }
};

/// One linear constraint: sum of coeff * theta[index] = rhs.
struct ConstraintRow {
  std::vector<std::pair<int, double>> coeffs;  // (angle index, coefficient), index-sorted
  double rhs = 0.0;
  RowTag tag;

  double evaluate(const Eigen::VectorXd& theta) const {
    double s = -rhs;
    for (const auto& [idx, c] : coeffs) s += c * theta[idx];
    return s;
  }
};

/// Linear system A theta = b with per-row provenance. Analytic rows have
/// coefficients in {-1, 0, +1} and rhs in {0, pi, 2 pi}; learned rows are
/// dense. Rows are linearly independent after assembly.
struct LinearConstraintSystem {
  int n_points = 0;
  int n_angles = 0;  // M
  Eigen::MatrixXd a_matrix;  // L x M
  Eigen::VectorXd b_vector;  // L
  std::vector<RowTag> row_tags;

  // Assembly / learning diagnostics.
  int candidate_rows = 0;
  int achieved_rank = 0;     // rank of the candidate stack before truncation
  bool rank_deficit = false; // achieved_rank fell short of the requested target
  double svd_gap = 0.0;      // learned: sigma(last kept) / sigma(first null)
  bool ill_separated = false;

  int rows() const { return static_cast<int>(a_matrix.rows()); }

  Eigen::VectorXd residual(const AngleVector& theta) const {
    if (theta.size() != n_angles)
      throw IndexError("LinearConstraintSystem: angle vector size mismatch");
    if (rows() == 0) return Eigen::VectorXd::Zero(0);
    return a_matrix * theta.values - b_vector;
  }

  double max_violation(const AngleVector& theta) const {
    const Eigen::VectorXd r = residual(theta);
    return r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>();
  }

  /// Subsystem of the first `count` rows, preserving order and tags.
  LinearConstraintSystem prefix(int count) const {
    if (count < 0 || count > rows())
      throw IndexError("LinearConstraintSystem::prefix: count out of range");
    LinearConstraintSystem out = *this;
    out.a_matrix = a_matrix.topRows(count);
    out.b_vector = b_vector.head(count);
    out.row_tags.assign(row_tags.begin(), row_tags.begin() + count);
    return out;
  }
};

/// The classical linear rank target M - DOF - K. For N >= 5 the generator
/// spans more than this (see chamber_rank); kept as the reference count and
/// as the learning-size knob some callers request.
inline int linear_rank_target(int n_points) {
  const std::int64_t m = triplet_count(n_points);
  const std::int64_t k = n_points < 4 ? 0
                                      : static_cast<std::int64_t>(n_points) * (n_points - 1) *
                                            (n_points - 2) * (n_points - 3) / 24;
  return static_cast<int>(m - dof(n_points, 2) - k);
}

/// Number of independent linear constraints valid on one chamber:
/// C(N-1,2) - (N-2) single-node relations per node plus C(N-1,2) anchored
/// triangle rows, all independent. Equals linear_rank_target for N <= 4 and
/// exceeds it from N = 5 on. Using the full span is what makes the feasible
/// set of linear + quad constraints coincide locally with the realizable
/// manifold.
inline int chamber_rank(int n_points) {
  if (n_points < 3) throw InvalidSizeError("chamber_rank: need at least 3 points");
  const int pairs = (n_points - 1) * (n_points - 2) / 2;  // C(N-1, 2)
  return n_points * (pairs - (n_points - 2)) + pairs;
}

/// Single-node constraints: at each node, contiguous runs of adjacent-gap
/// angles sum to the enclosing measured angle, or together with it to 2 pi,
/// or (full wrap) to 2 pi alone. Which branch holds depends only on the
/// equivalency class; it is decided by evaluating both candidates on the
/// class representative. Runs whose gap sum has no measured counterpart
/// (they straddle a reflex gap) satisfy neither branch and are dropped.
inline std::vector<ConstraintRow> build_single_constraints(const EquivalencyClass& cls) {
  const int n = cls.n_points();
  if (n < 3) throw IndexError("build_single_constraints: class has fewer than 3 nodes");
  if (cls.representative.size() != n)
    throw IndexError("build_single_constraints: class lacks a usable representative");
  for (const auto& c : cls.cycles)
    if (static_cast<int>(c.size()) != n - 1)
      throw IndexError("build_single_constraints: cycle length inconsistent with N");

  constexpr double kBranchTol = 1e-9;
  const TripletIndexer idx(n);
  const AngleVector rep = extract_angles_unchecked(cls.representative);

  std::vector<ConstraintRow> rows;
  std::map<std::vector<std::pair<int, double>>, double> seen;  // dedupe identical rows

  const auto push_row = [&](std::vector<std::pair<int, double>> coeffs, double rhs, RowTag tag) {
    std::sort(coeffs.begin(), coeffs.end());
    const auto it = seen.find(coeffs);
    if (it != seen.end() && std::abs(it->second - rhs) < 1e-12) return;
    seen.emplace(coeffs, rhs);
    rows.push_back(ConstraintRow{std::move(coeffs), rhs, tag});
  };

  for (int node = 0; node < n; ++node) {
    const std::vector<int>& cycle = cls.cycles[static_cast<std::size_t>(node)];
    const int g = n - 1;  // gaps between cyclically adjacent edges
    if (g < 3) continue;  // two edges admit no decomposition

    std::vector<int> gap_index(static_cast<std::size_t>(g));
    for (int t = 0; t < g; ++t)
      gap_index[static_cast<std::size_t>(t)] =
          idx.index_of(node, cycle[static_cast<std::size_t>(t)],
                       cycle[static_cast<std::size_t>((t + 1) % g)]);

    for (int len = 2; len < g; ++len) {
      for (int start = 0; start < g; ++start) {
        std::vector<std::pair<int, double>> coeffs;
        double sum = 0.0;
        coeffs.reserve(static_cast<std::size_t>(len) + 1);
        for (int t = 0; t < len; ++t) {
          const int gi = gap_index[static_cast<std::size_t>((start + t) % g)];
          coeffs.emplace_back(gi, 1.0);
          sum += rep.values[gi];
        }
        const int enclosing = idx.index_of(node, cycle[static_cast<std::size_t>(start)],
                                           cycle[static_cast<std::size_t>((start + len) % g)]);
        const double enc = rep.values[enclosing];
        if (std::abs(sum - enc) <= kBranchTol) {
          auto c = coeffs;
          c.emplace_back(enclosing, -1.0);
          push_row(std::move(c), 0.0, RowTag::single(node, start, len));
        } else if (std::abs(sum + enc - 2.0 * kPi) <= kBranchTol) {
          auto c = coeffs;
          c.emplace_back(enclosing, 1.0);
          push_row(std::move(c), 2.0 * kPi, RowTag::single(node, start, len));
        }
      }
    }

    // Full wrap: all gaps sum to 2 pi, valid when no gap is reflex.
    double wrap_sum = 0.0;
    std::vector<std::pair<int, double>> wrap;
    wrap.reserve(static_cast<std::size_t>(g));
    for (int t = 0; t < g; ++t) {
      wrap.emplace_back(gap_index[static_cast<std::size_t>(t)], 1.0);
      wrap_sum += rep.values[gap_index[static_cast<std::size_t>(t)]];
    }
    if (std::abs(wrap_sum - 2.0 * kPi) <= kBranchTol)
      push_row(std::move(wrap), 2.0 * kPi, RowTag::single(node, 0, g));
  }
  return rows;
}

/// Triangle constraints anchored at node 0: for every pair j < k of other
/// nodes, the three inner angles of triangle (0, j, k) sum to pi. Exactly
/// C(N-1, 2) rows.
inline std::vector<ConstraintRow> build_triangle_constraints(int n_points) {
  if (n_points < 3) throw InvalidSizeError("build_triangle_constraints: need at least 3 points");
  const TripletIndexer idx(n_points);
  std::vector<ConstraintRow> rows;
  rows.reserve(static_cast<std::size_t>((n_points - 1) * (n_points - 2) / 2));
  for (int j = 1; j < n_points; ++j) {
    for (int k = j + 1; k < n_points; ++k) {
      ConstraintRow r;
      r.coeffs = {{idx.index_of(0, j, k), 1.0},
                  {idx.index_of(j, 0, k), 1.0},
                  {idx.index_of(k, 0, j), 1.0}};
      std::sort(r.coeffs.begin(), r.coeffs.end());
      r.rhs = kPi;
      r.tag = RowTag::triangle(0, j, k);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

namespace detail {

inline Eigen::MatrixXd densify_rows(const std::vector<ConstraintRow>& rows, int n_angles) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n_angles);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [idx, c] : rows[r].coeffs) {
      if (idx < 0 || idx >= n_angles)
        throw IndexError("constraint row references angle index out of range");
      m(static_cast<Eigen::Index>(r), idx) += c;
    }
  return m;
}

}  // namespace detail

/// Stacks candidate rows and keeps a maximal linearly independent subset,
/// scanning in the given order (single rows first, then triangle rows).
/// Independence is judged by Gram-Schmidt residual against the rows already
/// kept, with tolerance 1e-10 times the largest singular value of the
/// candidate stack. Rows are selected verbatim, never recombined. If more
/// than `target_rank` independent rows exist, only the first `target_rank`
/// are kept; if fewer, the result carries a rank-deficit flag.
inline LinearConstraintSystem assemble_linear_system(const TripletIndexer& indexer,
                                                     const std::vector<ConstraintRow>& single_rows,
                                                     const std::vector<ConstraintRow>& triangle_rows,
                                                     int target_rank) {
  const int m = indexer.count();
  std::vector<ConstraintRow> candidates;
  candidates.reserve(single_rows.size() + triangle_rows.size());
  candidates.insert(candidates.end(), single_rows.begin(), single_rows.end());
  candidates.insert(candidates.end(), triangle_rows.begin(), triangle_rows.end());

  LinearConstraintSystem sys;
  sys.n_points = indexer.n_points();
  sys.n_angles = m;
  sys.candidate_rows = static_cast<int>(candidates.size());

  if (candidates.empty()) {
    sys.a_matrix = Eigen::MatrixXd::Zero(0, m);
    sys.b_vector = Eigen::VectorXd::Zero(0);
    sys.rank_deficit = target_rank > 0;
    return sys;
  }

  const Eigen::MatrixXd dense = detail::densify_rows(candidates, m);
  const double sigma_max =
      Eigen::JacobiSVD<Eigen::MatrixXd>(dense).singularValues()(0);
  const double tol = std::max(1e-10 * sigma_max, 1e-300);

  std::vector<int> selected;
  std::vector<Eigen::VectorXd> basis;  // orthonormal span of selected rows
  for (int r = 0; r < static_cast<int>(candidates.size()); ++r) {
    Eigen::VectorXd v = dense.row(r).transpose();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) v -= q.dot(v) * q;
    if (v.norm() > tol) {
      selected.push_back(r);
      basis.push_back(v.normalized());
    }
  }

  sys.achieved_rank = static_cast<int>(selected.size());
  sys.rank_deficit = sys.achieved_rank < target_rank;
  const int keep = std::min(sys.achieved_rank, std::max(target_rank, 0));

  sys.a_matrix = Eigen::MatrixXd::Zero(keep, m);
  sys.b_vector = Eigen::VectorXd::Zero(keep);
  sys.row_tags.reserve(static_cast<std::size_t>(keep));
  for (int r = 0; r < keep; ++r) {
    const ConstraintRow& row = candidates[static_cast<std::size_t>(selected[static_cast<std::size_t>(r)])];
    sys.a_matrix.row(r) = dense.row(selected[static_cast<std::size_t>(r)]);
    sys.b_vector[r] = row.rhs;
    sys.row_tags.push_back(row.tag);
  }
  return sys;
}

/// Analytic linear system of an equivalency class at the full chamber rank.
inline LinearConstraintSystem build_linear_system(const EquivalencyClass& cls) {
  const TripletIndexer idx(cls.n_points());
  return assemble_linear_system(idx, build_single_constraints(cls),
                                build_triangle_constraints(cls.n_points()),
                                chamber_rank(cls.n_points()));
}

/// One quadrilateral; corners sorted ascending, `a` is the shared apex of the
/// three sub-triangles the sine-law product runs over.
struct Quad {
  int a, b, c, d;

  friend bool operator==(const Quad&, const Quad&) = default;
};

/// All C(N, 4) quadrilateral constraints, 4-subsets in lexicographic order.
struct QuadrilateralConstraintSet {
  int n_points = 0;
  std::vector<Quad> quads;

  int size() const { return static_cast<int>(quads.size()); }

  /// Subset of the first `count` quads, preserving order.
  QuadrilateralConstraintSet prefix(int count) const {
    if (count < 0 || count > size())
      throw IndexError("QuadrilateralConstraintSet::prefix: count out of range");
    QuadrilateralConstraintSet out;
    out.n_points = n_points;
    out.quads.assign(quads.begin(), quads.begin() + count);
    return out;
  }
};

inline QuadrilateralConstraintSet enumerate_quads(int n_points) {
  if (n_points < 3) throw InvalidSizeError("enumerate_quads: need at least 3 points");
  QuadrilateralConstraintSet set;
  set.n_points = n_points;
  for (int a = 0; a < n_points; ++a)
    for (int b = a + 1; b < n_points; ++b)
      for (int c = b + 1; c < n_points; ++c)
        for (int d = c + 1; d < n_points; ++d) set.quads.push_back(Quad{a, b, c, d});
  return set;
}

namespace detail {

/// Angle-vector positions of the six angles of a quad's sine-law product,
/// split into numerator and denominator triples.
struct QuadAngleIndices {
  int num[3];
  int den[3];
};

inline QuadAngleIndices quad_angle_indices(const TripletIndexer& idx, const Quad& q) {
  QuadAngleIndices out{};
  out.num[0] = idx.index_of(q.b, q.a, q.c);
  out.num[1] = idx.index_of(q.c, q.a, q.d);
  out.num[2] = idx.index_of(q.d, q.a, q.b);
  out.den[0] = idx.index_of(q.b, q.a, q.d);
  out.den[1] = idx.index_of(q.c, q.a, q.b);
  out.den[2] = idx.index_of(q.d, q.a, q.c);
  return out;
}

inline void check_quad_angles(const Eigen::VectorXd& theta, const QuadAngleIndices& qi) {
  for (int t = 0; t < 3; ++t) {
    for (const int m : {qi.num[t], qi.den[t]}) {
      const double a = theta[m];
      if (!(a > 0.0 && a < kPi))
        throw SingularConstraintError("quad constraint: involved angle at 0 or pi");
    }
  }
}

}  // namespace detail

/// Sine-law product residual of one quadrilateral:
///   sin th_b(a,c)/sin th_b(a,d) * sin th_c(a,d)/sin th_c(a,b)
///     * sin th_d(a,b)/sin th_d(a,c) - 1.
/// Zero exactly on realizable angle vectors.
inline double quad_residual(const AngleVector& theta, const Quad& q) {
  const auto qi = detail::quad_angle_indices(theta.indexer, q);
  detail::check_quad_angles(theta.values, qi);
  double p = 1.0;
  for (int t = 0; t < 3; ++t)
    p *= std::sin(theta.values[qi.num[t]]) / std::sin(theta.values[qi.den[t]]);
  return p - 1.0;
}

/// Gradient of quad_residual: with g = f + 1, df/dtheta = +cot(theta) g on
/// the three numerator angles and -cot(theta) g on the denominators; zero
/// elsewhere. Returned as (angle index, value) pairs sorted by index.
inline std::vector<std::pair<int, double>> quad_jacobian(const AngleVector& theta, const Quad& q) {
  const auto qi = detail::quad_angle_indices(theta.indexer, q);
  detail::check_quad_angles(theta.values, qi);
  double g = 1.0;
  for (int t = 0; t < 3; ++t)
    g *= std::sin(theta.values[qi.num[t]]) / std::sin(theta.values[qi.den[t]]);

  std::vector<std::pair<int, double>> grad;
  grad.reserve(6);
  for (int t = 0; t < 3; ++t) {
    const double an = theta.values[qi.num[t]];
    const double ad = theta.values[qi.den[t]];
    grad.emplace_back(qi.num[t], std::cos(an) / std::sin(an) * g);
    grad.emplace_back(qi.den[t], -std::cos(ad) / std::sin(ad) * g);
  }
  std::sort(grad.begin(), grad.end());
  return grad;
}

/// Max |f_k| over a quad set; 0 for an empty set.
inline double max_quad_violation(const AngleVector& theta, const QuadrilateralConstraintSet& quads) {
  double worst = 0.0;
  for (const Quad& q : quads.quads) worst = std::max(worst, std::abs(quad_residual(theta, q)));
  return worst;
}

}  // namespace anglekit
