#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "anglekit/errors.hpp"
#include "anglekit/geometry.hpp"

namespace anglekit {

/// p -> scale * Q * p + translation, Q orthogonal (reflections allowed).
struct SimilarityTransform {
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
  double scale = 1.0;
  Vec2 translation = Vec2::Zero();

  Vec2 apply(const Vec2& p) const { return scale * (rotation * p) + translation; }

  PointSet apply(const PointSet& p) const {
    PointSet out;
    out.points.reserve(p.points.size());
    for (const auto& q : p.points) out.points.push_back(apply(q));
    return out;
  }
};

/// Places the apex of a triangle over the base (p_i, p_j): the returned point
/// p satisfies angle(p_i; p_j, p) = alpha and angle(p_j; p_i, p) = beta, on
/// the left of the directed line p_i -> p_j when side_positive, else on the
/// right. Distance from p_i follows the sine law:
///   |p - p_i| = |p_j - p_i| sin(beta) / sin(alpha + beta).
inline Vec2 triangulate(const Vec2& p_i, const Vec2& p_j, double alpha, double beta,
                        bool side_positive) {
  if (!(alpha > 0.0 && alpha < kPi && beta > 0.0 && beta < kPi))
    throw InfeasibleTriangleError("triangulate: base angles must lie in (0, pi)");
  if (alpha + beta >= kPi)
    throw InfeasibleTriangleError("triangulate: base angles sum to pi or more");
  const Vec2 base = p_j - p_i;
  const double base_len = base.norm();
  if (base_len == 0.0) throw DegenerateGeometryError("triangulate: coincident base points");

  const double r = base_len * std::sin(beta) / std::sin(alpha + beta);
  const double rot = side_positive ? alpha : -alpha;
  const double ca = std::cos(rot);
  const double sa = std::sin(rot);
  const Vec2 dir(ca * base.x() - sa * base.y(), sa * base.x() + ca * base.y());
  return p_i + (r / base_len) * dir;
}

struct BuildUpOptions {
  /// Node whose angle settles mirror ambiguities (clamped to the highest
  /// already-placed index for early points).
  int disambiguation_node = 2;
};

/// Angle-vector positions read by build_up, in consumption order.
struct BuildUpTrace {
  std::vector<int> consumed;
};

/// Sequential reconstruction from a realizable (or approximately realizable)
/// angle vector: p_0 = (0,0), p_1 = (1,0), p_2 above the base line from two
/// angles; every later point from its two base angles plus a third angle at
/// the disambiguation node that picks between the mirror candidates.
inline PointSet build_up(const AngleVector& theta, const BuildUpOptions& options = {},
                         BuildUpTrace* trace = nullptr) {
  const int n = theta.n_points();
  if (options.disambiguation_node < 2 || options.disambiguation_node >= n)
    throw IndexError("build_up: disambiguation node out of range");

  const auto read = [&](int i, int j, int k) {
    const int idx = theta.indexer.index_of(i, j, k);
    if (trace != nullptr) trace->consumed.push_back(idx);
    return theta.values[idx];
  };

  PointSet out;
  out.points.assign(static_cast<std::size_t>(n), Vec2::Zero());
  out[0] = Vec2(0.0, 0.0);
  out[1] = Vec2(1.0, 0.0);

  try {
    out[2] = triangulate(out[0], out[1], read(0, 1, 2), read(1, 0, 2), true);
  } catch (const InfeasibleTriangleError& e) {
    throw ReconstructionFailureError(std::string("build_up: point 2: ") + e.what());
  }

  for (int node = 3; node < n; ++node) {
    const double alpha = read(0, 1, node);
    const double beta = read(1, 0, node);
    Vec2 up, down;
    try {
      up = triangulate(out[0], out[1], alpha, beta, true);
      down = triangulate(out[0], out[1], alpha, beta, false);
    } catch (const InfeasibleTriangleError& e) {
      throw ReconstructionFailureError("build_up: point " + std::to_string(node) + ": " +
                                       e.what());
    }
    const int dis = std::min(options.disambiguation_node, node - 1);
    const double want = read(dis, 0, node);
    const auto mismatch = [&](const Vec2& cand) {
      try {
        return std::abs(inner_angle(out[dis], out[0], cand) - want);
      } catch (const DegenerateGeometryError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    out[node] = mismatch(up) <= mismatch(down) ? up : down;
  }
  return out;
}

struct ProcrustesResult {
  SimilarityTransform transform;  // maps the estimate onto the reference
  double mse = 0.0;               // mean squared error per point after alignment
};

/// Least-squares similarity alignment of `estimate` onto `reference`:
/// minimizes sum ||s Q x_i + t - y_i||^2 over orthogonal Q (reflections
/// allowed), scale s > 0 (fixed to 1 unless allow_scale) and translation t.
inline ProcrustesResult procrustes_align(const PointSet& estimate, const PointSet& reference,
                                         bool allow_scale) {
  const int n = estimate.size();
  if (n != reference.size() || n < 2)
    throw InvalidSizeError("procrustes_align: point sets must have equal size >= 2");

  Vec2 mean_x = Vec2::Zero(), mean_y = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    mean_x += estimate[i];
    mean_y += reference[i];
  }
  mean_x /= n;
  mean_y /= n;

  Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
  double spread_x = 0.0;
  double spread_y = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 xc = estimate[i] - mean_x;
    const Vec2 yc = reference[i] - mean_y;
    cross += yc * xc.transpose();
    spread_x += xc.squaredNorm();
    spread_y += yc.squaredNorm();
  }
  if (spread_x <= 0.0)
    throw DegenerateAlignmentError("procrustes_align: estimate has no spread");
  if (allow_scale && spread_y <= 0.0)
    throw DegenerateAlignmentError("procrustes_align: reference has no spread");

  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix2d q = svd.matrixU() * svd.matrixV().transpose();
  const double trace = svd.singularValues().sum();

  ProcrustesResult res;
  res.transform.rotation = q;
  res.transform.scale = allow_scale ? trace / spread_x : 1.0;
  if (allow_scale && !(res.transform.scale > 0.0))
    throw DegenerateAlignmentError("procrustes_align: non-positive optimal scale");
  res.transform.translation = mean_y - res.transform.scale * (q * mean_x);

  double err = 0.0;
  for (int i = 0; i < n; ++i) err += (res.transform.apply(estimate[i]) - reference[i]).squaredNorm();
  res.mse = err / n;
  return res;
}

/// Mean absolute difference between a denoised angle vector and the angles
/// re-extracted from the reconstructed points, over all M entries.
inline double discrepancy(const AngleVector& denoised, const PointSet& reconstructed) {
  if (reconstructed.size() != denoised.n_points())
    throw InvalidSizeError("discrepancy: sizes are inconsistent");
  const AngleVector re = extract_angles_unchecked(reconstructed);
  return (denoised.values - re.values).cwiseAbs().mean();
}

/// Squared pairwise distances.
struct DistanceMatrix {
  Eigen::MatrixXd squared;

  int size() const { return static_cast<int>(squared.rows()); }

  static DistanceMatrix from_points(const PointSet& p) {
    DistanceMatrix d;
    d.squared = Eigen::MatrixXd::Zero(p.size(), p.size());
    for (int i = 0; i < p.size(); ++i)
      for (int j = i + 1; j < p.size(); ++j) {
        const double v = (p[i] - p[j]).squaredNorm();
        d.squared(i, j) = v;
        d.squared(j, i) = v;
      }
    return d;
  }
};

struct MdsResult {
  PointSet points;
  Eigen::VectorXd eigenvalues;  // top-d eigenvalues of the Gram matrix
  int positive_count = 0;       // how many of them are positive
  bool rank_deficit = false;    // fewer than d positive: zero-padded coordinates
};

/// Classic multidimensional scaling: G = -1/2 J D J with the geometric
/// centering matrix J = I - (1/N) 1 1^T; embeds with the top-d eigenpairs,
/// clamping negative eigenvalues to zero.
inline MdsResult classic_mds(const DistanceMatrix& d, int dim = 2) {
  const int n = d.size();
  if (n < 1 || d.squared.cols() != n) throw InvalidSizeError("classic_mds: matrix must be square");
  if (dim < 1) throw InvalidSizeError("classic_mds: dimension must be positive");
  for (int i = 0; i < n; ++i) {
    if (d.squared(i, i) != 0.0)
      throw InvalidArgumentError("classic_mds: diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (d.squared(i, j) < 0.0) throw InvalidArgumentError("classic_mds: negative entry");
      if (std::abs(d.squared(i, j) - d.squared(j, i)) > 1e-9 * (1.0 + std::abs(d.squared(i, j))))
        throw InvalidArgumentError("classic_mds: matrix must be symmetric");
    }
  }

  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  Eigen::MatrixXd gram = -0.5 * j * d.squared * j;
  gram = 0.5 * (gram + gram.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalFailureError("classic_mds: eigendecomposition failed");

  MdsResult res;
  res.eigenvalues = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, std::max(dim, 2));
  const double lambda_max = eig.eigenvalues()[n - 1];
  const double positive_floor = 1e-12 * std::max(lambda_max, 0.0);
  for (int c = 0; c < dim; ++c) {
    const int src = n - 1 - c;  // eigenvalues come back ascending
    if (src < 0) break;
    const double lambda = eig.eigenvalues()[src];
    res.eigenvalues[c] = lambda;
    if (lambda > positive_floor && lambda > 0.0) {
      coords.col(c) = std::sqrt(lambda) * eig.eigenvectors().col(src);
      ++res.positive_count;
    }
  }
  res.rank_deficit = res.positive_count < dim;

  res.points.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) res.points.points.emplace_back(coords(i, 0), coords(i, 1));
  return res;
}

}  // namespace anglekit
