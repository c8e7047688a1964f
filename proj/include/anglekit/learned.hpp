#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cstdint>
#include <string>

#include "anglekit/constraints.hpp"
#include "anglekit/errors.hpp"
#include "anglekit/geometry.hpp"
#include "anglekit/rng.hpp"

namespace anglekit {

/// Stacked angle rows [theta_t^T, -1] of T point sets sharing one constraint
/// chamber. Null vectors of this matrix are the constraint rows [A | b].
struct SampleMatrix {
  EquivalencyClass cls;
  Eigen::MatrixXd rows;  // T x (M+1)

  int sample_count() const { return static_cast<int>(rows.rows()); }
  int n_angles() const { return static_cast<int>(rows.cols()) - 1; }
};

/// Draws T same-chamber point sets by Gaussian perturbation of the
/// representative (sigma = 0.05 x its bounding-box extent), rejecting
/// degenerate samples and samples that leave the representative's chamber.
/// Deterministic for a fixed seed.
inline SampleMatrix sample_class_angles(const EquivalencyClass& cls, const PointSet& representative,
                                        int t_samples, std::uint64_t seed,
                                        double min_angle = kDefaultMinAngle) {
  if (t_samples < 0) throw InvalidSizeError("sample_class_angles: negative sample count");
  const int n = cls.n_points();
  if (representative.size() != n)
    throw IndexError("sample_class_angles: representative size does not match class");
  if (!same_chamber(equivalency_class(representative), cls))
    throw InvalidArgumentError("sample_class_angles: representative not in the class chamber");

  const TripletIndexer idx(n);
  const int m = idx.count();

  SampleMatrix out;
  out.cls = cls;
  out.rows = Eigen::MatrixXd::Zero(t_samples, m + 1);
  if (t_samples == 0) return out;

  double min_x = representative[0].x(), max_x = min_x;
  double min_y = representative[0].y(), max_y = min_y;
  for (const auto& q : representative.points) {
    min_x = std::min(min_x, q.x());
    max_x = std::max(max_x, q.x());
    min_y = std::min(min_y, q.y());
    max_y = std::max(max_y, q.y());
  }
  const double sigma = 0.05 * std::max(max_x - min_x, max_y - min_y);

  constexpr int kBudget = 10000;
  Rng rng(seed);
  int accepted = 0;
  for (int attempt = 0; attempt < kBudget && accepted < t_samples; ++attempt) {
    PointSet q = representative;
    for (auto& pt : q.points) {
      pt.x() += rng.gaussian(sigma);
      pt.y() += rng.gaussian(sigma);
    }
    if (point_set_is_degenerate(q, min_angle)) continue;
    if (!same_chamber(equivalency_class(q), cls)) continue;
    const AngleVector theta = extract_angles_unchecked(q);
    out.rows.row(accepted).head(m) = theta.values.transpose();
    out.rows(accepted, m) = -1.0;
    ++accepted;
  }
  if (accepted < t_samples)
    throw SamplingFailureError(
        "sample_class_angles: accepted only " + std::to_string(accepted) + " of " +
        std::to_string(t_samples) + " samples; representative too close to a chamber boundary?");
  return out;
}

/// Learns [A | b] as the L_target right-singular vectors of the sample matrix
/// with smallest singular values (rows ordered smallest first). Reports the
/// boundary singular-value ratio sigma(last signal)/sigma(first null) as
/// `svd_gap`; a gap below 1e3 sets the ill-separated warning.
inline LinearConstraintSystem learn_constraints(const SampleMatrix& samples, int l_target) {
  if (l_target < 0) throw InvalidSizeError("learn_constraints: negative target");
  if (samples.sample_count() < l_target)
    throw InvalidSizeError("learn_constraints: need at least L_target samples, got " +
                           std::to_string(samples.sample_count()));
  const int m = samples.n_angles();

  LinearConstraintSystem sys;
  sys.n_points = samples.cls.n_points();
  sys.n_angles = m;
  sys.candidate_rows = samples.sample_count();
  sys.achieved_rank = l_target;
  sys.a_matrix = Eigen::MatrixXd::Zero(l_target, m);
  sys.b_vector = Eigen::VectorXd::Zero(l_target);
  if (l_target == 0) return sys;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(samples.rows, Eigen::ComputeFullV);
  const Eigen::MatrixXd& v = svd.matrixV();  // (M+1) x (M+1)
  const Eigen::VectorXd& sv = svd.singularValues();

  for (int l = 0; l < l_target; ++l) {
    const Eigen::VectorXd col = v.col(m - l);  // ascending singular value
    sys.a_matrix.row(l) = col.head(m).transpose();
    sys.b_vector[l] = col[m];
    sys.row_tags.push_back(RowTag::learned(l));
  }

  // Boundary between the smallest retained signal value and the largest
  // value inside the extracted null block.
  const int last_signal = m - l_target;
  const int first_null = last_signal + 1;
  if (last_signal >= 0 && first_null < static_cast<int>(sv.size()) && sv[first_null] > 0.0) {
    sys.svd_gap = sv[last_signal] / sv[first_null];
  } else if (last_signal >= 0 && first_null < static_cast<int>(sv.size())) {
    sys.svd_gap = std::numeric_limits<double>::infinity();
  } else {
    sys.svd_gap = 0.0;
  }
  sys.ill_separated = !(sys.svd_gap >= 1e3);
  return sys;
}

/// Default learned-system size: the full chamber rank, matching the analytic
/// assembly. At this size the null space is cleanly separated and the learned
/// row space coincides with the analytic one.
inline int default_learn_target(int n_points) { return chamber_rank(n_points); }

}  // namespace anglekit
