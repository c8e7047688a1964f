#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "anglekit/learned.hpp"
#include "test_support.hpp"

using namespace anglekit;

namespace {

// Oracle: count singular values below 1e-8 * sigma_max.
int small_singular_count(const Eigen::MatrixXd& rows) {
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(rows).singularValues();
  int count = static_cast<int>(rows.cols()) - static_cast<int>(sv.size());  // implicit zeros
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] < 1e-8 * sv[0]) ++count;
  return count;
}

Eigen::MatrixXd orthonormal_rowspace(const Eigen::MatrixXd& rows) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows.transpose(), Eigen::ComputeThinU);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
  return svd.matrixU().leftCols(rank);  // columns span the row space
}

// Largest principal angle between the row spaces of two systems [A | b].
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd qa = orthonormal_rowspace(a);
  const Eigen::MatrixXd qb = orthonormal_rowspace(b);
  REQUIRE(qa.cols() == qb.cols());
  const Eigen::VectorXd cosines =
      Eigen::JacobiSVD<Eigen::MatrixXd>(qa.transpose() * qb).singularValues();
  const double c = std::clamp(cosines.minCoeff(), -1.0, 1.0);
  return std::acos(c);
}

Eigen::MatrixXd augmented(const LinearConstraintSystem& sys) {
  Eigen::MatrixXd ab(sys.rows(), sys.n_angles + 1);
  ab.leftCols(sys.n_angles) = sys.a_matrix;
  ab.col(sys.n_angles) = sys.b_vector;
  return ab;
}

}  // namespace

TEST_CASE("sample_class_angles basics") {
  const PointSet p = random_point_set(4, 1.0, 61);
  const EquivalencyClass cls = equivalency_class(p);

  SECTION("T = 0 yields an empty matrix") {
    const SampleMatrix s = sample_class_angles(cls, p, 0, 1);
    CHECK(s.sample_count() == 0);
    CHECK(s.n_angles() == 12);
  }
  SECTION("every row satisfies the analytic system of the chamber") {
    // Oracle: the analytic constraint system built independently.
    const LinearConstraintSystem sys = build_linear_system(cls);
    const SampleMatrix s = sample_class_angles(cls, p, 40, 2);
    REQUIRE(s.sample_count() == 40);
    for (int t = 0; t < 40; ++t) {
      const AngleVector theta(TripletIndexer(4), s.rows.row(t).head(12).transpose());
      CHECK(sys.max_violation(theta) <= 1e-9);
      CHECK(s.rows(t, 12) == -1.0);
    }
  }
  SECTION("fixed seed reproduces the matrix bitwise") {
    const SampleMatrix a = sample_class_angles(cls, p, 25, 33);
    const SampleMatrix b = sample_class_angles(cls, p, 25, 33);
    CHECK(a.rows == b.rows);
  }
  SECTION("foreign representative is rejected") {
    const PointSet other = random_point_set(4, 1.0, 62);
    if (!same_chamber(equivalency_class(other), cls))
      CHECK_THROWS_AS(sample_class_angles(cls, other, 5, 1), InvalidArgumentError);
  }
}

TEST_CASE("learned null-space dimensions follow the chamber geometry") {
  // The sampled null dimension is the full chamber count (21 for N=5), which
  // exceeds the M - DOF - K learning target (19); see the N=4 case where the
  // two coincide at 7.
  SECTION("N=4: dimension 7") {
    const PointSet p = random_point_set(4, 1.0, 71);
    const EquivalencyClass cls = equivalency_class(p);
    const SampleMatrix s = sample_class_angles(cls, p, 100, 5);
    CHECK(small_singular_count(s.rows) == 7);
  }
  SECTION("N=5: dimension 21") {
    const PointSet p = random_point_set(5, 1.0, 72);
    const EquivalencyClass cls = equivalency_class(p);
    const SampleMatrix s = sample_class_angles(cls, p, 200, 6);
    CHECK(small_singular_count(s.rows) == 21);
  }
}

TEST_CASE("learn_constraints extracts annihilating rows") {
  const PointSet p = random_point_set(5, 1.0, 81);
  const EquivalencyClass cls = equivalency_class(p);
  const int target = default_learn_target(5);
  REQUIRE(target == 21);
  const SampleMatrix s = sample_class_angles(cls, p, 2 * target, 7);
  const LinearConstraintSystem learned = learn_constraints(s, target);
  REQUIRE(learned.rows() == target);
  CHECK(learned.svd_gap >= 1e3);
  CHECK_FALSE(learned.ill_separated);

  SECTION("hold-out samples are annihilated") {
    const SampleMatrix holdout = sample_class_angles(cls, p, 50, 8);
    for (int t = 0; t < holdout.sample_count(); ++t) {
      const AngleVector theta(TripletIndexer(5), holdout.rows.row(t).head(30).transpose());
      CAPTURE(t);
      CHECK(learned.max_violation(theta) <= 1e-7);
    }
  }
  SECTION("a different chamber violates at least one row") {
    for (std::uint64_t seed = 90;; ++seed) {
      const PointSet other = random_point_set(5, 1.0, seed);
      if (same_chamber(equivalency_class(other), cls)) continue;
      const AngleVector theta = extract_angles(other);
      CHECK(learned.max_violation(theta) > 1e-3);
      break;
    }
  }
  SECTION("learned rows are dense, not sparse") {
    int nonzeros = 0;
    for (int r = 0; r < learned.rows(); ++r)
      for (int c = 0; c < learned.n_angles; ++c)
        if (std::abs(learned.a_matrix(r, c)) > 1e-12) ++nonzeros;
    CHECK(nonzeros > learned.rows() * learned.n_angles / 2);
  }
  SECTION("deterministic") {
    const LinearConstraintSystem again = learn_constraints(s, target);
    CHECK(again.a_matrix == learned.a_matrix);
    CHECK(again.b_vector == learned.b_vector);
  }
  SECTION("requires enough samples") {
    const SampleMatrix tiny = sample_class_angles(cls, p, 5, 9);
    CHECK_THROWS_AS(learn_constraints(tiny, target), InvalidSizeError);
  }
}

TEST_CASE("learned and analytic systems agree as subspaces") {
  SECTION("N=4: identical row spaces (principal angles <= 1e-6)") {
    const PointSet p = random_point_set(4, 1.0, 73);
    const EquivalencyClass cls = equivalency_class(p);
    const LinearConstraintSystem analytic = build_linear_system(cls);
    const SampleMatrix s = sample_class_angles(cls, p, 2 * analytic.rows(), 10);
    const LinearConstraintSystem learned = learn_constraints(s, analytic.rows());
    CHECK(learned.svd_gap >= 1e3);
    CHECK_FALSE(learned.ill_separated);
    CHECK(max_principal_angle(augmented(analytic), augmented(learned)) <= 1e-6);
  }
  SECTION("N=5: identical row spaces at the chamber rank") {
    const PointSet p = random_point_set(5, 1.0, 74);
    const EquivalencyClass cls = equivalency_class(p);
    const LinearConstraintSystem analytic = build_linear_system(cls);
    REQUIRE(analytic.rows() == 21);
    const SampleMatrix s = sample_class_angles(cls, p, 2 * analytic.rows(), 11);
    const LinearConstraintSystem learned = learn_constraints(s, analytic.rows());
    CHECK(learned.svd_gap >= 1e3);
    CHECK(max_principal_angle(augmented(analytic), augmented(learned)) <= 1e-6);
  }
  SECTION("N=5: an undersized target splits the null block and is flagged") {
    // Requesting the classical M - DOF - K = 19 rows puts the reported gap
    // boundary inside the 21-dimensional null block.
    const PointSet p = random_point_set(5, 1.0, 75);
    const EquivalencyClass cls = equivalency_class(p);
    const SampleMatrix s = sample_class_angles(cls, p, 60, 12);
    const LinearConstraintSystem learned = learn_constraints(s, linear_rank_target(5));
    CHECK(learned.ill_separated);
    // Its rows are still valid constraints (a subspace of the null space).
    const SampleMatrix holdout = sample_class_angles(cls, p, 20, 13);
    for (int t = 0; t < holdout.sample_count(); ++t) {
      const AngleVector theta(TripletIndexer(5), holdout.rows.row(t).head(30).transpose());
      CHECK(learned.max_violation(theta) <= 1e-7);
    }
  }
}
