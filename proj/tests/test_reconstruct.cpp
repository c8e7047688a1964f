#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "anglekit/denoise.hpp"
#include "anglekit/reconstruct.hpp"
#include "test_support.hpp"

using namespace anglekit;
using testutil::equilateral_triangle;
using testutil::similarity_transform;
using testutil::unit_square;

TEST_CASE("triangulate reference cases") {
  const Vec2 a = triangulate(Vec2(0, 0), Vec2(1, 0), kPi / 3, kPi / 3, true);
  CHECK((a - Vec2(0.5, std::sqrt(3.0) / 2.0)).norm() < 1e-12);

  const Vec2 b = triangulate(Vec2(0, 0), Vec2(1, 0), kPi / 2, kPi / 4, true);
  CHECK((b - Vec2(0.0, 1.0)).norm() < 1e-12);

  const Vec2 c = triangulate(Vec2(0, 0), Vec2(1, 0), kPi / 3, kPi / 3, false);
  CHECK((c - Vec2(0.5, -std::sqrt(3.0) / 2.0)).norm() < 1e-12);

  CHECK_THROWS_AS(triangulate(Vec2(0, 0), Vec2(1, 0), kPi / 2, kPi / 2, true),
                  InfeasibleTriangleError);
  CHECK_THROWS_AS(triangulate(Vec2(0, 0), Vec2(1, 0), 0.0, kPi / 4, true),
                  InfeasibleTriangleError);
  CHECK_THROWS_AS(triangulate(Vec2(1, 1), Vec2(1, 1), kPi / 4, kPi / 4, true),
                  DegenerateGeometryError);
}

TEST_CASE("triangulate round-trips extracted base angles") {
  // Oracle: place a random apex, extract its two base angles, re-triangulate.
  Rng rng(314);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec2 pi(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Vec2 pj = pi + Vec2(rng.uniform(0.2, 2.0), 0.0);
    const Vec2 apex(rng.uniform(-1, 1), pi.y() + rng.uniform(0.05, 2.0));
    const double alpha = inner_angle(pi, pj, apex);
    const double beta = inner_angle(pj, pi, apex);
    if (alpha + beta >= kPi - 1e-3 || alpha < 1e-3 || beta < 1e-3) continue;
    const Vec2 back = triangulate(pi, pj, alpha, beta, true);
    CAPTURE(trial);
    CHECK((back - apex).norm() < 1e-10);
  }
}

TEST_CASE("build_up recovers reference shapes") {
  SECTION("equilateral triangle") {
    const AngleVector theta = extract_angles(equilateral_triangle());
    const PointSet p = build_up(theta);
    CHECK((p[0] - Vec2(0, 0)).norm() == 0.0);
    CHECK((p[1] - Vec2(1, 0)).norm() == 0.0);
    CHECK((p[2] - Vec2(0.5, std::sqrt(3.0) / 2.0)).norm() < 1e-12);
  }
  SECTION("unit square round-trip via alignment") {
    const AngleVector theta = extract_angles(unit_square());
    const PointSet p = build_up(theta);
    const ProcrustesResult fit = procrustes_align(p, unit_square(), true);
    CHECK(fit.mse < 1e-10);
  }
}

TEST_CASE("build_up round-trips all angles of noiseless sets") {
  for (int n : {4, 5, 6}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PointSet p = random_point_set(n, 1.0, derive_seed(777, {static_cast<std::uint64_t>(n), seed}));
      const AngleVector theta = extract_angles(p);
      const PointSet rec = build_up(theta);
      const AngleVector re = extract_angles_unchecked(rec);
      CAPTURE(n, seed);
      CHECK((re.values - theta.values).lpNorm<Eigen::Infinity>() <= 1e-9);
      CHECK(procrustes_align(rec, p, true).mse <= 1e-10);
    }
  }
}

TEST_CASE("build_up consumes the documented number of angles") {
  // Oracle for the measurement-count formula: instrument the reads.
  for (int n : {3, 4, 5, 7}) {
    const PointSet p = random_point_set(n, 1.0, 900 + static_cast<std::uint64_t>(n));
    BuildUpTrace trace;
    build_up(extract_angles(p), BuildUpOptions{}, &trace);
    CAPTURE(n);
    CHECK(static_cast<std::int64_t>(trace.consumed.size()) ==
          min_measurement_count(n, 2).consumed);
  }
}

TEST_CASE("build_up is invariant to the disambiguation node on realizable input") {
  const PointSet p = random_point_set(6, 1.0, 911);
  const AngleVector theta = extract_angles(p);
  const PointSet base = build_up(theta);
  for (int dis = 3; dis < 6; ++dis) {
    const PointSet alt = build_up(theta, BuildUpOptions{dis});
    CHECK(procrustes_align(alt, base, true).mse <= 1e-10);
  }
  CHECK_THROWS_AS(build_up(theta, BuildUpOptions{1}), IndexError);
  CHECK_THROWS_AS(build_up(theta, BuildUpOptions{6}), IndexError);
}

TEST_CASE("build_up fails loudly on infeasible triangles") {
  AngleVector theta = extract_angles(random_point_set(4, 1.0, 912));
  theta.at(0, 1, 3) = 1.8;
  theta.at(1, 0, 3) = 1.8;  // alpha + beta > pi at point 3
  CHECK_THROWS_AS(build_up(theta), ReconstructionFailureError);
}

TEST_CASE("procrustes alignment") {
  const PointSet x = random_point_set(5, 1.0, 920);

  SECTION("exact similarity model is recovered") {
    const PointSet y = similarity_transform(x, 1.1, 3.0, Vec2(2, -1));
    const ProcrustesResult fit = procrustes_align(x, y, true);
    CHECK(fit.mse <= 1e-12);
    CHECK(fit.transform.scale == Catch::Approx(3.0));
    const Eigen::Matrix2d q = fit.transform.rotation;
    CHECK((q.transpose() * q - Eigen::Matrix2d::Identity()).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
  SECTION("reflections are allowed") {
    const PointSet y = similarity_transform(x, 0.0, 1.0, Vec2(0, 0), true);
    const ProcrustesResult fit = procrustes_align(x, y, true);
    CHECK(fit.mse <= 1e-12);
    CHECK(fit.transform.rotation.determinant() == Catch::Approx(-1.0));
  }
  SECTION("identity on self") {
    const ProcrustesResult fit = procrustes_align(x, x, true);
    CHECK(fit.mse <= 1e-15);
    CHECK(fit.transform.scale == Catch::Approx(1.0));
    CHECK((fit.transform.rotation - Eigen::Matrix2d::Identity()).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
  SECTION("alignment mse is invariant to pre-transforming the estimate") {
    const PointSet y = random_point_set(5, 1.0, 921);
    const double base = procrustes_align(x, y, true).mse;
    const PointSet moved = similarity_transform(x, -0.4, 0.25, Vec2(7, 7), true);
    CHECK(procrustes_align(moved, y, true).mse == Catch::Approx(base).margin(1e-10));
  }
  SECTION("fixed scale stays at one") {
    const PointSet y = similarity_transform(x, 0.3, 2.0, Vec2(0, 0));
    const ProcrustesResult fit = procrustes_align(x, y, false);
    CHECK(fit.transform.scale == 1.0);
    CHECK(fit.mse > 1e-3);  // scale mismatch must show up
  }
  SECTION("degenerate estimate is rejected") {
    PointSet flat;
    flat.points.assign(5, Vec2(0.3, 0.3));
    CHECK_THROWS_AS(procrustes_align(flat, x, true), DegenerateAlignmentError);
  }
}

TEST_CASE("discrepancy") {
  const PointSet p = random_point_set(5, 1.0, 930);
  const AngleVector theta = extract_angles(p);
  SECTION("zero for a consistent reconstruction") {
    CHECK(discrepancy(theta, build_up(theta)) <= 1e-9);
  }
  SECTION("positive for an unrelated point set") {
    const PointSet other = random_point_set(5, 1.0, 931);
    CHECK(discrepancy(theta, other) > 1e-3);
  }
  SECTION("size mismatch is rejected") {
    CHECK_THROWS_AS(discrepancy(theta, random_point_set(6, 1.0, 932)), InvalidSizeError);
  }
}

TEST_CASE("classic MDS recovers noiseless embeddings") {
  for (int n = 4; n <= 8; ++n) {
    const PointSet p = random_point_set(n, 2.0, 940 + static_cast<std::uint64_t>(n));
    const MdsResult mds = classic_mds(DistanceMatrix::from_points(p), 2);
    CAPTURE(n);
    CHECK_FALSE(mds.rank_deficit);
    CHECK(procrustes_align(mds.points, p, true).mse <= 1e-12);
  }
}

TEST_CASE("classic MDS on the unit square") {
  // Oracle: for the centered unit square the Gram matrix -1/2 J D J has
  // eigenvalues {1, 1, 0, 0}; hand-checkable from the 4x4 case.
  const MdsResult mds = classic_mds(DistanceMatrix::from_points(unit_square()), 2);
  REQUIRE(mds.eigenvalues.size() == 2);
  CHECK(mds.eigenvalues[0] == Catch::Approx(1.0));
  CHECK(mds.eigenvalues[1] == Catch::Approx(1.0));
  const ProcrustesResult fit = procrustes_align(mds.points, unit_square(), true);
  CHECK(fit.mse <= 1e-12);
  // Side length is preserved (no rescaling needed).
  CHECK((mds.points[0] - mds.points[1]).norm() == Catch::Approx(1.0));
}

TEST_CASE("classic MDS edge cases") {
  SECTION("all-zero distances collapse to the origin") {
    DistanceMatrix d;
    d.squared = Eigen::MatrixXd::Zero(4, 4);
    const MdsResult mds = classic_mds(d, 2);
    CHECK(mds.rank_deficit);
    CHECK(mds.positive_count == 0);
    for (const auto& q : mds.points.points) CHECK(q.norm() == 0.0);
  }
  SECTION("collinear points are rank one") {
    PointSet line{{Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(3, 0)}};
    const MdsResult mds = classic_mds(DistanceMatrix::from_points(line), 2);
    CHECK(mds.rank_deficit);
    CHECK(mds.positive_count == 1);
  }
  SECTION("invalid matrices are rejected") {
    DistanceMatrix d;
    d.squared = Eigen::MatrixXd::Zero(3, 3);
    d.squared(0, 1) = -1.0;
    d.squared(1, 0) = -1.0;
    CHECK_THROWS_AS(classic_mds(d, 2), InvalidArgumentError);
    d.squared(0, 1) = 1.0;
    CHECK_THROWS_AS(classic_mds(d, 2), InvalidArgumentError);  // asymmetric
    d.squared(1, 0) = 1.0;
    d.squared(2, 2) = 0.5;
    CHECK_THROWS_AS(classic_mds(d, 2), InvalidArgumentError);  // nonzero diagonal
  }
}

TEST_CASE("denoise then build_up closes the loop") {
  // End-to-end: noisy angles, full-constraint denoise, build-up; the
  // discrepancy over all M angles must collapse and the aligned points must
  // sit near the truth.
  const PointSet p = random_point_set(5, 1.0, 950);
  const AngleVector clean = extract_angles(p);
  Rng rng(951);
  AngleVector noisy = clean;
  for (int i = 0; i < noisy.size(); ++i)
    noisy.values[i] = std::clamp(noisy.values[i] + rng.gaussian(1e-3), 1e-6, kPi - 1e-6);

  DenoiseProblem prob{noisy, build_linear_system(equivalency_class(p)), enumerate_quads(5),
                      SolverOptions{}};
  const DenoiseResult res = denoise(prob);
  REQUIRE(res.converged);
  const PointSet rec = build_up(res.denoised_angles);
  CHECK(discrepancy(res.denoised_angles, rec) <= 1e-4);
  CHECK(procrustes_align(rec, p, true).mse <= 1e-4);
}
