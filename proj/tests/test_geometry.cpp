#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "anglekit/geometry.hpp"
#include "test_support.hpp"

using namespace anglekit;
using testutil::cyclic_equal;
using testutil::equilateral_triangle;
using testutil::similarity_transform;
using testutil::unit_square;

TEST_CASE("triplet_count matches N(N-1)(N-2)/2") {
  CHECK(triplet_count(3) == 3);
  CHECK(triplet_count(4) == 12);
  CHECK(triplet_count(5) == 30);
  CHECK_THROWS_AS(triplet_count(2), InvalidSizeError);
}

TEST_CASE("TripletIndexer is the canonical bijection") {
  for (int n = 3; n <= 8; ++n) {
    const TripletIndexer idx(n);
    REQUIRE(idx.count() == triplet_count(n));
    // Oracle: enumerate triplets in the canonical order by explicit loops.
    int m = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int k = j + 1; k < n; ++k) {
          if (k == i) continue;
          CAPTURE(n, i, j, k, m);
          REQUIRE(idx.index_of(i, j, k) == m);
          REQUIRE(idx.index_of(i, k, j) == m);  // unordered ray pair
          const Triplet t = idx.triplet_of(m);
          REQUIRE(t == Triplet{i, j, k});
          ++m;
        }
      }
    }
    REQUIRE(m == idx.count());
  }
  const TripletIndexer idx(4);
  CHECK_THROWS_AS(idx.index_of(0, 0, 1), IndexError);
  CHECK_THROWS_AS(idx.index_of(0, 1, 4), IndexError);
  CHECK_THROWS_AS(idx.triplet_of(12), IndexError);
  CHECK_THROWS_AS(idx.triplet_of(-1), IndexError);
}

TEST_CASE("dof counts free parameters modulo similarity") {
  CHECK(dof(3, 2) == 2);
  CHECK(dof(5, 2) == 6);
  CHECK(dof(4, 3) == 5);
  CHECK_THROWS_AS(dof(2, 2), InvalidSizeError);
  CHECK_THROWS_AS(dof(4, 1), InvalidSizeError);
}

TEST_CASE("inner_angle basics") {
  CHECK(inner_angle(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)) == Catch::Approx(kPi / 2));
  CHECK(inner_angle(Vec2(0, 0), Vec2(1, 0), Vec2(1, 1)) == Catch::Approx(kPi / 4));
  CHECK(inner_angle(Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)) == Catch::Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(inner_angle(Vec2(1, 1), Vec2(1, 1), Vec2(0, 1)), DegenerateGeometryError);
}

TEST_CASE("extract_angles on reference shapes") {
  SECTION("equilateral triangle") {
    const AngleVector v = extract_angles(equilateral_triangle());
    REQUIRE(v.size() == 3);
    for (int m = 0; m < v.size(); ++m) CHECK(v.values[m] == Catch::Approx(kPi / 3));
  }
  SECTION("unit square corner") {
    const AngleVector v = extract_angles(unit_square());
    CHECK(v.at(0, 1, 2) == Catch::Approx(kPi / 4));
    CHECK(v.at(0, 1, 3) == Catch::Approx(kPi / 2));
    CHECK(v.at(0, 2, 3) == Catch::Approx(kPi / 4));
    // Same pattern at the opposite corner.
    CHECK(v.at(2, 3, 0) == Catch::Approx(kPi / 4));
    CHECK(v.at(2, 3, 1) == Catch::Approx(kPi / 2));
  }
  SECTION("collinear set is rejected") {
    const PointSet bad{{Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}};
    CHECK_THROWS_AS(extract_angles(bad), DegenerateGeometryError);
  }
}

TEST_CASE("extract_angles is invariant under similarity transforms") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const PointSet p = random_point_set(6, 1.0, seed);
    const AngleVector base = extract_angles(p);
    REQUIRE(base.size() == triplet_count(6));

    const PointSet moved = similarity_transform(p, 0.83, 2.0, Vec2(-3.0, 7.5));
    const AngleVector vm = extract_angles(moved);
    CHECK((vm.values - base.values).lpNorm<Eigen::Infinity>() < 1e-12);

    const PointSet mirrored = similarity_transform(p, -1.2, 0.31, Vec2(0.4, 0.0), true);
    const AngleVector vr = extract_angles(mirrored);
    CHECK((vr.values - base.values).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("triangle identity on noiseless extractions") {
  const PointSet p = random_point_set(6, 10.0, 99);
  const AngleVector v = extract_angles(p);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      for (int k = j + 1; k < 6; ++k) {
        const double s = v.at(i, j, k) + v.at(j, i, k) + v.at(k, i, j);
        CHECK(std::abs(s - kPi) < 1e-10);
      }
}

TEST_CASE("equivalency_class of the unit square") {
  const EquivalencyClass cls = equivalency_class(unit_square());
  REQUIRE(cls.n_points() == 4);
  // Oracle: at node 0 the neighbors sit at bearings 0 (node 1), 45 (node 2)
  // and 90 degrees (node 3); clockwise order is therefore 3, 2, 1.
  CHECK(cyclic_equal(cls.cycles[0], {3, 2, 1}, /*allow_reverse=*/true));
  // Canonical cycles start at their smallest entry.
  for (const auto& c : cls.cycles) {
    REQUIRE(!c.empty());
    CHECK(c.front() == *std::min_element(c.begin(), c.end()));
  }
}

TEST_CASE("equivalency_class invariance") {
  const PointSet p = random_point_set(5, 1.0, 21);
  const EquivalencyClass base = equivalency_class(p);

  SECTION("similarity transforms preserve the class") {
    const PointSet moved = similarity_transform(p, 2.1, 3.5, Vec2(5, -2));
    CHECK(equivalency_class(moved) == base);
  }
  SECTION("mirror images map to the same canonical class") {
    // Oracle: reflect and recompute; the canonicalization must absorb the
    // simultaneous reversal of every cycle.
    const PointSet mirrored = similarity_transform(p, 0.0, 1.0, Vec2(0, 0), true);
    CHECK(equivalency_class(mirrored) == base);
  }
  SECTION("a different configuration yields a different class") {
    // Moving one point across the hull flips some circular orders.
    PointSet q = p;
    q[0] = Vec2(50.0, 50.0);
    if (!point_set_is_degenerate(q)) CHECK_FALSE(equivalency_class(q) == base);
  }
  SECTION("tied bearings are degenerate") {
    const PointSet bad{{Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(1, 1)}};
    CHECK_THROWS_AS(equivalency_class(bad), DegenerateGeometryError);
  }
}

TEST_CASE("random_point_set sampling contract") {
  SECTION("deterministic for a fixed seed") {
    const PointSet a = random_point_set(5, 1.0, 424242);
    const PointSet b = random_point_set(5, 1.0, 424242);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
  SECTION("all angles respect the min-angle filter") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const PointSet p = random_point_set(6, 1.0, seed);
      const AngleVector v = extract_angles_unchecked(p);
      CHECK(v.values.minCoeff() >= kDefaultMinAngle);
      CHECK(v.values.maxCoeff() <= kPi - kDefaultMinAngle);
    }
  }
  SECTION("triangle angles sum to pi") {
    const PointSet p = random_point_set(3, 10.0, 7);
    const AngleVector v = extract_angles(p);
    CHECK(std::abs(v.values.sum() - kPi) < 1e-12);
  }
  SECTION("bounds and argument checks") {
    const PointSet p = random_point_set(4, 2.5, 3);
    for (const auto& q : p.points) {
      CHECK(q.x() >= 0.0);
      CHECK(q.x() <= 2.5);
      CHECK(q.y() >= 0.0);
      CHECK(q.y() <= 2.5);
    }
    CHECK_THROWS_AS(random_point_set(2, 1.0, 0), InvalidSizeError);
    CHECK_THROWS_AS(random_point_set(4, 0.0, 0), InvalidArgumentError);
  }
  SECTION("an impossible filter exhausts the rejection budget") {
    CHECK_THROWS_AS(random_point_set(4, 1.0, 0, 1.0), SamplingFailureError);
  }
}

TEST_CASE("min_measurement_count") {
  const MeasurementCount c5 = min_measurement_count(5, 2);
  CHECK(c5.closed_form == 14);
  CHECK(c5.consumed == 8);
  CHECK(min_measurement_count(3, 2).consumed == 2);
  CHECK(min_measurement_count(4, 2).consumed == 5);
  CHECK_THROWS_AS(min_measurement_count(2, 2), InvalidSizeError);
}
