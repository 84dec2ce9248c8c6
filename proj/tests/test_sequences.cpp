#include "nsp/sequences.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace nsp;

TEST_CASE("scaled partial sums") {
  Vector y(4);
  y << 1, 2, 3, 4;
  const PrefixSums<double> prefix(y);
  CHECK(prefix.total(1, 4) == 10.0);
  CHECK(scaled_partial_sum(prefix, 1, 4) == doctest::Approx(5.0));
  CHECK(prefix.scaled_partial_sum(2, 3) == doctest::Approx(5.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(prefix.total(0, 2), IndexBoundsError);
  CHECK_THROWS_AS(prefix.total(3, 5), IndexBoundsError);
  CHECK_THROWS_AS(prefix.total(3, 2), IndexBoundsError);
}

TEST_CASE("compensated prefix sums on cancelling data") {
  Vector y(3);
  y << 1e16, 1.0, -1e16;
  CHECK(PrefixSums<double>(y).total(1, 3) == 1.0);
}

TEST_CASE("family sizes and order") {
  CHECK(IntervalFamily(FamilyKind::all, {1, 10}).size() == 55);
  // 8 + 7 + 5 + 1
  CHECK(IntervalFamily(FamilyKind::dyadic, {1, 8}).size() == 21);
  const auto members = IntervalFamily(FamilyKind::dyadic, {3, 6}).members();
  REQUIRE(members.size() == 8);
  CHECK(members.front() == Interval{3, 3});
  CHECK(members[4] == Interval{3, 4});
  CHECK(members.back() == Interval{3, 6});
  CHECK(floor_log2(1) == 0);
  CHECK(floor_log2(1023) == 9);
  CHECK(floor_log2(1024) == 10);
}

TEST_CASE("dyadic norm matches direct enumeration bit for bit") {
  std::mt19937_64 rng(7);
  for (Index T : {1, 2, 3, 7, 16, 33, 100}) {
    const Vector y = oracle::gaussian(T, rng);
    const auto fast = multiresolution_norm(y, IntervalFamily(FamilyKind::dyadic, {1, T}));
    const auto slow = oracle::dyadic_norm(y, 1, T);
    CHECK(fast.value == slow.value);
    CHECK(fast.argmax == slow.argmax);
  }
}

TEST_CASE("norm restricted to an anchor") {
  std::mt19937_64 rng(8);
  const Vector y = oracle::gaussian(50, rng);
  const auto fast = multiresolution_norm(y, IntervalFamily(FamilyKind::dyadic, {11, 40}));
  const auto slow = oracle::dyadic_norm(y, 11, 40);
  CHECK(fast.value == slow.value);
  CHECK(fast.argmax == slow.argmax);
  CHECK(norm_all_intervals(y, {11, 40}) == doctest::Approx(oracle::all_norm(y, 11, 40)).epsilon(1e-12));
}

TEST_CASE("all-intervals norm dominates the dyadic norm") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector y = oracle::gaussian(37, rng);
    CHECK(norm_all_intervals(y, {1, 37}) >=
          multiresolution_norm(y, IntervalFamily(FamilyKind::dyadic, {1, 37})).value - 1e-12);
  }
}

TEST_CASE("ties resolve to the smallest start") {
  Vector y = Vector::Zero(6);
  y[1] = 1.0;
  y[4] = -1.0;
  const auto norm = multiresolution_norm(y, IntervalFamily(FamilyKind::dyadic, {1, 6}));
  CHECK(norm.value == 1.0);
  CHECK(norm.argmax == Interval{2, 2});
  const auto zero = multiresolution_norm(Vector::Zero(4).eval(), IntervalFamily(FamilyKind::all, {1, 4}));
  CHECK(zero.value == 0.0);
  CHECK(zero.argmax == Interval{1, 1});
}

TEST_CASE("family sums agree with the norm") {
  std::mt19937_64 rng(10);
  Matrix block(20, 2);
  block.col(0) = oracle::gaussian(20, rng);
  block.col(1) = oracle::gaussian(20, rng);
  const auto sums = family_scaled_sums(block, FamilyKind::dyadic);
  CHECK(sums.values.rows() == IntervalFamily(FamilyKind::dyadic, {1, 20}).size());
  const Vector c0 = block.col(0);
  CHECK(sums.values.col(0).cwiseAbs().maxCoeff() ==
        multiresolution_norm(c0, IntervalFamily(FamilyKind::dyadic, {1, 20})).value);
  const auto all = family_scaled_sums(block, FamilyKind::all);
  CHECK(all.values.rows() == 210);
}

TEST_CASE("single precision instantiation") {
  Eigen::VectorXf y(5);
  y << 1, -2, 3, -4, 5;
  const auto norm = multiresolution_norm(y, IntervalFamily(FamilyKind::all, {1, 5}));
  CHECK(norm.value == doctest::Approx(5.0f));
  CHECK(PrefixSums<float>(y).total(1, 5) == 3.0f);
}
