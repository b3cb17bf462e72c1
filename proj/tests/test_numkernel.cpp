// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <doctest.h>

#include "lenslab/errors.hpp"
#include "lenslab/numkernel.hpp"
#include "lenslab/rng.hpp"

using namespace lenslab;

namespace {

// Independent textbook-formula oracle for the Pearson correlation,
// deliberately arranged differently from the library implementation.
double pearson_oracle(const Vector& xs, const Vector& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxy += xs[i] * ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("numkernel") {

TEST_CASE("matvec basics") {
  Matrix id(2, 2);
  id.at(0, 0) = 1.0;
  id.at(1, 1) = 1.0;
  CHECK(matvec(id, {3.0, 4.0}) == Vector{3.0, 4.0});

  Matrix zero(2, 2);
  CHECK(matvec(zero, {5.0, -7.0}) == Vector{0.0, 0.0});

  Matrix m(2, 2);
  m.at(0, 0) = 1.0;
  m.at(0, 1) = 2.0;
  m.at(1, 0) = 3.0;
  m.at(1, 1) = 4.0;
  CHECK(matvec(m, {1.0, 1.0}) == Vector{3.0, 7.0});

  CHECK_THROWS_AS(matvec(m, {1.0, 2.0, 3.0}), DataError);
}

TEST_CASE("matmul against hand products and matvec composition") {
  Matrix a(2, 3);
  Matrix b(3, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    a.data[i] = static_cast<double>(i + 1);       // [[1,2,3],[4,5,6]]
    b.data[i] = static_cast<double>(6 - i);       // [[6,5],[4,3],[2,1]]
  }
  const Matrix c = matmul(a, b);
  CHECK(c.data == std::vector<double>{20, 14, 56, 41});
  CHECK_THROWS_AS(matmul(a, a), DataError);

  Rng rng(55);
  Matrix p(4, 6), q(6, 3);
  for (double& x : p.data) x = rng.normal();
  for (double& x : q.data) x = rng.normal();
  const Vector v = random_vector(rng, 3);
  const Vector direct = matvec(p, matvec(q, v));
  const Vector through = matvec(matmul(p, q), v);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(direct[i] == doctest::Approx(through[i]).epsilon(1e-9));
  }
}

TEST_CASE("matvec distributes over vector addition") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m(5, 7);
    for (double& x : m.data) x = rng.normal();
    const Vector a = random_vector(rng, 7);
    const Vector b = random_vector(rng, 7);
    Vector sum(7);
    for (std::size_t i = 0; i < 7; ++i) sum[i] = a[i] + b[i];
    const Vector lhs = matvec(m, sum);
    const Vector ra = matvec(m, a);
    const Vector rb = matvec(m, b);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(lhs[i] == doctest::Approx(ra[i] + rb[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("softmax closed forms") {
  const Vector sym = softmax({0.0, 0.0});
  CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sym[1] == doctest::Approx(0.5).epsilon(1e-15));

  const Vector flat = softmax({3.7, 3.7, 3.7, 3.7});
  for (double p : flat) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

  const Vector logs =
      softmax({std::log(1.0), std::log(2.0), std::log(3.0)});
  CHECK(logs[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(logs[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-14));
  CHECK(logs[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-14));

  CHECK_THROWS_AS(softmax({}), DataError);
}

TEST_CASE("softmax properties over random vectors") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    Vector v = random_vector(rng, n, trial % 2 == 0 ? 1.0 : 50.0);
    const Vector p = softmax(v);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);

    const double c = 10.0 * rng.normal();
    Vector shifted = v;
    for (double& x : shifted) x += c;
    const Vector q = softmax(shifted);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::fabs(p[i] - q[i]) <= 1e-12);
    }
  }
}

TEST_CASE("rmsnorm closed forms") {
  const Vector ones = rmsnorm({1, 1, 1, 1}, {1, 1, 1, 1}, 0.0);
  for (double x : ones) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));

  const Vector twos = rmsnorm({2, 2}, {1, 1}, 0.0);
  for (double x : twos) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));

  const Vector v = rmsnorm({3, 4}, {1, 2}, 0.0);
  CHECK(v[0] == doctest::Approx(3.0 / std::sqrt(12.5)).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(8.0 / std::sqrt(12.5)).epsilon(1e-15));

  CHECK_THROWS_AS(rmsnorm({1, 2}, {1, 2, 3}, 0.0), DataError);
}

TEST_CASE("argmax tie-breaks to the lowest index") {
  CHECK(argmax_det(Vector{0.1, 0.7, 0.2}) == 1);
  CHECK(argmax_det(Vector{0.5, 0.5}) == 0);
  CHECK(argmax_det(Vector{1, 3, 3, 2}) == 1);
  CHECK_THROWS_AS(argmax_det(Vector{}), DataError);
}

TEST_CASE("argmax is permutation-covariant for distinct entries") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(10);
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i) + rng.uniform() * 0.5;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = v[perm[i]];
    const std::size_t orig = argmax_det(v);
    const std::size_t moved = argmax_det(w);
    CHECK(perm[moved] == orig);
  }
}

TEST_CASE("pearson exact and frozen values") {
  CHECK(pearson(Vector{1, 2, 3}, Vector{2, 4, 6}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(Vector{1, 2, 3}, Vector{3, 2, 1}) ==
        doctest::Approx(-1.0).epsilon(1e-15));

  // Four averaged (critical layer, accuracy) points; expected value frozen
  // from the independent oracle ahead of the implementation.
  const Vector xs = {23.90, 26.23, 28.76, 27.53};
  const Vector ys = {85.00, 91.53, 33.53, 18.67};
  const double r = pearson(xs, ys);
  CHECK(std::fabs(r - (-0.76783058101754242)) <= 1e-9);
  CHECK(std::fabs(r - pearson_oracle(xs, ys)) <= 1e-12);
  CHECK(r < -0.5);

  CHECK_THROWS_AS(pearson(Vector{1, 1, 1}, Vector{1, 2, 3}), DataError);
  CHECK_THROWS_AS(pearson(Vector{1, 2}, Vector{1, 2, 3}), DataError);
}

TEST_CASE("pearson affine invariance") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.below(20);
    const Vector xs = random_vector(rng, n);
    const Vector ys = random_vector(rng, n);
    const double a = rng.normal() + (rng.uniform() < 0.5 ? -2.0 : 2.0);
    const double b = rng.normal();
    Vector scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = a * xs[i] + b;
    const double base = pearson(xs, ys);
    const double moved = pearson(scaled, ys);
    const double expected = a > 0 ? base : -base;
    CHECK(std::fabs(moved - expected) <= 1e-12);
  }
}

TEST_CASE("incomplete beta frozen values") {
  CHECK(ibeta_reg(5.0, 0.5, 0.5) ==
        doctest::Approx(0.010119559735433718).epsilon(1e-12));
  CHECK(ibeta_reg(0.5, 0.5, 0.25) ==
        doctest::Approx(0.33333333333333337).epsilon(1e-12));
  CHECK(ibeta_reg(2.0, 3.0, 0.7) == doctest::Approx(0.9163).epsilon(1e-12));
  CHECK(ibeta_reg(2.0, 3.0, 0.0) == 0.0);
  CHECK(ibeta_reg(2.0, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS(ibeta_reg(-1.0, 1.0, 0.5), DataError);
}

TEST_CASE("student t two-sided p frozen values") {
  CHECK(student_t_two_sided_p(2.228138851986273, 10.0) ==
        doctest::Approx(0.05).epsilon(1e-9));
  CHECK(student_t_two_sided_p(1.0, 5.0) ==
        doctest::Approx(0.36321746764912255).epsilon(1e-12));
  CHECK(student_t_two_sided_p(3.5, 7.0) ==
        doctest::Approx(0.0099930408818855437).epsilon(1e-12));
  CHECK(student_t_two_sided_p(0.5, 2.0) ==
        doctest::Approx(0.66666666666666674).epsilon(1e-12));
  CHECK(student_t_two_sided_p(0.0, 9.0) == doctest::Approx(1.0));

  // r = -0.748 over 12 points, the kind of small-n case the correlation
  // study produces.
  const double r = -0.748;
  const double t = r * std::sqrt(10.0 / (1.0 - r * r));
  CHECK(student_t_two_sided_p(t, 10.0) ==
        doctest::Approx(0.0051473675551118262).epsilon(1e-12));
}

TEST_CASE("mean and sample stddev") {
  CHECK(mean_of(Vector{1, 2, 3, 4}) == doctest::Approx(2.5));
  CHECK(sample_stddev(Vector{2, 4, 4, 4, 5, 5, 7, 9}) ==
        doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
  CHECK_THROWS_AS(sample_stddev(Vector{1.0}), DataError);
}

}  // TEST_SUITE
