// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lenslab/errors.hpp"

namespace lenslab {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void matvec_into(const Matrix& m, std::span<const double> v,
                 std::span<double> out) {
  require_data(m.cols == v.size(), "matvec: matrix cols != vector dim");
  require_data(m.rows == out.size(), "matvec: matrix rows != output dim");
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + r * m.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
}

Vector matvec(const Matrix& m, const Vector& v) {
  Vector out(m.rows, 0.0);
  matvec_into(m, v, out);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_data(a.cols == b.rows, "matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    double* orow = out.data.data() + i * out.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

void softmax_inplace(std::span<double> v) {
  require_data(!v.empty(), "softmax: empty input");
  double max = v[0];
  for (double x : v) max = std::max(max, x);
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - max);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

Vector softmax(const Vector& v) {
  Vector out = v;
  softmax_inplace(out);
  return out;
}

void rmsnorm_into(std::span<const double> v, std::span<const double> gain,
                  double eps, std::span<double> out) {
  require_data(v.size() == gain.size(), "rmsnorm: gain dim != vector dim");
  require_data(v.size() == out.size(), "rmsnorm: output dim != vector dim");
  require_data(!v.empty(), "rmsnorm: empty input");
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double inv = 1.0 / std::sqrt(ss / static_cast<double>(v.size()) + eps);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = gain[i] * v[i] * inv;
}

Vector rmsnorm(const Vector& v, const Vector& gain, double eps) {
  Vector out(v.size(), 0.0);
  rmsnorm_into(v, gain, eps, out);
  return out;
}

std::size_t argmax_det(std::span<const double> v) {
  require_data(!v.empty(), "argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

double mean_of(std::span<const double> xs) {
  require_data(!xs.empty(), "mean: empty input");
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  require_data(xs.size() >= 2, "stddev: need at least 2 values");
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  require_data(xs.size() == ys.size(), "pearson: length mismatch");
  require_data(xs.size() >= 2, "pearson: need at least 2 points");
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DataError("pearson: undefined correlation for a constant sequence");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

namespace {

// Continued-fraction core of the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double ibeta_reg(double a, double b, double x) {
  require_data(a > 0.0 && b > 0.0, "ibeta: a and b must be positive");
  require_data(x == x, "ibeta: x is NaN");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * betacf(a, b, x) / a;
  }
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  require_data(df > 0.0, "t-test: degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return ibeta_reg(0.5 * df, 0.5, x);
}

}  // namespace lenslab
