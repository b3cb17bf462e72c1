// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lenslab {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Everything in this project runs in
// 64-bit floating point; there are no BLAS bindings and no sparse formats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data.data() + r * cols, cols);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data.data() + r * cols, cols);
  }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

double dot(std::span<const double> a, std::span<const double> b);

void matvec_into(const Matrix& m, std::span<const double> v,
                 std::span<double> out);
Vector matvec(const Matrix& m, const Vector& v);

Matrix matmul(const Matrix& a, const Matrix& b);

// Numerically stable softmax (subtracts the max); requires finite entries
// and a nonempty input.
void softmax_inplace(std::span<double> v);
Vector softmax(const Vector& v);

// out_k = gain_k * v_k / sqrt(mean(v^2) + eps)
void rmsnorm_into(std::span<const double> v, std::span<const double> gain,
                  double eps, std::span<double> out);
Vector rmsnorm(const Vector& v, const Vector& gain, double eps);

// Index of the maximum entry; ties resolve to the lowest index.
std::size_t argmax_det(std::span<const double> v);

// Sample Pearson correlation; throws on length mismatch, length < 2, or a
// constant sequence (undefined correlation).
double pearson(std::span<const double> xs, std::span<const double> ys);

double mean_of(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);

bool all_finite(std::span<const double> xs);

// Regularized incomplete beta I_x(a, b), Lentz continued fraction.
double ibeta_reg(double a, double b, double x);

// Two-sided p-value of a Student-t statistic with df degrees of freedom,
// computed through the exact CDF identity p = I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

}  // namespace lenslab
