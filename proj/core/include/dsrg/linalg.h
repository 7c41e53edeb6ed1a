// Copyright 2026 The DSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSRG_LINALG_H_
#define DSRG_LINALG_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dsrg {

// Dense real vector. Values are stored in single precision; arithmetic in
// this library accumulates in double and rounds on store.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, float fill = 0.0f) : data_(dim, fill) {}
  explicit Vector(std::vector<float> values) : data_(std::move(values)) {}
  Vector(std::initializer_list<float> values) : data_(values) {}

  static Vector FromDoubles(std::span<const double> values);

  std::size_t dim() const { return data_.size(); }
  float operator[](std::size_t i) const { return data_[i]; }
  float& operator[](std::size_t i) { return data_[i]; }

  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }
  std::vector<double> ToDoubles() const;

  bool AllFinite() const;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<float> data_;
};

// Dense row-major matrix. A collection of n samples of dimension d is held
// as a d x n matrix, one sample per column.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  static Matrix Identity(std::size_t n);
  static Matrix Diagonal(std::span<const double> diag);
  static Matrix FromColumns(std::span<const Vector> columns);
  static Matrix FromDoubles(std::size_t rows, std::size_t cols,
                            std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  Vector Column(std::size_t c) const;
  void SetColumn(std::size_t c, const Vector& v);

  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }
  std::vector<double> ToDoubles() const;

  bool AllFinite() const;
  // Largest |a(i,j) - a(j,i)|; requires a square matrix.
  double MaxAsymmetry() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

Matrix Transpose(const Matrix& a);
Matrix MatMul(const Matrix& a, const Matrix& b);
Vector MatVec(const Matrix& a, const Vector& x);
double Dot(const Vector& a, const Vector& b);
double SquaredDistance(const Vector& a, const Vector& b);
double Norm(const Vector& v);
double FrobeniusNorm(const Matrix& a);
double Trace(const Matrix& a);
// Largest absolute entry of a - b; shapes must match.
double MaxAbsDiff(const Matrix& a, const Matrix& b);
double MaxAbsDiff(const Vector& a, const Vector& b);

struct MeanCovariance {
  Vector mean;
  Matrix cov;
};

// Column mean and population covariance (1/n normalisation) of a d x n
// sample stack. Throws DegenerateInput when n < 2.
MeanCovariance Covariance(const Matrix& samples);

struct SymmetricEigen {
  Vector values;   // sorted descending
  Matrix vectors;  // column i pairs with values[i]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Rotations continue
// until the off-diagonal Frobenius norm drops below `tol`.
// Throws InvalidInput for asymmetric input (beyond tol) and
// ConvergenceFailure after 100 * d^2 sweeps.
SymmetricEigen SymEig(const Matrix& a, double tol = 1e-10);

// Symmetric (ZCA) inverse square root W = V diag(1/sqrt(l + eps)) V^T, so
// that W^T W = (cov + eps I)^-1. `eps` is absolute.
// Throws InvalidInput for eigenvalues below -eps or a singular unregularised
// covariance.
Matrix ZcaMatrix(const Matrix& cov, double eps);

}  // namespace dsrg

#endif  // DSRG_LINALG_H_
