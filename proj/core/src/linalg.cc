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

#include "dsrg/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dsrg/error.h"

namespace dsrg {
namespace {

void RequireSquare(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    Fail(ErrorCode::kInvalidInput, std::string(what) + ": matrix is " +
                                       std::to_string(a.rows()) + "x" +
                                       std::to_string(a.cols()));
  }
}

double OffDiagonalNorm(const std::vector<double>& a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) sum += a[i * n + j] * a[i * n + j];
    }
  }
  return std::sqrt(sum);
}

struct EigenDouble {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // n x n row-major, column i pairs with values[i]
};

EigenDouble JacobiEigen(const Matrix& a, double tol) {
  RequireSquare(a, "SymEig");
  const std::size_t n = a.rows();
  double scale = 1.0;
  for (float v : a.values()) scale = std::max(scale, std::abs(double{v}));
  if (a.MaxAsymmetry() > tol * scale) {
    Fail(ErrorCode::kInvalidInput, "SymEig: matrix is not symmetric");
  }

  std::vector<double> m = a.ToDoubles();
  // Symmetrise exactly so rotations act on a truly symmetric matrix.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (m[i * n + j] + m[j * n + i]);
      m[i * n + j] = avg;
      m[j * n + i] = avg;
    }
  }
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  // The threshold scales with the matrix so badly scaled inputs can still
  // converge in double precision.
  const double threshold = tol * std::max(1.0, FrobeniusNorm(a));
  const std::size_t max_sweeps = std::max<std::size_t>(1, 100 * n * n);
  std::size_t sweep = 0;
  while (OffDiagonalNorm(m, n) >= threshold) {
    if (sweep++ >= max_sweeps) {
      Fail(ErrorCode::kConvergenceFailure,
           "SymEig: no convergence after " + std::to_string(max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (apq == 0.0) continue;
        const double app = m[p * n + p];
        const double aqq = m[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m[k * n + p];
          const double mkq = m[k * n + q];
          m[k * n + p] = c * mkp - s * mkq;
          m[k * n + q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m[p * n + k];
          const double mqk = m[q * n + k];
          m[p * n + k] = c * mpk - s * mqk;
          m[q * n + k] = s * mpk + c * mqk;
        }
        m[p * n + q] = 0.0;
        m[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return m[x * n + x] > m[y * n + y];
  });
  std::vector<double> values(n);
  std::vector<double> vectors(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    values[c] = m[order[c] * n + order[c]];
    for (std::size_t r = 0; r < n; ++r) vectors[r * n + c] = v[r * n + order[c]];
  }
  return {std::move(values), std::move(vectors)};
}

}  // namespace

Vector Vector::FromDoubles(std::span<const double> values) {
  std::vector<float> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [](double v) { return static_cast<float>(v); });
  return Vector(std::move(out));
}

std::vector<double> Vector::ToDoubles() const {
  return std::vector<double>(data_.begin(), data_.end());
}

bool Vector::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v); });
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    Fail(ErrorCode::kInvalidInput, "matrix payload size does not match shape");
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0f;
  return m;
}

Matrix Matrix::Diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    m(i, i) = static_cast<float>(diag[i]);
  }
  return m;
}

Matrix Matrix::FromColumns(std::span<const Vector> columns) {
  if (columns.empty()) return Matrix();
  const std::size_t d = columns.front().dim();
  Matrix m(d, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].dim() != d) {
      Fail(ErrorCode::kInvalidInput, "column dimensions disagree");
    }
    m.SetColumn(c, columns[c]);
  }
  return m;
}

Matrix Matrix::FromDoubles(std::size_t rows, std::size_t cols,
                           std::span<const double> values) {
  if (values.size() != rows * cols) {
    Fail(ErrorCode::kInvalidInput, "matrix payload size does not match shape");
  }
  std::vector<float> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [](double v) { return static_cast<float>(v); });
  return Matrix(rows, cols, std::move(out));
}

Vector Matrix::Column(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Matrix::SetColumn(std::size_t c, const Vector& v) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

std::vector<double> Matrix::ToDoubles() const {
  return std::vector<double>(data_.begin(), data_.end());
}

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v); });
}

double Matrix::MaxAsymmetry() const {
  RequireSquare(*this, "MaxAsymmetry");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      worst = std::max(worst, std::abs(static_cast<double>((*this)(i, j)) -
                                       static_cast<double>((*this)(j, i))));
    }
  }
  return worst;
}

Matrix Transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  }
  return t;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    Fail(ErrorCode::kInvalidInput, "MatMul: inner dimensions disagree");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += static_cast<double>(a(i, k)) * b(k, j);
      }
      out(i, j) = static_cast<float>(acc);
    }
  }
  return out;
}

Vector MatVec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.dim()) {
    Fail(ErrorCode::kInvalidInput, "MatVec: dimensions disagree");
  }
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      acc += static_cast<double>(a(i, k)) * x[k];
    }
    out[i] = static_cast<float>(acc);
  }
  return out;
}

double Dot(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) Fail(ErrorCode::kInvalidInput, "Dot: dim mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    acc += static_cast<double>(a[i]) * b[i];
  }
  return acc;
}

double SquaredDistance(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) {
    Fail(ErrorCode::kInvalidInput, "SquaredDistance: dim mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double diff = static_cast<double>(a[i]) - b[i];
    acc += diff * diff;
  }
  return acc;
}

double Norm(const Vector& v) { return std::sqrt(Dot(v, v)); }

double FrobeniusNorm(const Matrix& a) {
  double acc = 0.0;
  for (float v : a.values()) acc += static_cast<double>(v) * v;
  return std::sqrt(acc);
}

double Trace(const Matrix& a) {
  RequireSquare(a, "Trace");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, i);
  return acc;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    Fail(ErrorCode::kInvalidInput, "MaxAbsDiff: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a.values()[i]) - b.values()[i]));
  }
  return worst;
}

double MaxAbsDiff(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) Fail(ErrorCode::kInvalidInput, "MaxAbsDiff: dim");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return worst;
}

MeanCovariance Covariance(const Matrix& samples) {
  const std::size_t d = samples.rows();
  const std::size_t n = samples.cols();
  if (n < 2) {
    Fail(ErrorCode::kDegenerateInput,
         "covariance needs at least 2 samples, got " + std::to_string(n));
  }
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += samples(r, c);
    mean[r] = acc / static_cast<double>(n);
  }
  std::vector<double> centred(d * n);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      centred[r * n + c] = samples(r, c) - mean[r];
    }
  }
  Matrix cov(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        acc += centred[i * n + c] * centred[j * n + c];
      }
      const float v = static_cast<float>(acc / static_cast<double>(n));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return {Vector::FromDoubles(mean), std::move(cov)};
}

SymmetricEigen SymEig(const Matrix& a, double tol) {
  const EigenDouble eig = JacobiEigen(a, tol);
  const std::size_t n = a.rows();
  return {Vector::FromDoubles(eig.values), Matrix::FromDoubles(n, n, eig.vectors)};
}

Matrix ZcaMatrix(const Matrix& cov, double eps) {
  RequireSquare(cov, "ZcaMatrix");
  if (eps < 0.0) Fail(ErrorCode::kInvalidInput, "ZcaMatrix: eps must be >= 0");
  const std::size_t n = cov.rows();
  const EigenDouble eig = JacobiEigen(cov, 1e-12);
  double largest = 0.0;
  for (double l : eig.values) largest = std::max(largest, l);
  // Jacobi leaves O(machine eps * |cov|) noise on zero eigenvalues.
  const double slack = 1e-6 * std::max(largest, 1e-30);
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double l = eig.values[i];
    if (l < -eps - slack) {
      Fail(ErrorCode::kInvalidInput,
           "ZcaMatrix: covariance has negative eigenvalue " + std::to_string(l));
    }
    l = std::max(l, 0.0) + eps;
    if (l <= 0.0) {
      Fail(ErrorCode::kInvalidInput, "ZcaMatrix: singular covariance needs eps > 0");
    }
    inv_sqrt[i] = 1.0 / std::sqrt(l);
  }
  // W = V diag(inv_sqrt) V^T, accumulated in double and symmetrised.
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += eig.vectors[i * n + k] * inv_sqrt[k] * eig.vectors[j * n + k];
      }
      w[i * n + j] = acc;
      w[j * n + i] = acc;
    }
  }
  return Matrix::FromDoubles(n, n, w);
}

}  // namespace dsrg
