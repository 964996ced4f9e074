#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "rectnet/errors.hpp"

namespace rectnet {

using Vector = std::vector<double>;

// Dense row-major matrix. Small sizes only; no attempt at blocking or SIMD.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

inline Vector matvec(const Matrix& m, const Vector& v) {
  if (v.size() != m.cols)
    throw DimensionMismatch("matvec: " + shape_str(m) + " times vector of length " +
                            std::to_string(v.size()));
  Vector out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    const double* row = m.data.data() + i * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw DimensionMismatch("matmul: " + shape_str(a) + " times " + shape_str(b));
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline Matrix mat_add(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw DimensionMismatch("mat_add: " + shape_str(a) + " plus " + shape_str(b));
  Matrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

// Stack a on top of b; column counts must agree.
inline Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols)
    throw DimensionMismatch("vstack: " + shape_str(a) + " over " + shape_str(b));
  Matrix out(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
  return out;
}

inline Matrix vstack(const Matrix& a, const Matrix& b, const Matrix& c) {
  return vstack(vstack(a, b), c);
}

inline Vector row_of(const Matrix& m, std::size_t i) {
  return Vector(m.data.begin() + i * m.cols, m.data.begin() + (i + 1) * m.cols);
}

inline Vector vec_add(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("vec_add: lengths " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  Vector out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline Vector concat(const Vector& a, const Vector& b) {
  Vector out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Vector concat(const Vector& a, const Vector& b, const Vector& c) {
  return concat(concat(a, b), c);
}

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("dot: lengths " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// y += alpha * x
inline void axpy(Vector& y, double alpha, const Vector& x) {
  if (y.size() != x.size())
    throw DimensionMismatch("axpy: lengths " + std::to_string(y.size()) + " and " +
                            std::to_string(x.size()));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline Vector scaled(const Vector& v, double alpha) {
  Vector out = v;
  for (double& e : out) e *= alpha;
  return out;
}

inline Vector relu(const Vector& v) {
  Vector out = v;
  for (double& e : out) e = e > 0.0 ? e : 0.0;
  return out;
}

}  // namespace rectnet
