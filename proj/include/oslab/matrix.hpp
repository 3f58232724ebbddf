#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oslab {

/// Dense row-major real matrix. Sized for the small problems this library
/// targets (dimension up to a few dozen); no expression templates.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Matrix transpose() const;
  std::vector<double> diagonal_values() const;

  /// Largest absolute entry (0 for an empty matrix).
  double max_abs() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double scalar) noexcept;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix lhs, double scalar);
Matrix operator*(double scalar, Matrix rhs);
Matrix operator*(const Matrix& lhs, const Matrix& rhs);
std::vector<double> operator*(const Matrix& lhs, std::span<const double> x);

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Largest |A_ij - A_ji|.
double max_asymmetry(const Matrix& a);

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting. Throws InvalidArgument when A is numerically singular.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);

}  // namespace oslab
