#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace lyap {

/// Dense real matrix, row-major. Sized for desk-scale work (d <= 16 fibers,
/// compound matrices up to a few thousand rows).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix diagonal(std::initializer_list<double> diag);
  /// Rotation by `angle` radians (2x2).
  static Matrix rotation(double angle);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> entries() noexcept { return entries_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(entries_).subspan(r * cols_, cols_);
  }
  std::vector<double> column(std::size_t c) const;
  std::vector<std::vector<double>> to_rows() const;

  Matrix transpose() const;
  Matrix scaled(double c) const;
  Matrix& operator*=(double c);

  /// y = A x
  std::vector<double> apply(std::span<const double> x) const;

  double max_abs() const;
  double frobenius_norm() const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

/// out = a * b without allocating when `out` already has the right shape.
void multiply_into(const Matrix& a, const Matrix& b, Matrix& out);

double euclidean_norm(std::span<const double> v);

std::ostream& operator<<(std::ostream& os, const Matrix& m);

}  // namespace lyap
