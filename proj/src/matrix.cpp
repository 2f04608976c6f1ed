#include "lyap/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lyap/errors.hpp"

namespace lyap {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    throw ParameterError("Matrix: entry count does not match rows*cols");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ParameterError("Matrix: ragged initializer");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

Matrix Matrix::rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return Matrix{{c, -s}, {s, c}};
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  std::vector<double> entries;
  entries.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ParameterError("Matrix: ragged rows");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(entries));
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::scaled(double c) const {
  Matrix out = *this;
  out *= c;
  return out;
}

Matrix& Matrix::operator*=(double c) {
  for (double& e : entries_) e *= c;
  return *this;
}

std::vector<double> Matrix::apply(std::span<const double> x) const {
  if (x.size() != cols_) throw ParameterError("Matrix::apply: dimension mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    const double* a = entries_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) acc += a[c] * x[c];
    y[r] = acc;
  }
  return y;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double e : entries_) m = std::max(m, std::abs(e));
  return m;
}

double Matrix::frobenius_norm() const { return euclidean_norm(entries_); }

bool Matrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](double e) { return std::isfinite(e); });
}

void multiply_into(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw ParameterError("Matrix product: dimension mismatch");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Matrix(a.rows(), b.cols());
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  auto o = out.entries();
  std::fill(o.begin(), o.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < m; ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      for (std::size_t j = 0; j < p; ++j) o[i * p + j] += ail * b(l, j);
    }
  }
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  multiply_into(a, b, out);
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ParameterError("Matrix sum: dimension mismatch");
  Matrix out = a;
  auto o = out.entries();
  auto be = b.entries();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += be[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) { return a + b.scaled(-1.0); }

double euclidean_norm(std::span<const double> v) {
  // Scaled accumulation keeps huge/tiny entries from overflowing.
  double scale = 0.0;
  for (double e : v) scale = std::max(scale, std::abs(e));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double e : v) {
    const double q = e / scale;
    sum += q * q;
  }
  return scale * std::sqrt(sum);
}

std::ostream& operator<<(std::ostream& os, const Matrix& m) {
  os << '[';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    os << (r ? ", [" : "[");
    for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << m(r, c);
    os << ']';
  }
  return os << ']';
}

}  // namespace lyap
