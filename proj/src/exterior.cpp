#include "lyap/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lyap/errors.hpp"

namespace lyap {

namespace {

void require_k(std::size_t d, std::size_t k, const char* who) {
  if (k < 1 || k > d) {
    throw ParameterError(std::string(who) + ": k must satisfy 1 <= k <= d");
  }
}

// ad - bc with one rounding error (Kahan's algorithm).
double difference_of_products(double a, double d, double b, double c) {
  const double w = b * c;
  const double e = std::fma(-b, c, w);
  const double f = std::fma(a, d, -w);
  return f + e;
}

double lu_determinant(std::vector<double> m, std::size_t n) {
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r * n + col]) > std::abs(m[pivot * n + col])) pivot = r;
    const double p = m[pivot * n + col];
    if (p == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m[pivot * n + c], m[col * n + c]);
      det = -det;
    }
    det *= p;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = m[r * n + col] / p;
      if (factor == 0.0) continue;
      for (std::size_t c = col + 1; c < n; ++c) m[r * n + c] -= factor * m[col * n + c];
    }
  }
  return det;
}

double minor(const Matrix& a, const std::vector<std::size_t>& rows,
             const std::vector<std::size_t>& cols) {
  const std::size_t k = rows.size();
  if (k == 1) return a(rows[0], cols[0]);
  if (k == 2) {
    return difference_of_products(a(rows[0], cols[0]), a(rows[1], cols[1]),
                                  a(rows[0], cols[1]), a(rows[1], cols[0]));
  }
  std::vector<double> block(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) block[i * k + j] = a(rows[i], cols[j]);
  return lu_determinant(std::move(block), k);
}

}  // namespace

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

std::size_t CompoundIndex::rank(std::size_t d) const {
  // Count the subsets that precede this one lexicographically.
  const std::size_t k = subset.size();
  std::size_t r = 0;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t start = i == 0 ? 0 : prev + 1;
    for (std::size_t v = start; v < subset[i]; ++v) r += binomial(d - v - 1, k - i - 1);
    prev = subset[i];
  }
  return r;
}

CompoundIndex CompoundIndex::unrank(std::size_t rank, std::size_t d, std::size_t k) {
  CompoundIndex idx;
  std::size_t v = 0;
  for (std::size_t i = 0; i < k; ++i) {
    while (true) {
      const std::size_t block = binomial(d - v - 1, k - i - 1);
      if (rank < block) break;
      rank -= block;
      ++v;
    }
    idx.subset.push_back(v);
    ++v;
  }
  return idx;
}

std::vector<CompoundIndex> k_subsets(std::size_t d, std::size_t k) {
  std::vector<CompoundIndex> out;
  if (k > d) return out;
  out.reserve(binomial(d, k));
  std::vector<std::size_t> cur(k);
  std::iota(cur.begin(), cur.end(), std::size_t{0});
  while (true) {
    out.push_back(CompoundIndex{cur});
    std::size_t i = k;
    while (i > 0 && cur[i - 1] == d - k + (i - 1)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

double determinant(const Matrix& a) {
  if (!a.is_square()) throw ParameterError("determinant: matrix must be square");
  const std::size_t n = a.rows();
  if (n == 0) return 1.0;
  if (n == 1) return a(0, 0);
  if (n == 2) return difference_of_products(a(0, 0), a(1, 1), a(0, 1), a(1, 0));
  return lu_determinant(std::vector<double>(a.entries().begin(), a.entries().end()), n);
}

Matrix compound_matrix(const Matrix& a, std::size_t k) {
  if (!a.is_square()) throw ParameterError("compound_matrix: matrix must be square");
  const std::size_t d = a.rows();
  require_k(d, k, "compound_matrix");
  if (k == 1) return a;
  const auto subsets = k_subsets(d, k);
  const std::size_t dim = subsets.size();
  Matrix out(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      out(r, c) = minor(a, subsets[r].subset, subsets[c].subset);
  return out;
}

SingularSpectrum singular_values(const Matrix& a) {
  // Work on whichever orientation has fewer columns.
  Matrix u = a.rows() >= a.cols() ? a : a.transpose();
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  constexpr double kTolerance = 1e-14;
  constexpr int kMaxSweeps = 100;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p), uq = u(i, q);
          alpha += up * up;
          beta += uq * uq;
          gamma += up * uq;
        }
        if (gamma == 0.0 || alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kTolerance * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
      }
    }
    if (!rotated) break;
  }

  SingularSpectrum s;
  s.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = u.column(j);
    s.values[j] = euclidean_norm(col);
  }
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  return s;
}

double spectral_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  return singular_values(a).values.front();
}

double rank_tolerance(const Matrix& a, const SingularSpectrum& s) {
  if (s.values.empty()) return 0.0;
  return s.values.front() * static_cast<double>(std::max(a.rows(), a.cols())) *
         std::numeric_limits<double>::epsilon();
}

ExtendedReal log_top_k_norm(const Matrix& a, std::size_t k) {
  const std::size_t d = std::min(a.rows(), a.cols());
  require_k(d, k, "log_top_k_norm");
  const auto s = singular_values(a);
  const double tol = rank_tolerance(a, s);
  if (s.values[k - 1] <= tol) return ExtendedReal::minus_infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(s.values[i]);
  return sum;
}

ExtendedReal log_bottom_k_conorm(const Matrix& a, std::size_t k) {
  const std::size_t d = std::min(a.rows(), a.cols());
  require_k(d, k, "log_bottom_k_conorm");
  const auto s = singular_values(a);
  const double tol = rank_tolerance(a, s);
  if (s.values[d - 1] <= tol) return ExtendedReal::minus_infinity();
  double sum = 0.0;
  for (std::size_t i = d - k; i < d; ++i) sum += std::log(s.values[i]);
  return sum;
}

double l1_operator_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) sum += std::abs(a(r, c));
    best = std::max(best, sum);
  }
  return best;
}

std::optional<Matrix> inverse(const Matrix& a) {
  if (!a.is_square()) throw ParameterError("inverse: matrix must be square");
  const std::size_t n = a.rows();
  Matrix m = a;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    const double p = m(pivot, col);
    if (p == 0.0) return std::nullopt;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(m(pivot, c), m(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      m(col, c) /= p;
      inv(col, c) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        m(r, c) -= f * m(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

}  // namespace lyap
