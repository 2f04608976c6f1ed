#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lyap/extended_real.hpp"
#include "lyap/matrix.hpp"

namespace lyap {

/// Largest fiber dimension the dense routines are validated for.
inline constexpr std::size_t kMaxFiberDimension = 16;

/// Descending singular values sigma_1 >= ... >= sigma_min(rows, cols) >= 0.
struct SingularSpectrum {
  std::vector<double> values;
};

/// A strictly increasing k-subset of {0, ..., d-1}; the row/column label of a
/// compound matrix. Subsets are ordered lexicographically.
struct CompoundIndex {
  std::vector<std::size_t> subset;

  /// Lexicographic rank among all |subset|-subsets of {0, ..., d-1}.
  std::size_t rank(std::size_t d) const;
  static CompoundIndex unrank(std::size_t rank, std::size_t d, std::size_t k);
};

std::size_t binomial(std::size_t n, std::size_t k);

/// All k-subsets of {0, ..., d-1} in lexicographic order.
std::vector<CompoundIndex> k_subsets(std::size_t d, std::size_t k);

/// Determinant by partial-pivot elimination. 2x2 uses a compensated
/// difference of products, so exactly singular integer-like blocks give 0.
double determinant(const Matrix& a);

/// k-th exterior power: entry (R, C) is the minor with rows R, columns C.
Matrix compound_matrix(const Matrix& a, std::size_t k);

/// One-sided (Hestenes) Jacobi SVD. Relative tolerance 1e-14, at most 100
/// sweeps.
SingularSpectrum singular_values(const Matrix& a);

double spectral_norm(const Matrix& a);

/// Singular values at or below this are indistinguishable from zero in
/// double precision: sigma_1 * max(rows, cols) * machine epsilon.
double rank_tolerance(const Matrix& a, const SingularSpectrum& s);

/// sum_{i <= k} log sigma_i(a); -inf exactly when sigma_k is (numerically) zero.
ExtendedReal log_top_k_norm(const Matrix& a, std::size_t k);

/// sum_{i > d-k} log sigma_i(a), the log of the bottom-k conorm m_k(a).
ExtendedReal log_bottom_k_conorm(const Matrix& a, std::size_t k);

/// max over columns of the column absolute sum.
double l1_operator_norm(const Matrix& a);

/// Inverse by Gauss-Jordan with partial pivoting; nullopt if singular.
std::optional<Matrix> inverse(const Matrix& a);

}  // namespace lyap
