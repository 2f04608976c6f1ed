#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lyap/matrix.hpp"
#include "lyap/noise.hpp"

namespace lyap {

/// A random linear cocycle over a finite state-phase space Z = T x X.
///
/// From z = (t, x) the fiber map F(t, x) is applied, the phase moves to
/// x' = f(t, x), and the next symbol is drawn as s ~ Q_{x'}(t, .).
struct CocycleModel {
  std::size_t dim = 0;      // fiber dimension d
  std::size_t symbols = 0;  // |T|
  std::size_t states = 0;   // |X|
  std::vector<std::size_t> next_state;  // f(t, x) at index t * states + x
  std::vector<Matrix> matrices;         // F(t, x) at index t * states + x
  NoiseKernel kernel = FiniteKernel(Matrix{{1.0}});
  std::optional<StationaryLaw> nu;

  std::size_t index(std::size_t t, std::size_t x) const { return t * states + x; }
  std::size_t map(std::size_t t, std::size_t x) const { return next_state[index(t, x)]; }
  const Matrix& matrix(std::size_t t, std::size_t x) const { return matrices[index(t, x)]; }
  std::size_t phase_space_size() const { return symbols * states; }

  bool has_finite_kernel() const;
  /// Q_x(t, .) as a probability row; throws ParameterError for sampler kernels.
  std::span<const double> kernel_row(std::size_t t, std::size_t x) const;

  /// Throws ParameterError on any inconsistency.
  void validate() const;

  /// Every F multiplied by c (> 0); f, kernel and nu unchanged.
  CocycleModel scaled(double c) const;

  /// X = {*}: matrix products driven by `kernel` over the given alphabet.
  static CocycleModel matrix_products(std::vector<Matrix> per_symbol, NoiseKernel kernel,
                                      std::optional<StationaryLaw> nu = std::nullopt);
};

/// Edge model: maps and matrices are attached to jumps t -> s, the phase moves
/// by x' = f(t, s, x) and the noise is a place-independent chain Q on T.
struct EdgeModel {
  std::size_t dim = 0;
  std::size_t symbols = 0;
  std::size_t states = 0;
  std::vector<std::size_t> next_state;  // index (t * symbols + s) * states + x
  std::vector<Matrix> matrices;
  FiniteKernel kernel = FiniteKernel(Matrix{{1.0}});
  std::optional<StationaryLaw> nu;  // over T x X

  std::size_t index(std::size_t t, std::size_t s, std::size_t x) const {
    return (t * symbols + s) * states + x;
  }
  std::size_t map(std::size_t t, std::size_t s, std::size_t x) const {
    return next_state[index(t, s, x)];
  }
  const Matrix& matrix(std::size_t t, std::size_t s, std::size_t x) const {
    return matrices[index(t, s, x)];
  }

  void validate() const;
};

}  // namespace lyap
