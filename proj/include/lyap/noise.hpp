#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "lyap/matrix.hpp"
#include "lyap/rng.hpp"

namespace lyap {

/// Tolerance on row sums of stochastic matrices.
inline constexpr double kStochasticTolerance = 1e-12;

/// Transition probabilities Q(t, s) on a finite alphabet.
class FiniteKernel {
 public:
  /// Validates: square, entries >= 0, each row sums to 1 within 1e-12.
  explicit FiniteKernel(Matrix rows);

  std::size_t states() const noexcept { return rows_.rows(); }
  std::span<const double> row(std::size_t t) const { return rows_.row(t); }
  double operator()(std::size_t t, std::size_t s) const { return rows_(t, s); }
  const Matrix& matrix() const noexcept { return rows_; }

  friend bool operator==(const FiniteKernel&, const FiniteKernel&) = default;

 private:
  Matrix rows_;
};

/// Family x -> Q_x of kernels over a common alphabet.
class PlaceDependentKernel {
 public:
  explicit PlaceDependentKernel(std::vector<FiniteKernel> per_state);

  std::size_t symbols() const noexcept { return per_state_.front().states(); }
  std::size_t states() const noexcept { return per_state_.size(); }
  const FiniteKernel& at(std::size_t x) const { return per_state_.at(x); }

  friend bool operator==(const PlaceDependentKernel&, const PlaceDependentKernel&) = default;

 private:
  std::vector<FiniteKernel> per_state_;
};

/// User-supplied draw s ~ Q_x(t, .). Accepted by path simulation and the Monte
/// Carlo estimators only; exact solvers reject it.
struct SamplerKernel {
  std::function<std::size_t(std::size_t t, std::size_t x, Rng& rng)> draw;

  friend bool operator==(const SamplerKernel&, const SamplerKernel&) { return false; }
};

using NoiseKernel = std::variant<FiniteKernel, PlaceDependentKernel, SamplerKernel>;

/// A point z = (t, x) of the state-phase space Z = T x X.
struct ChainState {
  std::size_t t = 0;
  std::size_t x = 0;

  friend auto operator<=>(const ChainState&, const ChainState&) = default;
};

/// Probability vector over Z = T x X, stored t-major (index t * |X| + x).
class StationaryLaw {
 public:
  StationaryLaw(std::size_t symbols, std::size_t states, std::vector<double> weights);

  std::size_t symbols() const noexcept { return symbols_; }
  std::size_t states() const noexcept { return states_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator()(std::size_t t, std::size_t x) const { return weights_[t * states_ + x]; }
  ChainState state_at(std::size_t index) const { return {index / states_, index % states_}; }

  /// Draw z ~ nu.
  ChainState sample(Rng& rng) const;

  friend bool operator==(const StationaryLaw&, const StationaryLaw&) = default;

 private:
  std::size_t symbols_;
  std::size_t states_;
  std::vector<double> weights_;
};

/// Row-stochastic validation shared by every constructor; throws ParameterError.
void validate_stochastic(const Matrix& rows, const char* who);

/// Every row equals p.
FiniteKernel bernoulli_kernel(std::span<const double> p);

/// Strongly connected components of the support graph with no outgoing edge.
std::vector<std::vector<std::size_t>> closed_classes(const Matrix& stochastic);

/// Unique stationary row vector of a stochastic matrix. Throws AmbiguityError
/// when there are several closed classes.
std::vector<double> stationary_vector(const Matrix& stochastic);

std::vector<double> stationary_distribution(const FiniteKernel& q);

/// ||p^T Q - p^T||_1
double stationarity_residual(std::span<const double> p, const Matrix& stochastic);

}  // namespace lyap
