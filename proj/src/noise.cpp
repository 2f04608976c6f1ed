#include "lyap/noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lyap/errors.hpp"

namespace lyap {

void validate_stochastic(const Matrix& rows, const char* who) {
  if (!rows.is_square() || rows.rows() == 0) {
    throw ParameterError(std::string(who) + ": kernel must be a non-empty square matrix");
  }
  for (std::size_t t = 0; t < rows.rows(); ++t) {
    double sum = 0.0;
    for (double v : rows.row(t)) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string(who) + ": row " + std::to_string(t) +
                             " has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      throw ParameterError(std::string(who) + ": row " + std::to_string(t) +
                           " does not sum to 1");
    }
  }
}

FiniteKernel::FiniteKernel(Matrix rows) : rows_(std::move(rows)) {
  validate_stochastic(rows_, "FiniteKernel");
}

PlaceDependentKernel::PlaceDependentKernel(std::vector<FiniteKernel> per_state)
    : per_state_(std::move(per_state)) {
  if (per_state_.empty()) throw ParameterError("PlaceDependentKernel: no states");
  const std::size_t t = per_state_.front().states();
  for (const auto& k : per_state_) {
    if (k.states() != t) {
      throw ParameterError("PlaceDependentKernel: kernels must share one alphabet");
    }
  }
}

StationaryLaw::StationaryLaw(std::size_t symbols, std::size_t states,
                             std::vector<double> weights)
    : symbols_(symbols), states_(states), weights_(std::move(weights)) {
  if (symbols_ == 0 || states_ == 0 || weights_.size() != symbols_ * states_) {
    throw ParameterError("StationaryLaw: weight count must equal |T|*|X|");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ParameterError("StationaryLaw: weights must be finite and non-negative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw ParameterError("StationaryLaw: weights must sum to 1");
  }
}

ChainState StationaryLaw::sample(Rng& rng) const {
  return state_at(sample_index(weights_, rng));
}

FiniteKernel bernoulli_kernel(std::span<const double> p) {
  const std::size_t n = p.size();
  if (n == 0) throw ParameterError("bernoulli_kernel: empty probability vector");
  Matrix rows(n, n);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t s = 0; s < n; ++s) rows(t, s) = p[s];
  return FiniteKernel(std::move(rows));
}

std::vector<std::vector<std::size_t>> closed_classes(const Matrix& stochastic) {
  const std::size_t n = stochastic.rows();
  // reach[i][j]: j reachable from i along positive-probability edges.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> stack{i};
    reach[i][i] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (stochastic(u, v) > 0.0 && !reach[i][v]) {
          reach[i][v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  // i lies in a closed class iff everything reachable from i reaches back.
  std::vector<std::vector<std::size_t>> classes;
  std::vector<char> assigned(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    bool closed = true;
    for (std::size_t j = 0; j < n && closed; ++j)
      if (reach[i][j] && !reach[j][i]) closed = false;
    if (!closed) continue;
    std::vector<std::size_t> cls;
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j]) {
        cls.push_back(j);
        assigned[j] = 1;
      }
    }
    classes.push_back(std::move(cls));
  }
  return classes;
}

double stationarity_residual(std::span<const double> p, const Matrix& stochastic) {
  const std::size_t n = stochastic.rows();
  double res = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += p[i] * stochastic(i, j);
    res += std::abs(acc - p[j]);
  }
  return res;
}

namespace {

// Solve (Q^T - I) p = 0 with the last equation replaced by sum(p) = 1.
std::vector<double> direct_solve(const Matrix& q) {
  const std::size_t n = q.rows();
  Matrix a(n, n);
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = q(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  b[n - 1] = 1.0;

  std::vector<std::size_t> perm(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) return {};
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> p(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * p[c];
    p[i] = acc / a(i, i);
  }
  return p;
}

void clean_probability(std::vector<double>& p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  for (double& v : p) v /= sum;
}

// Cesaro-damped power iteration mu <- (mu + mu Q) / 2.
void damped_power_iteration(std::vector<double>& mu, const Matrix& q, double tol,
                            std::size_t max_iterations) {
  const std::size_t n = q.rows();
  std::vector<double> next(n);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mu[i] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) next[j] += mu[i] * q(i, j);
    }
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = 0.5 * (mu[j] + next[j]);
      change += std::abs(v - mu[j]);
      mu[j] = v;
    }
    if (change <= tol) break;
  }
}

}  // namespace

std::vector<double> stationary_vector(const Matrix& stochastic) {
  validate_stochastic(stochastic, "stationary_vector");
  const auto classes = closed_classes(stochastic);
  if (classes.size() != 1) {
    throw AmbiguityError("stationary distribution is not unique: the chain has " +
                         std::to_string(classes.size()) +
                         " closed classes; supply the stationary law explicitly");
  }
  const std::size_t n = stochastic.rows();
  constexpr double kTolerance = 1e-12;

  std::vector<double> p = direct_solve(stochastic);
  if (!p.empty() && std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); })) {
    clean_probability(p);
  } else {
    p.assign(n, 1.0 / static_cast<double>(n));
  }
  if (stationarity_residual(p, stochastic) > kTolerance) {
    damped_power_iteration(p, stochastic, kTolerance, 1'000'000);
    clean_probability(p);
  }
  return p;
}

std::vector<double> stationary_distribution(const FiniteKernel& q) {
  return stationary_vector(q.matrix());
}

}  // namespace lyap
